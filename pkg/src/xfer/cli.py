"""Command-line entry point: ``xfer <command> ...``.

Exit codes: 0 success, 1 usage, 2 bad input, 3 pipeline failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .corpus import DuplicateUtteranceId, annotate_interactive, load_corpus, save_corpus
from .harness import Pipeline, TooFewUtterances, evaluate, generate_candidates
from .preference import (
    EmptyCorpus, PreferenceModel, UnannotatedCandidate, describe, dump_model, load_model, train,
)
from .qlf import QlfSyntaxError, parse_qlf_lines
from .synth import SynthConfig, synth_corpus
from .transfer import DuplicateRuleId, UnboundTargetMeta
from .triples import load_roles

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_PIPELINE = 0, 1, 2, 3

_INPUT_ERRORS = (OSError, QlfSyntaxError, DuplicateUtteranceId, DuplicateRuleId, UnboundTargetMeta,
                 UnannotatedCandidate, EmptyCorpus, TooFewUtterances)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _weights(text: str) -> tuple[float, float]:
    try:
        wr, wl = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected WR,WL") from None
    return wr, wl


def _roles(path):
    return load_roles(Path(path).read_text(encoding="utf-8")) if path else None


def cmd_transfer(args) -> int:
    pipeline = Pipeline.from_files(args.rules, args.pre, args.rw, args.ppclass, args.roles)
    model = load_model(Path(args.model).read_text(encoding="utf-8")) if args.model else PreferenceModel()
    sources = parse_qlf_lines(Path(args.input).read_text(encoding="utf-8"))
    for i, src in enumerate(sources):
        if i:
            print()
        for cand in generate_candidates(src, pipeline, model, args.k):
            print(describe(cand))
    return EXIT_OK


def cmd_train(args) -> int:
    corpus = load_corpus(args.corpus)
    model = train(corpus, _roles(args.roles), args.weights)
    Path(args.output).write_text(dump_model(model), encoding="utf-8")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    corpus = load_corpus(args.corpus)
    report = evaluate(corpus, _roles(args.roles), args.weights, args.folds, args.seed)
    print("\n".join(report.lines()))
    return EXIT_OK


def cmd_annotate(args) -> int:
    corpus = load_corpus(args.corpus)
    out = args.output or args.corpus
    annotate_interactive(corpus, sys.stdin, sys.stdout, lambda c: save_corpus(c, out))
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        cfg = SynthConfig(seed=args.seed, n_utterances=args.n, noise_rate=args.noise, k=args.k)
    except ValueError as e:
        raise UsageError(f"xfer synth: error: {e}") from None
    corpus, planted = synth_corpus(cfg)
    save_corpus(corpus, args.output)
    if args.planted:
        Path(args.planted).write_text(dump_model(planted), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="xfer", description="Packed QLF transfer with trained preferences.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name in ("transfer", "nbest"):
        t = sub.add_parser(name, help="transfer source QLFs and print the k best candidates")
        t.add_argument("--rules", required=True, help="transfer rule file")
        t.add_argument("--pre", help="code-shape table for pre-transfer coercion")
        t.add_argument("--rw", help="pre/post rewrite phase file")
        t.add_argument("--ppclass", help="PP class table")
        t.add_argument("--roles", help="role table")
        t.add_argument("--model", help="preference model (default: all scores zero)")
        t.add_argument("-k", type=int, default=1 if name == "transfer" else 5)
        t.add_argument("input", help="file of source QLFs, one per line")
        t.set_defaults(func=cmd_transfer)

    t = sub.add_parser("train", help="train a preference model from an annotated corpus")
    t.add_argument("--corpus", required=True)
    t.add_argument("--roles")
    t.add_argument("--weights", type=_weights, default=(1.0, 1.0), help="WR,WL")
    t.add_argument("-o", "--output", required=True)
    t.set_defaults(func=cmd_train)

    t = sub.add_parser("evaluate", help="cross-validated accuracy against a random baseline")
    t.add_argument("--corpus", required=True)
    t.add_argument("--roles")
    t.add_argument("--weights", type=_weights, default=(1.0, 1.0), help="WR,WL")
    t.add_argument("--folds", type=int, default=5)
    t.add_argument("--seed", type=int, default=42)
    t.set_defaults(func=cmd_evaluate)

    t = sub.add_parser("annotate", help="judge unjudged candidates interactively")
    t.add_argument("--corpus", required=True)
    t.add_argument("-o", "--output", help="write here instead of updating the corpus in place")
    t.set_defaults(func=cmd_annotate)

    t = sub.add_parser("synth", help="write a synthetic annotated corpus")
    t.add_argument("--seed", type=int, default=42)
    t.add_argument("--n", type=int, default=500)
    t.add_argument("--noise", type=float, default=0.05)
    t.add_argument("-k", type=int, default=5)
    t.add_argument("-o", "--output", required=True)
    t.add_argument("--planted", help="also write the planted model here")
    t.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "k", 1) < 1:
            parser.error("-k must be positive")
        if getattr(args, "folds", 2) < 2:
            parser.error("--folds must be at least 2")
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except _INPUT_ERRORS as e:
        print(f"xfer: input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, RuntimeError, RecursionError, KeyError) as e:
        print(f"xfer: pipeline error: {e}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
