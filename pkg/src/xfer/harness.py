"""Pipeline wiring, N-best generation and cross-validated evaluation."""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

from .corpus import UNJUDGED, AnnotatedCorpus
from .preference import (
    BeamConfig, Candidate, PreferenceModel, UnannotatedCandidate, kbest_select, load_model,
    score_candidate, train_pairs,
)
from .qlf import QlfNode, parse_qlf_lines
from .rewrite import CodePattern, PpClassTable, RewriteRule, load_codeshapes, load_phases, load_ppclass, pre_transfer
from .transfer import RuleSet, load_rules, transfer
from .triples import RoleTable, extract_triples, load_roles

__all__ = [
    "Pipeline", "EvalReport", "FoldReport", "TooFewUtterances",
    "generate_candidates", "evaluate", "split_folds", "demo_pipeline", "demo_model", "demo_sources",
    "read_data",
]


class TooFewUtterances(ValueError):
    pass


@dataclass
class Pipeline:
    rules: RuleSet = field(default_factory=RuleSet)
    pre: Sequence[RewriteRule] = ()
    post: Sequence[RewriteRule] = ()
    codes: Sequence[CodePattern] = ()
    pp_table: PpClassTable | None = None
    roles: RoleTable | None = None
    beam: BeamConfig = BeamConfig()

    @classmethod
    def from_files(cls, rules=None, pre=None, rw=None, ppclass=None, roles=None) -> "Pipeline":
        """Build a pipeline from file paths; any of them may be omitted."""
        def text(p):
            return Path(p).read_text(encoding="utf-8") if p else ""
        pre_rules, post_rules = load_phases(text(rw))
        return cls(
            rules=load_rules(text(rules)),
            pre=pre_rules, post=post_rules,
            codes=load_codeshapes(text(pre)),
            pp_table=load_ppclass(text(ppclass)) if ppclass else None,
            roles=load_roles(text(roles)) if roles else None,
        )


def read_data(name: str) -> str:
    """Text of a fixture shipped in ``xfer/data``."""
    return resources.files("xfer").joinpath("data", name).read_text(encoding="utf-8")


def demo_pipeline() -> Pipeline:
    pre, post = load_phases(read_data("demo.rw"))
    return Pipeline(
        rules=load_rules(read_data("demo.rules")),
        pre=pre, post=post,
        codes=load_codeshapes(read_data("demo.codes")),
        pp_table=load_ppclass(read_data("demo.ppclass")),
        roles=load_roles(read_data("demo.roles")),
    )


def demo_model() -> PreferenceModel:
    return load_model(read_data("demo.model"))


def demo_sources() -> list[QlfNode]:
    return parse_qlf_lines(read_data("demo.qlf"))


def generate_candidates(source: QlfNode, pipeline: Pipeline, seed_model: PreferenceModel,
                        k: int) -> list[Candidate]:
    """pre-transfer, packed transfer, k-best under ``seed_model``, post-transfer."""
    if k < 1:
        raise ValueError("k must be positive")
    q = pre_transfer(source, pipeline.pre, pipeline.codes)
    result = transfer(pipeline.rules, q)
    best = kbest_select(result, pipeline.roles, seed_model, k, pipeline.beam,
                        pipeline.post, pipeline.pp_table)
    return [c for c, _ in best]


# ---------------------------------------------------------------------------
# Evaluation


@dataclass
class FoldReport:
    n_analyzed: int = 0
    n_with_acceptable_in_topk: int = 0
    n_model_correct: int = 0
    baseline_sum: float = 0.0

    @property
    def accuracy(self) -> float:
        n = self.n_with_acceptable_in_topk
        return self.n_model_correct / n if n else 0.0

    @property
    def baseline_expected(self) -> float:
        n = self.n_with_acceptable_in_topk
        return self.baseline_sum / n if n else 0.0


@dataclass
class EvalReport(FoldReport):
    per_fold: list = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"fold {i}: {f.n_model_correct}/{f.n_with_acceptable_in_topk} {f.baseline_expected:.4f}"
               for i, f in enumerate(self.per_fold, 1)]
        out.append(f"total: {self.n_model_correct}/{self.n_with_acceptable_in_topk} "
                   f"accuracy {self.accuracy:.4f} baseline {self.baseline_expected:.4f} "
                   f"analyzed {self.n_analyzed}")
        return out


def split_folds(n: int, folds: int, rng_seed: int) -> list[list[int]]:
    """Shuffle 0..n-1 and cut into ``folds`` parts whose sizes differ by at most one."""
    order = list(range(n))
    random.Random(rng_seed).shuffle(order)
    q, r = divmod(n, folds)
    parts, start = [], 0
    for i in range(folds):
        size = q + (1 if i < r else 0)
        parts.append(order[start:start + size])
        start += size
    return parts


def _score_utterance(u, feats, model) -> tuple[bool, float] | None:
    """(model's pick acceptable, uniform-choice expectation), or None if ineligible."""
    n_ok = sum(c.acceptable for c in u.candidates)
    if not n_ok:
        return None
    best, best_score = None, -math.inf
    for c, (rules, triples) in zip(u.candidates, feats):
        s = score_candidate(Candidate(c.qlf, rules, triples), model)
        if s > best_score:  # ties keep the earlier (higher seed-ranked) candidate
            best, best_score = c, s
    return best.acceptable, n_ok / len(u.candidates)


def evaluate(corpus: AnnotatedCorpus, roles: RoleTable | None = None, weights=(1.0, 1.0),
             folds: int = 5, rng_seed: int = 0) -> EvalReport:
    """Cross-validated accuracy of the trained model against a uniform-choice baseline."""
    if folds < 2:
        raise ValueError("need at least two folds")
    utts = corpus.utterances
    if len(utts) < folds:
        raise TooFewUtterances(f"{len(utts)} utterances for {folds} folds")
    bags = []
    for u in utts:
        if any(c.annotation == UNJUDGED for c in u.candidates):
            raise UnannotatedCandidate(f"utterance {u.id} has an unjudged candidate")
        bags.append([(Counter(c.rules), extract_triples(c.qlf, roles)) for c in u.candidates])
    feats = [[(frozenset(r), frozenset(t), c.acceptable) for (r, t), c in zip(b, u.candidates)]
             for b, u in zip(bags, utts)]
    report = EvalReport()
    parts = split_folds(len(utts), folds, rng_seed)
    for held in parts:
        held_set = set(held)
        model = train_pairs((feats[i] for i in range(len(utts)) if i not in held_set), weights)
        fold = FoldReport()
        baseline = []
        for i in held:
            fold.n_analyzed += 1
            res = _score_utterance(utts[i], bags[i], model)
            if res is None:
                continue
            ok, base = res
            fold.n_with_acceptable_in_topk += 1
            fold.n_model_correct += ok
            baseline.append(base)
        fold.baseline_sum = math.fsum(baseline)
        report.per_fold.append(fold)
    report.n_analyzed = sum(f.n_analyzed for f in report.per_fold)
    report.n_with_acceptable_in_topk = sum(f.n_with_acceptable_in_topk for f in report.per_fold)
    report.n_model_correct = sum(f.n_model_correct for f in report.per_fold)
    report.baseline_sum = math.fsum(f.baseline_sum for f in report.per_fold)
    return report
