"""Annotated N-best corpora: file format and the interactive judging loop.

A ``.corpus`` file is a sequence of blank-line separated blocks::

    utt u17
    source elliptical_np(term(bare_plur,C^[and,[flight1,C]]))
    cand + elliptical_np(term(def_plur,C_1^[and,[vol1,C_1]]))
    used bp_def_plur flight
    cand - elliptical_np(term(bare_plur,C_1^[and,[vol1,C_1]]))
    used bp_bare_plur flight

``+``/``-``/``?`` mark acceptable, unacceptable and unjudged candidates.  The
optional ``used`` line lists the transfer rules that produced the candidate
just above it (with repetition), which training needs.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, TextIO

from .qlf import QlfNode, QlfSyntaxError, parse_qlf, pretty_qlf, print_qlf

__all__ = [
    "ACCEPTABLE", "UNACCEPTABLE", "UNJUDGED",
    "CandidateEntry", "AnnotatedUtterance", "AnnotatedCorpus", "DuplicateUtteranceId",
    "parse_corpus", "dump_corpus", "load_corpus", "save_corpus", "annotate_interactive",
]

ACCEPTABLE, UNACCEPTABLE, UNJUDGED = "+", "-", "?"
_MARKS = (ACCEPTABLE, UNACCEPTABLE, UNJUDGED)


class DuplicateUtteranceId(ValueError):
    pass


@dataclass
class CandidateEntry:
    qlf: QlfNode
    annotation: str = UNJUDGED
    rules: Counter = field(default_factory=Counter)

    @property
    def acceptable(self) -> bool:
        return self.annotation == ACCEPTABLE


@dataclass
class AnnotatedUtterance:
    id: str
    source: QlfNode
    candidates: list = field(default_factory=list)

    def has_acceptable(self) -> bool:
        return any(c.acceptable for c in self.candidates)


@dataclass
class AnnotatedCorpus:
    utterances: list = field(default_factory=list)

    def __len__(self):
        return len(self.utterances)

    def __iter__(self):
        return iter(self.utterances)

    def check_ids(self):
        seen = set()
        for u in self.utterances:
            if u.id in seen:
                raise DuplicateUtteranceId(f"duplicate utterance id {u.id!r}")
            seen.add(u.id)


def parse_corpus(text: str) -> AnnotatedCorpus:
    corpus = AnnotatedCorpus()
    current: AnnotatedUtterance | None = None
    seen: set[str] = set()

    def err(msg, lineno, expected=""):
        return QlfSyntaxError(msg, lineno, 1, expected)

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if key == "utt":
                if not rest or " " in rest:
                    raise err("utterance id must be one token", lineno)
                if rest in seen:
                    raise DuplicateUtteranceId(f"line {lineno}: duplicate utterance id {rest!r}")
                seen.add(rest)
                current = None
                corpus.utterances.append(AnnotatedUtterance(rest, None))
            elif key == "source":
                utt = corpus.utterances[-1] if corpus.utterances else None
                if utt is None or utt.source is not None:
                    raise err("'source' must follow 'utt'", lineno)
                utt.source = parse_qlf(rest)
                current = utt
            elif key == "cand":
                if current is None:
                    raise err("'cand' outside an utterance block", lineno)
                mark, _, qlf = rest.partition(" ")
                if mark not in _MARKS:
                    raise err(f"bad annotation mark {mark!r}", lineno, "+, - or ?")
                current.candidates.append(CandidateEntry(parse_qlf(qlf), mark))
            elif key == "used":
                if current is None or not current.candidates:
                    raise err("'used' must follow a 'cand' line", lineno)
                current.candidates[-1].rules.update(rest.split())
            else:
                raise err(f"unknown line type {key!r}", lineno, "utt, source, cand or used")
        except QlfSyntaxError as e:
            if e.line != lineno:
                raise QlfSyntaxError(str(e).split(" at line")[0], lineno, e.column, e.expected) from None
            raise
    for u in corpus.utterances:
        if u.source is None:
            raise QlfSyntaxError(f"utterance {u.id} has no source line", 0, 0)
    return corpus


def dump_corpus(corpus: AnnotatedCorpus) -> str:
    blocks = []
    for u in corpus.utterances:
        lines = [f"utt {u.id}", f"source {print_qlf(u.source)}"]
        for c in u.candidates:
            lines.append(f"cand {c.annotation} {print_qlf(c.qlf)}")
            if c.rules:
                lines.append("used " + " ".join(sorted(c.rules.elements())))
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


def load_corpus(path) -> AnnotatedCorpus:
    with open(path, encoding="utf-8") as f:
        return parse_corpus(f.read())


def save_corpus(corpus: AnnotatedCorpus, path) -> None:
    corpus.check_ids()
    with open(path, "w", encoding="utf-8") as f:
        f.write(dump_corpus(corpus))


def _keys(inp: TextIO):
    while True:
        line = inp.readline()
        if not line:
            return
        yield from line.split()


def annotate_interactive(corpus: AnnotatedCorpus, inp: TextIO, out: TextIO,
                         save: Callable[[AnnotatedCorpus], None] | None = None) -> AnnotatedCorpus:
    """Ask for a judgment on every unjudged candidate.

    Keys: ``y`` acceptable, ``n`` unacceptable, ``s`` skip, ``q`` save and quit.
    ``save`` is called after every judgment, so an interrupted session keeps
    everything judged so far; judged candidates are never asked again.
    """
    pending = [(u, i) for u in corpus.utterances
               for i, c in enumerate(u.candidates) if c.annotation == UNJUDGED]
    keys = _keys(inp)
    total = len(pending)
    try:
        for n, (u, i) in enumerate(pending, 1):
            cand = u.candidates[i]
            out.write(f"\n[{n}/{total}] utterance {u.id}, candidate {i + 1}\n")
            out.write("source:\n" + pretty_qlf(u.source) + "\n")
            out.write("candidate:\n" + pretty_qlf(cand.qlf) + "\n")
            while True:
                out.write("acceptable? [y]es/[n]o/[s]kip/[q]uit > ")
                out.flush()
                key = next(keys, "q").lower()
                if key in ("y", "n", "s", "q"):
                    break
                out.write(f"unknown key {key!r}\n")
            if key == "q":
                break
            if key == "s":
                continue
            cand.annotation = ACCEPTABLE if key == "y" else UNACCEPTABLE
            if save is not None:
                save(corpus)
    finally:
        if save is not None:
            save(corpus)
    return corpus
