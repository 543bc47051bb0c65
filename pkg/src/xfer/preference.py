"""Discriminant preference model: training from judged candidate pairs and k-best selection."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .qlf import (
    Choice, QlfNode, QlfSyntaxError, apply_assignment, assignment_key, children, collect_choices,
    count_unpackings, enumerate_assignments, print_qlf,
)
from .corpus import ACCEPTABLE, UNJUDGED, AnnotatedCorpus
from .rewrite import PpClassTable, RewriteRule, post_transfer
from .transfer import TransferResult, rule_bag_for_assignment
from .triples import (
    ConditionalTriple, RoleTable, Triple, extract_conditional_triples, extract_triples,
    parse_triple, satisfied_triples,
)

__all__ = [
    "Counts", "PreferenceModel", "Candidate", "BeamConfig", "KBest",
    "EmptyCorpus", "UnannotatedCandidate",
    "discriminant", "train", "train_pairs", "judged_features", "score_candidate", "score_assignment", "kbest_select",
    "load_model", "dump_model",
]


@dataclass(frozen=True)
class Counts:
    g: int = 0
    b: int = 0

    def __post_init__(self):
        if self.g < 0 or self.b < 0:
            raise ValueError(f"negative counts {self}")

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(self.g + other.g, self.b + other.b)


def discriminant(c: Counts) -> float:
    g, b = c.g, c.b
    if g < b:
        return math.log2(2 * (g + 1) / (g + b + 2))
    if g == b:
        return 0.0
    return -math.log2(2 * (b + 1) / (g + b + 2))


class EmptyCorpus(ValueError):
    pass


class UnannotatedCandidate(ValueError):
    pass


@dataclass
class PreferenceModel:
    rule_counts: dict = field(default_factory=dict)    # rule id -> Counts
    triple_counts: dict = field(default_factory=dict)  # Triple -> Counts
    weights: tuple = (1.0, 1.0)                        # (w_rule, w_lm)

    def __post_init__(self):
        self.weights = tuple(float(w) for w in self.weights)
        self.rule_scores = {r: discriminant(c) for r, c in self.rule_counts.items()}
        self.triple_scores = {t: discriminant(c) for t, c in self.triple_counts.items()}

    def rule_score(self, rule_id: str) -> float:
        return self.rule_scores.get(rule_id, 0.0)

    def triple_score(self, triple: Triple) -> float:
        return self.triple_scores.get(triple, 0.0)

    def merge(self, other: "PreferenceModel") -> "PreferenceModel":
        """Sum the counts of two models (training is a commutative monoid)."""
        rules = dict(self.rule_counts)
        for k, c in other.rule_counts.items():
            rules[k] = rules.get(k, Counts()) + c
        triples = dict(self.triple_counts)
        for k, c in other.triple_counts.items():
            triples[k] = triples.get(k, Counts()) + c
        return PreferenceModel(rules, triples, self.weights)


@dataclass
class Candidate:
    qlf: QlfNode
    rules: Counter = field(default_factory=Counter)
    triples: Counter = field(default_factory=Counter)
    score: float = 0.0
    assignment: dict | None = None


@dataclass(frozen=True)
class BeamConfig:
    exhaustive_limit: int = 10000
    beam_width: int = 32

    def __post_init__(self):
        if self.exhaustive_limit < 1 or self.beam_width < 1:
            raise ValueError("beam settings must be positive")


class KBest(list):
    """Score-descending (Candidate, score) pairs; ``approximate`` is True for beam results."""

    def __init__(self, items=(), approximate: bool = False):
        super().__init__(items)
        self.approximate = approximate


# ---------------------------------------------------------------------------
# Training


def train_pairs(judged: Iterable[Sequence[tuple[frozenset, frozenset, bool]]],
                weights=(1.0, 1.0)) -> PreferenceModel:
    """Count good/bad occurrences over all pairs with exactly one acceptable member.

    ``judged`` yields, per utterance, a list of (rule-id set, triple set,
    acceptable) for its judged candidates.  Features are counted by presence:
    a feature in both members of a pair is not counted.
    """
    rule_g, rule_b = Counter(), Counter()
    tri_g, tri_b = Counter(), Counter()
    for cands in judged:
        for (r1, t1, ok1), (r2, t2, ok2) in itertools.combinations(cands, 2):
            if ok1 == ok2:
                continue
            (gr, gt), (br, bt) = ((r1, t1), (r2, t2)) if ok1 else ((r2, t2), (r1, t1))
            rule_g.update(gr - br)
            rule_b.update(br - gr)
            tri_g.update(gt - bt)
            tri_b.update(bt - gt)
    rules = {k: Counts(rule_g[k], rule_b[k]) for k in set(rule_g) | set(rule_b)}
    triples = {k: Counts(tri_g[k], tri_b[k]) for k in set(tri_g) | set(tri_b)}
    return PreferenceModel(rules, triples, weights)


def judged_features(utterance, roles: RoleTable | None, strict: bool = False, cache=None):
    """(rule set, triple set, acceptable) for each judged candidate of an utterance."""
    out = []
    for c in utterance.candidates:
        if c.annotation == UNJUDGED:
            if strict:
                raise UnannotatedCandidate(f"utterance {utterance.id} has an unjudged candidate")
            continue
        key = id(c)
        if cache is not None and key in cache:
            triples = cache[key]
        else:
            triples = frozenset(extract_triples(c.qlf, roles))
            if cache is not None:
                cache[key] = triples
        out.append((frozenset(c.rules), triples, c.annotation == ACCEPTABLE))
    return out


def train(corpus: AnnotatedCorpus, roles: RoleTable | None = None, weights=(1.0, 1.0),
          strict: bool = False, cache=None) -> PreferenceModel:
    """Train rule and triple discriminants from an annotated N-best corpus."""
    if not len(corpus):
        raise EmptyCorpus("cannot train on an empty corpus")
    return train_pairs((judged_features(u, roles, strict, cache) for u in corpus), weights)


# ---------------------------------------------------------------------------
# Scoring


def _combine(model: PreferenceModel, rule_bag: Counter, triple_bag: Counter) -> float:
    w_rule, w_lm = model.weights
    rule_part = math.fsum(model.rule_score(r) * n for r, n in rule_bag.items())
    lm_part = math.fsum(model.triple_score(t) * n for t, n in triple_bag.items())
    return w_rule * rule_part + w_lm * lm_part


def score_candidate(c: Candidate, m: PreferenceModel) -> float:
    return _combine(m, c.rules, c.triples)


def score_assignment(r: TransferResult, a: dict, cts: Sequence[ConditionalTriple],
                     m: PreferenceModel) -> float:
    """Score one unpacking straight from the packed result (no tree is built)."""
    return _combine(m, rule_bag_for_assignment(r, a), satisfied_triples(cts, a))


def _choice_paths(node) -> dict[int, frozenset]:
    """Choice id -> the (choice, index) selections needed to reach it."""
    paths: dict[int, frozenset] = {}

    def walk(n, path):
        if isinstance(n, Choice):
            paths[n.id] = path
            for k, alt in enumerate(n.alternatives):
                walk(alt, path | {(n.id, k)})
            return
        for ch in children(n):
            walk(ch, path)

    walk(node, frozenset())
    return paths


def _decided(conditions, partial: dict) -> bool | None:
    """True/False once every condition is decided or one fails; None if still open."""
    open_ = False
    for cid, k in conditions:
        if cid not in partial:
            open_ = True
        elif partial[cid] != k:
            return False
    return None if open_ else True


def _beam(r: TransferResult, cts, m: PreferenceModel, cfg: BeamConfig) -> list[dict]:
    order = [cid for cid, _ in collect_choices(r.packed)]
    sizes = dict(collect_choices(r.packed))
    paths = _choice_paths(r.packed)
    w_rule, w_lm = m.weights
    features = [(e.conditions, w_rule * m.rule_score(e.rule_id)) for e in r.events]
    features += [(ct.conditions, w_lm * m.triple_score(ct.triple)) for ct in cts]

    def partial_score(partial):
        return math.fsum(s for conds, s in features if _decided(conds, partial) is True)

    beam: list[dict] = [{}]
    for cid in order:
        grown = []
        for partial in beam:
            if _decided(paths[cid], partial) is not True:
                grown.append(partial)  # unreachable under this partial assignment
                continue
            grown.extend({**partial, cid: k} for k in range(sizes[cid]))
        grown.sort(key=lambda p: (-partial_score(p), assignment_key(p)))
        beam = grown[:cfg.beam_width]
    return beam


def kbest_select(r: TransferResult, roles: RoleTable | None, m: PreferenceModel, k: int,
                 cfg: BeamConfig = BeamConfig(), post_rules: Sequence[RewriteRule] = (),
                 pp_table: PpClassTable | None = None, cts=None) -> KBest:
    """The ``k`` best unpackings of a transfer result, post-transferred, best first.

    Exhaustive when the number of unpackings is within ``cfg.exhaustive_limit``;
    otherwise a beam search over choices in pre-order, flagged approximate.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if cts is None:
        cts = extract_conditional_triples(r.packed, roles)
    approximate = count_unpackings(r.packed) > cfg.exhaustive_limit
    assignments = _beam(r, cts, m, cfg) if approximate else enumerate_assignments(r.packed)
    scored = [(score_assignment(r, a, cts, m), a) for a in assignments]
    scored.sort(key=lambda sa: (-sa[0], assignment_key(sa[1])))
    out = KBest(approximate=approximate)
    for score, a in scored[:k]:
        qlf = post_transfer(apply_assignment(r.packed, a), post_rules, pp_table)
        cand = Candidate(qlf, rule_bag_for_assignment(r, a), satisfied_triples(cts, a), score, a)
        out.append((cand, score))
    return out


# ---------------------------------------------------------------------------
# Model files


def _fmt(w: float) -> str:
    return repr(float(w))


def dump_model(m: PreferenceModel) -> str:
    lines = [f"weights {_fmt(m.weights[0])} {_fmt(m.weights[1])}"]
    for rid in sorted(m.rule_counts):
        c = m.rule_counts[rid]
        lines.append(f"rule {rid} {c.g} {c.b}")
    for t in sorted(m.triple_counts):
        c = m.triple_counts[t]
        lines.append(f"triple {t} {c.g} {c.b}")
    return "\n".join(lines) + "\n"


def load_model(text: str) -> PreferenceModel:
    weights = (1.0, 1.0)
    rules, triples = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        try:
            if fields[0] == "weights" and len(fields) == 3:
                weights = (float(fields[1]), float(fields[2]))
            elif fields[0] == "rule" and len(fields) == 4:
                rules[fields[1]] = Counts(int(fields[2]), int(fields[3]))
            elif fields[0] == "triple":
                body, g, b = line[len("triple"):].rsplit(None, 2)
                triples[parse_triple(body)] = Counts(int(g), int(b))
            else:
                raise ValueError(line)
        except (ValueError, QlfSyntaxError):
            raise QlfSyntaxError("malformed model line", lineno, 1,
                                 "'weights W W', 'rule <id> <g> <b>' or 'triple (l,r,x) <g> <b>'") from None
    return PreferenceModel(rules, triples, weights)


def candidate_from_qlf(qlf: QlfNode, rules: Iterable[str], roles: RoleTable | None) -> Candidate:
    return Candidate(qlf, Counter(rules), extract_triples(qlf, roles))


def describe(c: Candidate) -> str:
    return f"{c.score:.6f}\t{print_qlf(c.qlf)}"

