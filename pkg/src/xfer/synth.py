"""Seeded synthetic N-best corpora with a planted preference model."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import ACCEPTABLE, UNACCEPTABLE, AnnotatedCorpus, AnnotatedUtterance, CandidateEntry
from .harness import Pipeline, generate_candidates
from .preference import Counts, PreferenceModel, score_candidate
from .qlf import Abs, Apply, Atom, List, MetaVar, ObjVar, QlfNode, TransferMark, collect_choices
from .transfer import RuleSet, TransferRule, transfer
from .triples import RoleTable, Triple

__all__ = ["SynthConfig", "SynthWorld", "build_world", "synth_corpus", "random_transfer_fixture"]


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_utterances: int = 500
    n_nouns: int = 8
    n_preps: int = 3
    n_dets: int = 3
    min_alternatives: int = 2
    max_alternatives: int = 5
    max_modifiers: int = 2
    n_planted_preferences: int = 60
    noise_rate: float = 0.05
    k: int = 5

    def __post_init__(self):
        if not 0.0 <= self.noise_rate < 0.5:
            raise ValueError("noise_rate must be in [0, 0.5)")
        if self.n_utterances < 0:
            raise ValueError("n_utterances must be non-negative")
        if min(self.n_nouns, self.n_preps, self.n_dets, self.k) < 1:
            raise ValueError("vocabulary sizes and k must be positive")
        if not 2 <= self.min_alternatives <= self.max_alternatives:
            raise ValueError("need 2 <= min_alternatives <= max_alternatives")


@dataclass
class SynthWorld:
    pipeline: Pipeline
    planted: PreferenceModel
    nouns: list
    preps: list
    dets: list


def _alternatives(rng, cfg, pool):
    n = rng.randint(cfg.min_alternatives, min(cfg.max_alternatives, len(pool)))
    return rng.sample(pool, n)


def build_world(cfg: SynthConfig) -> SynthWorld:
    """Toy vocabulary, ambiguous transfer rules and the planted model, all from ``cfg.seed``."""
    rng = random.Random(f"world:{cfg.seed}")
    nouns = [f"n{i}" for i in range(cfg.n_nouns)]
    preps = [f"p{i}" for i in range(cfg.n_preps)]
    dets = [f"d{i}" for i in range(cfg.n_dets)]
    t_nouns = [f"tn{i}" for i in range(cfg.n_nouns)]
    t_preps = [f"tp{i}" for i in range(cfg.n_preps + cfg.max_alternatives)]
    t_dets = [f"td{i}" for i in range(cfg.n_dets + cfg.max_alternatives)]

    rules = []
    for n, t in zip(nouns, t_nouns):
        rules.append(TransferRule(f"lex_{n}", Atom(n), Atom(t)))
    used_preps, used_dets = set(), set()
    for p in preps:
        for t in _alternatives(rng, cfg, t_preps):
            rules.append(TransferRule(f"{p}_{t}", Atom(p), Atom(t)))
            used_preps.add(t)
    for d in dets:
        for t in _alternatives(rng, cfg, t_dets):
            rules.append(TransferRule(f"{d}_{t}", Atom(d), Atom(t)))
            used_dets.add(t)

    # planted preferences: every determiner/noun pair gets a strong sign; a sample of
    # the relational triples gets one too; everything else is neutral
    def signed():
        strength = rng.randint(10, 30)
        return Counts(strength, 0) if rng.random() < 0.5 else Counts(0, strength)

    planted = {Triple(d, "det", n): signed() for d in sorted(used_dets) for n in t_nouns}
    relational = [Triple(g, p, x) for g in t_nouns for p in sorted(used_preps)
                  for x in t_nouns + sorted(used_dets)]
    for t in rng.sample(relational, min(cfg.n_planted_preferences, len(relational))):
        planted[t] = signed()
    model = PreferenceModel({}, planted, (1.0, 1.0))
    return SynthWorld(Pipeline(rules=RuleSet(rules), roles=RoleTable()), model, nouns, preps, dets)


def _term(rng, world, cfg, var, depth):
    det = rng.choice(world.dets)
    noun = rng.choice(world.nouns)
    items = [Atom("and"), List((Atom(noun), ObjVar(var)))]
    if depth == 0:
        for j in range(rng.randint(1, cfg.max_modifiers)):
            sub = _term(rng, world, cfg, f"{var}{j}", depth + 1)
            items.append(Apply("form", (Apply("prep", (Atom(rng.choice(world.preps)),)), sub)))
    body = List(tuple(items)) if len(items) > 2 else items[1]
    return Apply("term", (Atom(det), Abs(ObjVar(var), body)))


def _source(rng, world, cfg) -> QlfNode:
    return Apply("elliptical_np", (_term(rng, world, cfg, "X", 0),))


def synth_corpus(cfg: SynthConfig) -> tuple[AnnotatedCorpus, PreferenceModel]:
    """Candidates come from an all-zero seed model (ties broken by assignment order);
    the planted model's best stored candidate is acceptable, the rest not, then each
    label flips with probability ``noise_rate``."""
    world = build_world(cfg)
    rng = random.Random(f"corpus:{cfg.seed}")
    seed_model = PreferenceModel()
    corpus = AnnotatedCorpus()
    width = max(4, len(str(cfg.n_utterances)))
    for i in range(cfg.n_utterances):
        src = _source(rng, world, cfg)
        cands = generate_candidates(src, world.pipeline, seed_model, cfg.k)
        scores = [score_candidate(c, world.planted) for c in cands]
        best = max(range(len(cands)), key=lambda j: (scores[j], -j))
        entries = []
        for j, c in enumerate(cands):
            ok = (j == best) != (rng.random() < cfg.noise_rate)
            entries.append(CandidateEntry(c.qlf, ACCEPTABLE if ok else UNACCEPTABLE, c.rules))
        corpus.utterances.append(AnnotatedUtterance(f"s{i:0{width}d}", src, entries))
    return corpus, world.planted


# ---------------------------------------------------------------------------
# Random transfer fixtures


def random_transfer_fixture(rng: random.Random, max_choices: int = 10) -> tuple[RuleSet, QlfNode]:
    """A random rule set and source whose packed transfer has at most ``max_choices`` choices.

    Sources are term/form/predication trees over a small atom pool; rules are
    atom-level alternatives plus a few structural rules that recurse via tr(@x).
    """
    while True:
        atoms = [f"a{i}" for i in range(6)]
        rules = []
        for a in atoms:
            for j in range(rng.choice([0, 1, 1, 2, 3])):
                rules.append(TransferRule(f"r_{a}_{j}", Atom(a), Atom(f"t{a}_{j}")))
        if rng.random() < 0.7:
            rules.append(TransferRule("wrap", Apply("w", (MetaVar("x"),)),
                                      Apply("w2", (TransferMark("x"), Atom("k")))))
        if rng.random() < 0.5:
            rules.append(TransferRule("wrap_alt", Apply("w", (MetaVar("x"),)),
                                      List((Atom("alt"), TransferMark("x")))))
        if rng.random() < 0.5:
            rules.append(TransferRule("copy_first", Apply("f", (MetaVar("x"), MetaVar("y"))),
                                      Apply("g", (MetaVar("x"), TransferMark("y")))))
        if rng.random() < 0.4:
            rules.append(TransferRule("bind", Apply("term", (Atom("a0"), MetaVar("r"))),
                                      Apply("term", (Atom("q0"), TransferMark("r")))))
        rs = RuleSet(rules)
        src = _random_source(rng, atoms, 3)
        if len(collect_choices(transfer(rs, src).packed)) <= max_choices:
            return rs, src


def _random_source(rng, atoms, depth, var=0):
    roll = rng.random()
    if depth == 0 or roll < 0.2:
        return Atom(rng.choice(atoms))
    if roll < 0.4:
        return Apply("w", (_random_source(rng, atoms, depth - 1, var),))
    if roll < 0.55:
        return Apply("f", (_random_source(rng, atoms, depth - 1, var),
                           _random_source(rng, atoms, depth - 1, var + 1)))
    if roll < 0.8:
        v = ObjVar(f"V{var}")
        restr = List((Atom("and"), List((Atom(rng.choice(atoms)), v)),
                      Apply("form", (Apply("prep", (Atom(rng.choice(atoms)),)),
                                     _random_source(rng, atoms, depth - 1, var + 1)))))
        return Apply("term", (Atom(rng.choice(atoms)), Abs(v, restr)))
    n = rng.randint(1, 3)
    return List(tuple(_random_source(rng, atoms, depth - 1, var + i) for i in range(n)))
