"""Unification-style transfer with packing of rule ambiguity.

Rules are written one per line::

    rule on_avec: on => avec.
    rule code_vol: code_np(flight_code,@c) => term(def_sing,V^[and,[vol1,V],[code_name,V,@c]]).

``@x`` in a target copies the source binding verbatim (object variables
renamed); ``tr(@x)`` transfers it recursively.  When several rules match the
same node the alternatives are packed into a fresh Choice, in rule-file order.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .qlf import (
    Abs, Apply, Assignment, Atom, Choice, List, MetaVar, MissingChoice, ObjVar,
    QlfNode, QlfSyntaxError, TransferMark, children, parse_qlf,
)

__all__ = [
    "TransferRule", "RuleSet", "Bindings", "RuleEvent", "TransferResult",
    "DuplicateRuleId", "UnboundTargetMeta", "RecursionDepthExceeded",
    "load_rules", "parse_rule_lines", "match_pattern", "instantiate", "transfer",
    "rule_bag_for_assignment", "conditions_hold", "pattern_key",
]

DEFAULT_MAX_DEPTH = 256


class DuplicateRuleId(ValueError):
    pass


class UnboundTargetMeta(ValueError):
    pass


class RecursionDepthExceeded(RecursionError):
    pass


@dataclass(frozen=True)
class TransferRule:
    id: str
    source: QlfNode
    target: QlfNode

    def __post_init__(self):
        src_metas = _metas(self.source)
        if _has_mark(self.source):
            raise ValueError(f"rule {self.id}: tr(...) is only allowed in targets")
        missing = _metas(self.target) - src_metas
        if missing:
            raise UnboundTargetMeta(
                f"rule {self.id}: target uses unbound meta-variable(s) "
                + ", ".join("@" + m for m in sorted(missing)))


def _metas(p: QlfNode) -> set[str]:
    if isinstance(p, MetaVar):
        return {p.name}
    if isinstance(p, TransferMark):
        return {p.meta}
    out: set[str] = set()
    for c in children(p):
        out |= _metas(c)
    return out


def _has_mark(p: QlfNode) -> bool:
    return isinstance(p, TransferMark) or any(_has_mark(c) for c in children(p))


def pattern_key(p: QlfNode):
    """Index key for functor-keyed rule lookup; None means 'matches anything'."""
    if isinstance(p, Atom):
        return ("atom", p.name)
    if isinstance(p, Apply):
        return ("apply", p.functor, len(p.args))
    if isinstance(p, List):
        return ("list", len(p.items))
    if isinstance(p, Abs):
        return ("abs",)
    if isinstance(p, ObjVar):
        return ("var",)
    return None


class RuleSet:
    """Ordered, immutable collection of transfer rules."""

    def __init__(self, rules: Iterable[TransferRule] = ()):
        self.rules: tuple[TransferRule, ...] = tuple(rules)
        seen = set()
        for r in self.rules:
            if r.id in seen:
                raise DuplicateRuleId(f"duplicate rule id {r.id!r}")
            seen.add(r.id)
        self._index: dict = {}
        self._wild: list[tuple[int, TransferRule]] = []
        for pos, r in enumerate(self.rules):
            key = pattern_key(r.source)
            if key is None:
                self._wild.append((pos, r))
            else:
                self._index.setdefault(key, []).append((pos, r))

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def candidates(self, node: QlfNode) -> list[TransferRule]:
        hits = self._index.get(pattern_key(node), [])
        if not self._wild:
            return [r for _, r in hits]
        return [r for _, r in sorted(hits + self._wild, key=lambda x: x[0])]


def parse_rule_lines(text: str, keyword: str):
    """Yield (lineno, keyword, id, source, target) for ``<keyword> id: lhs => rhs.`` lines."""
    pattern = re.compile(r"^\s*(" + keyword + r")\s+([a-z][a-z0-9_]*)\s*:(.*)=>(.*)\.\s*$")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("%", 1)[0]
        if not line.strip():
            continue
        m = pattern.match(line)
        if m is None:
            raise QlfSyntaxError(f"malformed line {line.strip()!r}", lineno, 1,
                                 f"'{keyword} <id>: <pattern> => <pattern>.'")
        kw, rid, lhs, rhs = m.groups()
        sides = []
        for group, text in ((3, lhs), (4, rhs)):
            try:
                sides.append(parse_qlf(text, patterns=True))
            except QlfSyntaxError as e:
                raise QlfSyntaxError(f"in {kw} {rid}: {str(e).split(' at line')[0]}",
                                     lineno, e.column + m.start(group), e.expected) from None
        yield lineno, kw, rid, sides[0], sides[1]


def load_rules(text: str) -> RuleSet:
    rules = [TransferRule(rid, src, tgt)
             for _, _, rid, src, tgt in parse_rule_lines(text, "rule")]
    return RuleSet(rules)


# ---------------------------------------------------------------------------
# Matching


@dataclass
class Bindings:
    metas: dict = field(default_factory=dict)
    vars: dict = field(default_factory=dict)  # pattern var name -> matched var name


def match_pattern(p: QlfNode, n: QlfNode, b: Bindings | None = None) -> Bindings | None:
    """One-directional match of pattern ``p`` against the choice-free term ``n``."""
    b = Bindings(dict(b.metas), dict(b.vars)) if b else Bindings()
    return b if _match(p, n, b) else None


def _match(p, n, b: Bindings) -> bool:
    if isinstance(p, MetaVar):
        if p.name in b.metas:
            return b.metas[p.name] == n
        b.metas[p.name] = n
        return True
    if isinstance(p, Atom):
        return isinstance(n, Atom) and n.name == p.name
    if isinstance(p, ObjVar):
        if not isinstance(n, ObjVar):
            return False
        if p.name in b.vars:
            return b.vars[p.name] == n.name
        if n.name in b.vars.values():
            return False
        b.vars[p.name] = n.name
        return True
    if isinstance(p, Apply):
        return (isinstance(n, Apply) and n.functor == p.functor and len(n.args) == len(p.args)
                and all(_match(pa, na, b) for pa, na in zip(p.args, n.args)))
    if isinstance(p, List):
        return (isinstance(n, List) and len(n.items) == len(p.items)
                and all(_match(pi, ni, b) for pi, ni in zip(p.items, n.items)))
    if isinstance(p, Abs):
        return isinstance(n, Abs) and _match(p.var, n.var, b) and _match(p.body, n.body, b)
    return False


def instantiate(p: QlfNode, b: Bindings, var_map=None) -> QlfNode:
    """Instantiate a pattern without any recursive transfer (used by rewriting)."""
    var_map = var_map or (lambda name: name)

    def inst(q):
        if isinstance(q, MetaVar):
            return b.metas[q.name]
        if isinstance(q, TransferMark):
            raise ValueError("tr(...) cannot be instantiated outside transfer")
        if isinstance(q, ObjVar):
            return ObjVar(b.vars.get(q.name, var_map(q.name)))
        if isinstance(q, Apply):
            return Apply(q.functor, tuple(inst(a) for a in q.args))
        if isinstance(q, List):
            return List(tuple(inst(i) for i in q.items))
        if isinstance(q, Abs):
            return Abs(inst(q.var), inst(q.body))
        return q

    return inst(p)


# ---------------------------------------------------------------------------
# Transfer


@dataclass(frozen=True)
class RuleEvent:
    rule_id: str
    conditions: frozenset  # of (choice id, alternative index)


@dataclass(frozen=True)
class TransferResult:
    packed: QlfNode
    events: tuple


def conditions_hold(conditions, assignment: Assignment) -> bool:
    """True iff every (choice, index) condition is met; MissingChoice if undecidable."""
    missing = None
    for cid, k in conditions:
        if cid not in assignment:
            missing = cid
        elif assignment[cid] != k:
            return False
    if missing is not None:
        raise MissingChoice(missing)
    return True


class _Transfer:
    def __init__(self, rules: RuleSet, source: QlfNode, max_depth: int):
        self.rules = rules
        self.max_depth = max_depth
        self.next_choice = 1
        self.events: list[RuleEvent] = []
        self.renaming: dict[str, str] = {}
        self.used = set(_var_names(source))

    def fresh(self, base: str) -> str:
        k = 1
        while f"{base}_{k}" in self.used:
            k += 1
        name = f"{base}_{k}"
        self.used.add(name)
        return name

    def rename(self, name: str) -> str:
        if name not in self.renaming:
            self.renaming[name] = self.fresh(name)
        return self.renaming[name]

    def node(self, n: QlfNode, ctx: frozenset, depth: int) -> QlfNode:
        if depth > self.max_depth:
            raise RecursionDepthExceeded(f"transfer deeper than {self.max_depth}")
        if isinstance(n, Choice):
            raise ValueError("transfer source must be choice-free")
        matches = []
        for rule in self.rules.candidates(n):
            b = match_pattern(rule.source, n)
            if b is not None:
                matches.append((rule, b))
        if not matches:
            return self.congruent(n, ctx, depth)
        if len(matches) == 1:
            rule, b = matches[0]
            self.events.append(RuleEvent(rule.id, ctx))
            return self.build(rule.target, b, ctx, depth, {})
        cid = self.next_choice
        self.next_choice += 1
        alts = []
        for k, (rule, b) in enumerate(matches):
            cond = ctx | {(cid, k)}
            self.events.append(RuleEvent(rule.id, cond))
            alts.append(self.build(rule.target, b, cond, depth, {}))
        return Choice(cid, tuple(alts))

    def congruent(self, n, ctx, depth):
        if isinstance(n, Atom):
            return n
        if isinstance(n, ObjVar):
            return ObjVar(self.rename(n.name))
        if isinstance(n, Apply):
            return Apply(n.functor, tuple(self.node(a, ctx, depth + 1) for a in n.args))
        if isinstance(n, List):
            return List(tuple(self.node(i, ctx, depth + 1) for i in n.items))
        if isinstance(n, Abs):
            return Abs(ObjVar(self.rename(n.var.name)), self.node(n.body, ctx, depth + 1))
        raise TypeError(f"cannot transfer {n!r}")

    def copy(self, n):
        if isinstance(n, ObjVar):
            return ObjVar(self.rename(n.name))
        kids = children(n)
        if not kids:
            return n
        if isinstance(n, Apply):
            return Apply(n.functor, tuple(self.copy(a) for a in kids))
        if isinstance(n, List):
            return List(tuple(self.copy(i) for i in kids))
        if isinstance(n, Abs):
            return Abs(self.copy(n.var), self.copy(n.body))
        raise TypeError(f"cannot copy {n!r}")

    def build(self, p, b: Bindings, ctx, depth, local: dict):
        if isinstance(p, MetaVar):
            return self.copy(b.metas[p.name])
        if isinstance(p, TransferMark):
            if p.meta not in b.metas:
                raise UnboundTargetMeta(f"@{p.meta} is not bound by the source pattern")
            return self.node(b.metas[p.meta], ctx, depth + 1)
        if isinstance(p, ObjVar):
            if p.name in b.vars:
                return ObjVar(self.rename(b.vars[p.name]))
            if p.name not in local:
                local[p.name] = self.fresh(p.name)
            return ObjVar(local[p.name])
        if isinstance(p, Apply):
            return Apply(p.functor, tuple(self.build(a, b, ctx, depth, local) for a in p.args))
        if isinstance(p, List):
            return List(tuple(self.build(i, b, ctx, depth, local) for i in p.items))
        if isinstance(p, Abs):
            return Abs(self.build(p.var, b, ctx, depth, local), self.build(p.body, b, ctx, depth, local))
        return p


def _var_names(n: QlfNode):
    if isinstance(n, ObjVar):
        yield n.name
    for c in children(n):
        yield from _var_names(c)


def transfer(rules: RuleSet, source: QlfNode, max_depth: int = DEFAULT_MAX_DEPTH) -> TransferResult:
    """Transfer a choice-free source QLF into a packed target QLF.

    Choice ids are allocated from 1 upwards in creation order, which is also
    pre-order, so a choice nested inside an alternative always has a larger
    id than the choice holding it.
    """
    t = _Transfer(rules, source, max_depth)
    packed = t.node(source, frozenset(), 0)
    return TransferResult(packed, tuple(t.events))


def rule_bag_for_assignment(result: TransferResult, assignment: Assignment) -> Counter:
    return Counter(e.rule_id for e in result.events if conditions_hold(e.conditions, assignment))
