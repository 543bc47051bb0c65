"""Semantic triples: head-word relations, including determiner relations.

For "Show flights with a stop." the extractor yields::

    (show,obj,flight) (show,obj,bare_plur) (bare_plur,det,flight)
    (flight,with,stop) (flight,with,a) (a,det,stop)

Every term contributes ``(Det,det,Head)``; every relation instance between a
governor ``G`` and a dependent term contributes ``(G,L,Head)`` and
``(G,L,Det)``.  Relation instances come from predications ``[P,A1..Ak]``
(arguments 2..k, labelled through a RoleTable) and from modifiers
``form(prep(P),T)`` / ``form(L,T)`` (labelled ``P`` / ``L``).

The governor of a modifier is the head of the enclosing term restriction,
or else the predicate of the first predication of the enclosing ``[and,...]``
list, or else whatever governs that list.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .qlf import (
    Abs, Apply, Atom, Choice, Diagnostic, List, ObjVar, QlfNode, QlfSyntaxError, apply_assignment,
    print_qlf,
    count_unpackings, enumerate_assignments,
)

__all__ = [
    "Triple", "ConditionalTriple", "RoleTable", "NoHeadPredicate", "ExpansionLimitExceeded",
    "load_roles", "parse_triple", "term_signature", "term_head", "term_det",
    "extract_triples", "extract_conditional_triples", "satisfied_triples",
    "DEFAULT_EXPANSION_LIMIT",
]

DEFAULT_EXPANSION_LIMIT = 1024


@dataclass(frozen=True, order=True)
class Triple:
    left: str
    relation: str
    right: str

    def __post_init__(self):
        if not (self.left and self.relation and self.right):
            raise ValueError(f"triple fields must be non-empty: {self!r}")

    def __str__(self):
        return f"({self.left},{self.relation},{self.right})"


def parse_triple(text: str) -> Triple:
    inner = text.strip()
    if not (inner.startswith("(") and inner.endswith(")")):
        raise QlfSyntaxError(f"bad triple {text!r}", 1, 1, "(left,relation,right)")
    parts = [p.strip() for p in inner[1:-1].split(",")]
    if len(parts) != 3 or not all(parts):
        raise QlfSyntaxError(f"bad triple {text!r}", 1, 1, "(left,relation,right)")
    return Triple(*parts)


@dataclass(frozen=True)
class ConditionalTriple:
    triple: Triple
    conditions: frozenset  # of (choice id, alternative index)


class RoleTable(dict):
    """(predicate, arity, position) -> role label, defaulting to ``arg<position>``."""

    def label(self, pred: str, arity: int, position: int) -> str:
        return self.get((pred, arity, position), f"arg{position}")


def load_roles(text: str) -> RoleTable:
    roles = RoleTable()
    for lineno, raw in enumerate(text.splitlines(), 1):
        fields = raw.split("%", 1)[0].split()
        if not fields:
            continue
        try:
            kw, pred_arity, pos, label = fields
            pred, arity = pred_arity.split("/")
            if kw != "role":
                raise ValueError
            roles[(pred, int(arity), int(pos))] = label
        except ValueError:
            raise QlfSyntaxError("malformed role line", lineno, 1,
                                 "'role <pred>/<arity> <position> <label>'") from None
    return roles


class NoHeadPredicate(ValueError):
    pass


class ExpansionLimitExceeded(RuntimeError):
    def __init__(self, instance: str, count: int):
        self.instance, self.count = instance, count
        super().__init__(f"{instance}: {count} local combinations exceed the expansion limit")


# ---------------------------------------------------------------------------
# Shared readers. They only inspect the shallow structure that the packed
# extractor keeps in its projections.


def _is_term(n) -> bool:
    return isinstance(n, Apply) and n.functor == "term" and len(n.args) == 2


def _is_form(n) -> bool:
    return isinstance(n, Apply) and n.functor == "form" and len(n.args) == 2


def _is_and(n) -> bool:
    return isinstance(n, List) and n.items[0] == Atom("and")


def _is_predication(n) -> bool:
    return (isinstance(n, List) and len(n.items) >= 2 and isinstance(n.items[0], Atom)
            and n.items[0].name != "and")


def term_head(t: QlfNode) -> str | None:
    abs_ = t.args[1]
    if not isinstance(abs_, Abs) or not isinstance(abs_.body, List):
        return None
    body = abs_.body
    candidates = body.items[1:] if _is_and(body) else (body,)
    for item in candidates:
        if (isinstance(item, List) and len(item.items) == 2 and isinstance(item.items[0], Atom)
                and item.items[0].name != "and" and item.items[1] == abs_.var):
            return item.items[0].name
    return None


def term_det(t: QlfNode) -> str | None:
    det = t.args[0]
    return det.name if isinstance(det, Atom) else None


def term_signature(t: QlfNode) -> tuple[str, str]:
    if not _is_term(t):
        raise ValueError(f"not a term(Det,V^Body) node: {t!r}")
    det = term_det(t)
    if det is None:
        raise ValueError(f"determiner is not an atom: {t.args[0]!r}")
    head = term_head(t)
    if head is None:
        raise NoHeadPredicate(f"no one-place predication over the bound variable in {t!r}")
    return det, head


def _form_label(head) -> str | None:
    if isinstance(head, Atom):
        return head.name
    if (isinstance(head, Apply) and head.functor == "prep" and len(head.args) == 1
            and isinstance(head.args[0], Atom)):
        return head.args[0].name
    return None


def _first_predicate(items) -> str | None:
    for item in items:
        if _is_predication(item):
            return item.items[0].name
    return None


# ---------------------------------------------------------------------------
# Plain extraction


def extract_triples(q: QlfNode, roles: RoleTable | None = None,
                    diagnostics: list | None = None) -> Counter:
    """Bag of triples of a choice-free QLF."""
    roles = roles if roles is not None else RoleTable()
    bag: Counter = Counter()

    def relation(gov, label, dep):
        if gov is None or label is None or not _is_term(dep):
            return
        head = term_head(dep)
        if head is None:
            return
        bag[Triple(gov, label, head)] += 1
        det = term_det(dep)
        if det is not None:
            bag[Triple(gov, label, det)] += 1

    def visit(n, gov):
        if isinstance(n, Choice):
            raise ValueError("extract_triples needs a choice-free QLF; "
                             "use extract_conditional_triples for packed input")
        if _is_term(n):
            det, head = term_det(n), term_head(n)
            if head is None:
                if diagnostics is not None:
                    diagnostics.append(Diagnostic("NoHeadPredicate", f"term without head: {print_qlf(n)}"))
            elif det is not None:
                bag[Triple(det, "det", head)] += 1
            visit(n.args[0], gov)
            restriction(n.args[1], head or gov)
        elif _is_form(n):
            relation(gov, _form_label(n.args[0]), n.args[1])
            visit(n.args[0], gov)
            visit(n.args[1], gov)
        elif isinstance(n, Apply):
            for a in n.args:
                visit(a, gov)
        elif isinstance(n, Abs):
            visit(n.body, gov)
        elif isinstance(n, List):
            if _is_and(n):
                inner = _first_predicate(n.items[1:]) or gov
                for item in n.items[1:]:
                    visit(item, inner)
            elif _is_predication(n):
                pred, args = n.items[0].name, n.items[1:]
                for pos, arg in enumerate(args, 1):
                    if pos >= 2:
                        relation(pred, roles.label(pred, len(args), pos), arg)
                for arg in args:
                    visit(arg, pred)
            else:
                for item in n.items:
                    visit(item, gov)

    def restriction(n, gov):
        if isinstance(n, Abs) and _is_and(n.body):
            for item in n.body.items[1:]:
                visit(item, gov)
        elif isinstance(n, Abs):
            visit(n.body, gov)
        else:
            visit(n, gov)

    visit(q, None)
    return bag


# ---------------------------------------------------------------------------
# Packed extraction
#
# The traversal forks on Choice nodes it walks through (adding the choice to
# the condition context).  Relation instances read a few shallow positions
# (governor head, label, dependent det/head) that may themselves sit under
# choices; for those we build a projection that keeps only the positions read
# and enumerate its unpackings locally.


@dataclass(frozen=True)
class _Hole:
    """Stand-in for a subtree the reader never inspects."""


HOLE = _Hole()


def _p_leaf(n):
    if isinstance(n, Choice):
        return Choice(n.id, tuple(_p_leaf(a) for a in n.alternatives))
    if isinstance(n, (Atom, ObjVar)):
        return n
    return HOLE


def _p_item(n):
    if isinstance(n, Choice):
        return Choice(n.id, tuple(_p_item(a) for a in n.alternatives))
    if isinstance(n, List) and len(n.items) == 2:
        return List((_p_leaf(n.items[0]), _p_leaf(n.items[1])))
    return _p_leaf(n)


def _p_body(n):
    if isinstance(n, Choice):
        return Choice(n.id, tuple(_p_body(a) for a in n.alternatives))
    if isinstance(n, List):
        return List((_p_leaf(n.items[0]),) + tuple(_p_item(i) for i in n.items[1:]))
    return HOLE


def _p_abs(n):
    if isinstance(n, Choice):
        return Choice(n.id, tuple(_p_abs(a) for a in n.alternatives))
    if isinstance(n, Abs):
        return Abs(n.var, _p_body(n.body))
    return HOLE


def _p_dep(n, with_det: bool):
    if isinstance(n, Choice):
        return Choice(n.id, tuple(_p_dep(a, with_det) for a in n.alternatives))
    if _is_term(n):
        return Apply("term", (_p_leaf(n.args[0]) if with_det else HOLE, _p_abs(n.args[1])))
    return HOLE


def _p_label(n):
    if isinstance(n, Choice):
        return Choice(n.id, tuple(_p_label(a) for a in n.alternatives))
    if isinstance(n, Apply) and n.functor == "prep" and len(n.args) == 1:
        return Apply("prep", (_p_leaf(n.args[0]),))
    return _p_leaf(n)


def _p_pred(n):
    if isinstance(n, Choice):
        return Choice(n.id, tuple(_p_pred(a) for a in n.alternatives))
    if isinstance(n, List) and len(n.items) >= 2:
        return List((_p_leaf(n.items[0]), HOLE))
    return HOLE


def _merge(ctx: dict, extra: dict) -> dict | None:
    merged = dict(ctx)
    for cid, k in extra.items():
        if merged.setdefault(cid, k) != k:
            return None
    return merged


class _PackedExtractor:
    def __init__(self, roles: RoleTable, limit: int):
        self.roles = roles
        self.limit = limit
        self.out: list[ConditionalTriple] = []

    def emit(self, triple: Triple, conds: dict):
        self.out.append(ConditionalTriple(triple, frozenset(conds.items())))

    def expand(self, parts, ctx, instance, factor=1):
        proj = Apply("$", tuple(parts))
        count = factor * count_unpackings(proj)
        if count > self.limit:
            raise ExpansionLimitExceeded(instance, count)
        out = []
        for a in enumerate_assignments(proj):
            merged = _merge(ctx, a)
            if merged is not None:
                out.append((merged, apply_assignment(proj, a).args))
        return out

    def governors(self, levels, ctx, instance):
        if not levels:
            return [(ctx, None)]
        proj, read = levels[0]
        out = []
        for conds, (res,) in self.expand([proj], ctx, instance):
            gov = read(res)
            if gov is not None:
                out.append((conds, gov))
            else:
                out.extend(self.governors(levels[1:], conds, instance))
        return out

    def relation(self, levels, label_proj, dep, ctx, instance):
        govs = [(c, g) for c, g in self.governors(levels, ctx, instance) if g is not None]
        if not govs:
            return
        head_parts = [label_proj, _p_dep(dep, False)]
        det_parts = [label_proj, _p_dep(dep, True)]
        factor = len(govs)
        for gctx, gov in govs:
            for conds, (lab, d) in self.expand(head_parts, gctx, instance, factor):
                label = _form_label(lab)
                head = term_head(d) if _is_term(d) else None
                if label and head:
                    self.emit(Triple(gov, label, head), conds)
            for conds, (lab, d) in self.expand(det_parts, gctx, instance, factor):
                label = _form_label(lab)
                if label and _is_term(d):
                    head, det = term_head(d), term_det(d)
                    if head and det:
                        self.emit(Triple(gov, label, det), conds)

    def visit(self, n, levels, ctx):
        if isinstance(n, Choice):
            for k, alt in enumerate(n.alternatives):
                self.visit(alt, levels, {**ctx, n.id: k})
        elif _is_term(n):
            proj = Apply("term", (_p_leaf(n.args[0]), _p_abs(n.args[1])))
            for conds, (t,) in self.expand([proj], ctx, "term"):
                det, head = term_det(t), term_head(t)
                if det and head:
                    self.emit(Triple(det, "det", head), conds)
            self.visit(n.args[0], levels, ctx)
            head_level = (Apply("term", (HOLE, _p_abs(n.args[1]))), term_head)
            self.restriction(n.args[1], [head_level] + levels, ctx)
        elif _is_form(n):
            self.relation(levels, _p_label(n.args[0]), n.args[1], ctx, "form")
            self.visit(n.args[0], levels, ctx)
            self.visit(n.args[1], levels, ctx)
        elif isinstance(n, Apply):
            for a in n.args:
                self.visit(a, levels, ctx)
        elif isinstance(n, Abs):
            self.visit(n.body, levels, ctx)
        elif isinstance(n, List):
            first = n.items[0]
            if isinstance(first, Choice):
                for k, alt in enumerate(first.alternatives):
                    self.visit(List((alt,) + n.items[1:]), levels, {**ctx, first.id: k})
            elif _is_and(n):
                proj = List((Atom("and"),) + tuple(_p_pred(i) for i in n.items[1:]))
                inner = [(proj, lambda r: _first_predicate(r.items[1:]))] + levels
                for item in n.items[1:]:
                    self.visit(item, inner, ctx)
            elif _is_predication(n):
                pred, args = first.name, n.items[1:]
                const = [(first, lambda r: r.name)]
                for pos, arg in enumerate(args, 1):
                    if pos >= 2:
                        label = Atom(self.roles.label(pred, len(args), pos))
                        self.relation(const, label, arg, ctx, f"{pred}/{len(args)} arg {pos}")
                for arg in args:
                    self.visit(arg, const, ctx)
            else:
                for item in n.items:
                    self.visit(item, levels, ctx)

    def restriction(self, n, levels, ctx):
        if isinstance(n, Choice):
            for k, alt in enumerate(n.alternatives):
                self.restriction(alt, levels, {**ctx, n.id: k})
        elif isinstance(n, Abs):
            self.restriction_body(n.body, levels, ctx)
        else:
            self.visit(n, levels, ctx)

    def restriction_body(self, b, levels, ctx):
        if isinstance(b, Choice):
            for k, alt in enumerate(b.alternatives):
                self.restriction_body(alt, levels, {**ctx, b.id: k})
        elif isinstance(b, List) and isinstance(b.items[0], Choice):
            first = b.items[0]
            for k, alt in enumerate(first.alternatives):
                self.restriction_body(List((alt,) + b.items[1:]), levels, {**ctx, first.id: k})
        elif _is_and(b):
            for item in b.items[1:]:
                self.visit(item, levels, ctx)
        else:
            self.visit(b, levels, ctx)


def extract_conditional_triples(packed: QlfNode, roles: RoleTable | None = None,
                                expansion_limit: int = DEFAULT_EXPANSION_LIMIT
                                ) -> list[ConditionalTriple]:
    """Triples of a packed QLF, each guarded by the choice selections it needs.

    For any full assignment ``a``, the triples whose conditions ``a`` satisfies
    form exactly the bag ``extract_triples(apply_assignment(packed, a))``.
    """
    ex = _PackedExtractor(roles if roles is not None else RoleTable(), expansion_limit)
    ex.visit(packed, [], {})
    return ex.out


def satisfied_triples(cts, assignment) -> Counter:
    bag: Counter = Counter()
    for ct in cts:
        if all(assignment.get(cid) == k for cid, k in ct.conditions):
            bag[ct.triple] += 1
    return bag

