"""Pre-transfer coercion and post-transfer canonicalisation.

Phase files hold ``pre``/``post`` rewrite rules::

    pre  code_lex: code_np(@r,@c) => code_np(@r,@c).
    post prep_tnp: form(prep(temporal_np),@t) => form(temporal_np,@t).

Class tables (``ppclass <label> locative|temporal|other``) drive PP ordering
and code tables (``codeshape L,L,D,D,D flight_code``) drive code coercion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .qlf import Apply, Atom, Choice, List, QlfNode, QlfSyntaxError, children, rebuild
from .transfer import RecursionDepthExceeded, _has_mark, _metas, instantiate, match_pattern, parse_rule_lines

__all__ = [
    "RewriteRule", "CodePattern", "PpClassTable", "PP_CLASSES",
    "load_phases", "load_ppclass", "load_codeshapes",
    "apply_rewrites", "classify_code", "coerce_codes", "pre_transfer",
    "modifier_label", "order_pp_modifiers", "reorder_modifiers", "post_transfer",
    "DIGIT_WORDS",
]

PP_CLASSES = ("locative", "other", "temporal")
DIGIT_WORDS = frozenset(
    "zero oh one two three four five six seven eight nine".split())


@dataclass(frozen=True)
class RewriteRule:
    id: str
    lhs: QlfNode
    rhs: QlfNode
    phase: str = "post"

    def __post_init__(self):
        if self.phase not in ("pre", "post"):
            raise ValueError(f"unknown phase {self.phase!r}")
        if _has_mark(self.rhs) or _has_mark(self.lhs):
            raise ValueError(f"rewrite {self.id}: tr(...) not allowed in rewrite rules")
        extra = _metas(self.rhs) - _metas(self.lhs)
        if extra:
            raise ValueError(f"rewrite {self.id}: unbound meta-variable(s) {sorted(extra)}")


@dataclass(frozen=True)
class CodePattern:
    shape: tuple  # of "L" / "D"
    referent: str


class PpClassTable(dict):
    """Modifier label -> PP class; unlisted labels are ``other``."""

    def classify(self, label: str | None) -> str:
        if label is None:
            return "other"
        return self.get(label, "other")

    def rank(self, label: str | None) -> int:
        return PP_CLASSES.index(self.classify(label))


def load_phases(text: str) -> tuple[list[RewriteRule], list[RewriteRule]]:
    """Parse a ``.rw`` file into (pre rules, post rules), each in file order."""
    pre, post = [], []
    for _, kw, rid, lhs, rhs in parse_rule_lines(text, "pre|post"):
        (pre if kw == "pre" else post).append(RewriteRule(rid, lhs, rhs, kw))
    return pre, post


def _table_lines(text: str, keyword: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        fields = raw.split("%", 1)[0].split()
        if not fields:
            continue
        if fields[0] != keyword or len(fields) != 3:
            raise QlfSyntaxError(f"malformed {keyword} line", lineno, 1,
                                 f"'{keyword} <x> <y>'")
        yield lineno, fields[1], fields[2]


def load_ppclass(text: str) -> PpClassTable:
    table = PpClassTable()
    for lineno, label, cls in _table_lines(text, "ppclass"):
        if cls not in PP_CLASSES:
            raise QlfSyntaxError(f"unknown PP class {cls!r}", lineno, 1, "locative|temporal|other")
        table[label] = cls
    return table


def load_codeshapes(text: str) -> list[CodePattern]:
    out = []
    for lineno, shape, referent in _table_lines(text, "codeshape"):
        parts = tuple(shape.split(","))
        if not all(p in ("L", "D") for p in parts):
            raise QlfSyntaxError(f"bad code shape {shape!r}", lineno, 1, "L|D(,L|D)*")
        out.append(CodePattern(parts, referent))
    return out


# ---------------------------------------------------------------------------


def apply_rewrites(rules: Sequence[RewriteRule], q: QlfNode, max_depth: int = 256) -> QlfNode:
    """One top-down pass: the first matching rule rewrites a node, then the pass continues
    into the subterms its meta-variables bound.

    Structure introduced by a right-hand side is not revisited, so every position of
    the input is rewritten at most once and the pass terminates even for growing rules.
    """
    if not rules:
        return q

    def walk(n, depth):
        if depth > max_depth:
            raise RecursionDepthExceeded(f"rewriting deeper than {max_depth}")
        if not isinstance(n, Choice):
            for rule in rules:
                b = match_pattern(rule.lhs, n)
                if b is not None:
                    used = _metas(rule.rhs)
                    # a bare @x left-hand side binds n itself: go below it, not round again
                    b.metas = {k: (descend(v, depth) if v is n else walk(v, depth + 1)) if k in used else v
                               for k, v in b.metas.items()}
                    return instantiate(rule.rhs, b)
        return descend(n, depth)

    def descend(n, depth):
        kids = children(n)
        if not kids:
            return n
        return rebuild(n, [walk(c, depth + 1) for c in kids])

    return walk(q, 0)


def _token_class(tok: str) -> str | None:
    if len(tok) == 1 and tok.isalpha():
        return "L"
    if tok in DIGIT_WORDS:
        return "D"
    return None


def classify_code(tokens: Sequence[str], codes: Iterable[CodePattern]) -> str:
    if not tokens:
        raise ValueError("classify_code needs at least one token")
    shape = tuple(_token_class(t) for t in tokens)
    for pattern in codes:
        if pattern.shape == shape:
            return pattern.referent
    return "unknown_code"


def coerce_codes(q: QlfNode, codes: Sequence[CodePattern]) -> QlfNode:
    """Annotate ``code_np([tok,...])`` with its referent: ``code_np(flight_code,[tok,...])``."""
    if (isinstance(q, Apply) and q.functor == "code_np" and len(q.args) == 1
            and isinstance(q.args[0], List)
            and all(isinstance(t, Atom) for t in q.args[0].items)):
        referent = classify_code([t.name for t in q.args[0].items], codes)
        return Apply("code_np", (Atom(referent), q.args[0]))
    kids = children(q)
    if not kids:
        return q
    return rebuild(q, [coerce_codes(c, codes) for c in kids])


def pre_transfer(q: QlfNode, rules: Sequence[RewriteRule] = (),
                 codes: Sequence[CodePattern] = ()) -> QlfNode:
    return apply_rewrites(rules, coerce_codes(q, codes))


def modifier_label(mod: QlfNode) -> str | None:
    """Label of a ``form(prep(P),_)`` / ``form(L,_)`` modifier, else None."""
    if not (isinstance(mod, Apply) and mod.functor == "form" and len(mod.args) == 2):
        return None
    head = mod.args[0]
    if isinstance(head, Atom):
        return head.name
    if (isinstance(head, Apply) and head.functor == "prep" and len(head.args) == 1
            and isinstance(head.args[0], Atom)):
        return head.args[0].name
    return None


def order_pp_modifiers(mods: Sequence[QlfNode], table: PpClassTable) -> list[QlfNode]:
    """Stable sort: locative first, temporal last, everything else in between."""
    return sorted(mods, key=lambda m: table.rank(modifier_label(m)))


def _is_form(n: QlfNode) -> bool:
    return isinstance(n, Apply) and n.functor == "form" and len(n.args) == 2


def reorder_modifiers(q: QlfNode, table: PpClassTable) -> QlfNode:
    """Reorder the form(...) items of every ``[and, ...]`` list in place."""
    kids = children(q)
    if not kids:
        return q
    kids = [reorder_modifiers(c, table) for c in kids]
    if isinstance(q, List) and kids[0] == Atom("and"):
        slots = [i for i, k in enumerate(kids) if _is_form(k)]
        for i, mod in zip(slots, order_pp_modifiers([kids[i] for i in slots], table)):
            kids[i] = mod
    return rebuild(q, kids)


def post_transfer(q: QlfNode, rules: Sequence[RewriteRule] = (),
                  table: PpClassTable | None = None) -> QlfNode:
    q = apply_rewrites(rules, q)
    if table is not None:
        q = reorder_modifiers(q, table)
    return q
