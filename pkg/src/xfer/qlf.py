"""Quasi logical form terms: data model, concrete syntax and packed-form utilities.

A QLF is built from six node kinds::

    lundi1                      Atom
    E                           ObjVar
    term(def_sing,E^[lundi1,E]) Apply / Abs / List
    #(2,[sur,avec])             Choice (packed local ambiguity)

Transfer and rewrite patterns additionally use ``@name`` (MetaVar) and, in
transfer targets, ``tr(@name)`` (TransferMark).  Those are parsed only when
``patterns=True``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

__all__ = [
    "Atom", "ObjVar", "Apply", "Abs", "List", "Choice", "MetaVar", "TransferMark",
    "QlfNode", "Assignment", "Diagnostic",
    "QlfSyntaxError", "DuplicateChoiceId", "MissingChoice", "IndexOutOfRange",
    "LimitExceeded",
    "parse_qlf", "parse_qlf_lines", "print_qlf", "pretty_qlf",
    "collect_choices", "apply_assignment", "count_unpackings",
    "enumerate_assignments", "enumerate_unpackings", "validate_qlf",
    "canonical_vars", "alpha_equivalent", "is_choice_free", "assignment_key",
    "children", "rebuild", "symbols",
]


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class ObjVar:
    name: str


@dataclass(frozen=True)
class Apply:
    functor: str
    args: tuple

    def __post_init__(self):
        if not self.args:
            raise ValueError(f"Apply {self.functor!r} needs at least one argument")


@dataclass(frozen=True)
class Abs:
    var: ObjVar
    body: "QlfNode"


@dataclass(frozen=True)
class List:
    items: tuple

    def __post_init__(self):
        if not self.items:
            raise ValueError("List needs at least one item")


@dataclass(frozen=True)
class Choice:
    id: int
    alternatives: tuple


@dataclass(frozen=True)
class MetaVar:
    name: str


@dataclass(frozen=True)
class TransferMark:
    meta: str


QlfNode = Union[Atom, ObjVar, Apply, Abs, List, Choice, MetaVar, TransferMark]
Assignment = Mapping[int, int]


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str


class QlfSyntaxError(SyntaxError):
    def __init__(self, message: str, line: int, column: int, expected: str = ""):
        self.line = line
        self.column = column
        self.expected = expected
        text = f"{message} at line {line}, column {column}"
        if expected:
            text += f" (expected {expected})"
        super().__init__(text)


class DuplicateChoiceId(ValueError):
    def __init__(self, choice_id: int):
        self.choice_id = choice_id
        super().__init__(f"choice id {choice_id} occurs more than once")


class MissingChoice(KeyError):
    def __init__(self, choice_id: int):
        self.choice_id = choice_id
        super().__init__(f"assignment has no entry for choice {choice_id}")


class IndexOutOfRange(IndexError):
    def __init__(self, choice_id: int, index: int, size: int):
        self.choice_id, self.index, self.size = choice_id, index, size
        super().__init__(f"choice {choice_id}: index {index} outside 0..{size - 1}")


class LimitExceeded(RuntimeError):
    def __init__(self, count: int, limit: int):
        self.count, self.limit = count, limit
        super().__init__(f"{count} unpackings exceed the limit of {limit}")


# ---------------------------------------------------------------------------
# Concrete syntax

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<atom>[a-z][a-z0-9_]*)
  | (?P<var>[A-Z][A-Za-z0-9_]*)
  | (?P<meta>@[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<punct>[()\[\],^#])
    """,
    re.VERBOSE,
)


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QlfSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            tokens.append(_Token(kind if kind != "punct" else chunk, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, patterns: bool):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.patterns = patterns

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def fail(self, expected: str):
        tok = self.peek()
        found = repr(tok.text) if tok.kind != "eof" else "end of input"
        raise QlfSyntaxError(f"unexpected {found}", tok.line, tok.column, expected)

    def expect(self, kind: str, expected: str | None = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            self.fail(expected or repr(kind))
        self.pos += 1
        return tok

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def sequence(self, close: str) -> tuple:
        items = [self.expr()]
        while self.at(","):
            self.pos += 1
            items.append(self.expr())
        self.expect(close, f"',' or {close!r}")
        return tuple(items)

    def expr(self) -> QlfNode:
        tok = self.peek()
        if tok.kind == "atom":
            self.pos += 1
            if self.at("("):
                self.pos += 1
                if tok.text == "tr" and self.patterns:
                    meta = self.expect("meta", "a meta-variable inside tr(...)")
                    self.expect(")")
                    return TransferMark(meta.text[1:])
                return Apply(tok.text, self.sequence(")"))
            return Atom(tok.text)
        if tok.kind == "var":
            self.pos += 1
            if self.at("^"):
                self.pos += 1
                return Abs(ObjVar(tok.text), self.expr())
            return ObjVar(tok.text)
        if tok.kind == "meta" and self.patterns:
            self.pos += 1
            return MetaVar(tok.text[1:])
        if tok.kind == "[":
            self.pos += 1
            return List(self.sequence("]"))
        if tok.kind == "#":
            self.pos += 1
            self.expect("(")
            cid = int(self.expect("int", "a choice id").text)
            self.expect(",")
            self.expect("[")
            alts = self.sequence("]")
            self.expect(")")
            return Choice(cid, alts)
        self.fail("an atom, variable, '[' or '#('" + (" or '@meta'" if self.patterns else ""))


def parse_qlf(text: str, patterns: bool = False) -> QlfNode:
    """Parse exactly one QLF (or pattern, with ``patterns=True``) from ``text``."""
    parser = _Parser(text, patterns)
    node = parser.expr()
    parser.expect("eof", "end of input")
    return node


def parse_qlf_lines(text: str) -> list[QlfNode]:
    """Parse a ``.qlf`` file: one QLF per non-blank, non-comment line."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("%", 1)[0]
        if not line.strip():
            continue
        try:
            out.append(parse_qlf(line))
        except QlfSyntaxError as e:
            raise QlfSyntaxError(str(e).split(" at line")[0], lineno, e.column, e.expected) from None
    return out


def print_qlf(node: QlfNode) -> str:
    if isinstance(node, Atom):
        return node.name
    if isinstance(node, ObjVar):
        return node.name
    if isinstance(node, Apply):
        return f"{node.functor}({','.join(print_qlf(a) for a in node.args)})"
    if isinstance(node, Abs):
        return f"{node.var.name}^{print_qlf(node.body)}"
    if isinstance(node, List):
        return f"[{','.join(print_qlf(i) for i in node.items)}]"
    if isinstance(node, Choice):
        return f"#({node.id},[{','.join(print_qlf(a) for a in node.alternatives)}])"
    if isinstance(node, MetaVar):
        return f"@{node.name}"
    if isinstance(node, TransferMark):
        return f"tr(@{node.meta})"
    raise TypeError(f"not a QLF node: {node!r}")


def pretty_qlf(node: QlfNode, width: int = 60, indent: int = 0) -> str:
    """Multi-line rendering for human judges; re-parses to the same tree."""
    flat = print_qlf(node)
    if len(flat) + indent <= width:
        return flat
    pad = " " * (indent + 2)
    if isinstance(node, Apply):
        inner = [pretty_qlf(a, width, indent + 2) for a in node.args]
        return f"{node.functor}(\n{pad}" + f",\n{pad}".join(inner) + ")"
    if isinstance(node, Abs):
        return f"{node.var.name}^" + pretty_qlf(node.body, width, indent + len(node.var.name) + 1)
    if isinstance(node, List):
        inner = [pretty_qlf(i, width, indent + 2) for i in node.items]
        return f"[\n{pad}" + f",\n{pad}".join(inner) + "]"
    if isinstance(node, Choice):
        inner = [pretty_qlf(a, width, indent + 2) for a in node.alternatives]
        return f"#({node.id},[\n{pad}" + f",\n{pad}".join(inner) + "])"
    return flat


# ---------------------------------------------------------------------------
# Traversal helpers


def children(node: QlfNode) -> tuple:
    if isinstance(node, Apply):
        return node.args
    if isinstance(node, Abs):
        return (node.var, node.body)
    if isinstance(node, List):
        return node.items
    if isinstance(node, Choice):
        return node.alternatives
    return ()


def rebuild(node: QlfNode, kids: list) -> QlfNode:
    if isinstance(node, Apply):
        return Apply(node.functor, tuple(kids))
    if isinstance(node, Abs):
        return Abs(kids[0], kids[1])
    if isinstance(node, List):
        return List(tuple(kids))
    if isinstance(node, Choice):
        return Choice(node.id, tuple(kids))
    return node


def symbols(node: QlfNode) -> set[str]:
    """All atom names and functors occurring anywhere in ``node``."""
    out: set[str] = set()
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, Atom):
            out.add(n.name)
        elif isinstance(n, Apply):
            out.add(n.functor)
        stack.extend(children(n))
    return out


def is_choice_free(node: QlfNode) -> bool:
    if isinstance(node, Choice):
        return False
    return all(is_choice_free(c) for c in children(node))


# ---------------------------------------------------------------------------
# Packed-form utilities


def collect_choices(node: QlfNode) -> list[tuple[int, int]]:
    """(choice id, alternative count) for every Choice, in pre-order."""
    out, seen = [], set()

    def walk(n):
        if isinstance(n, Choice):
            if n.id in seen:
                raise DuplicateChoiceId(n.id)
            seen.add(n.id)
            out.append((n.id, len(n.alternatives)))
        for c in children(n):
            walk(c)

    walk(node)
    return out


def apply_assignment(node: QlfNode, assignment: Assignment) -> QlfNode:
    """Select one alternative per reachable Choice, giving a choice-free tree."""
    if isinstance(node, Choice):
        if node.id not in assignment:
            raise MissingChoice(node.id)
        k = assignment[node.id]
        if not 0 <= k < len(node.alternatives):
            raise IndexOutOfRange(node.id, k, len(node.alternatives))
        return apply_assignment(node.alternatives[k], assignment)
    kids = children(node)
    if not kids:
        return node
    return rebuild(node, [apply_assignment(c, assignment) for c in kids])


def count_unpackings(node: QlfNode) -> int:
    if isinstance(node, Choice):
        return sum(count_unpackings(a) for a in node.alternatives)
    total = 1
    for c in children(node):
        total *= count_unpackings(c)
    return total


def assignment_key(assignment: Assignment) -> tuple:
    return tuple(sorted(assignment.items()))


def _assignments(node: QlfNode) -> Iterator[dict]:
    if isinstance(node, Choice):
        for k, alt in enumerate(node.alternatives):
            for sub in _assignments(alt):
                yield {node.id: k, **sub}
        return
    kids = [c for c in children(node) if not isinstance(c, (Atom, ObjVar))]
    if not kids:
        yield {}
        return
    for parts in itertools.product(*(list(_assignments(c)) for c in kids)):
        merged: dict = {}
        for p in parts:
            merged.update(p)
        yield merged


def enumerate_assignments(node: QlfNode, limit: int | None = None) -> list[dict]:
    """All reachable full assignments, in lexicographic (choice id, index) order."""
    collect_choices(node)  # duplicate-id check
    count = count_unpackings(node)
    if limit is not None and count > limit:
        raise LimitExceeded(count, limit)
    return sorted(_assignments(node), key=assignment_key)


def enumerate_unpackings(node: QlfNode, limit: int | None = None) -> list[tuple[dict, QlfNode]]:
    return [(a, apply_assignment(node, a)) for a in enumerate_assignments(node, limit)]


def validate_qlf(node: QlfNode) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    seen: set[int] = set()

    def walk(n, bound: frozenset):
        if isinstance(n, Choice):
            if n.id in seen:
                diags.append(Diagnostic("DuplicateChoiceId", f"choice id {n.id} repeated"))
            seen.add(n.id)
            if len(n.alternatives) < 2:
                diags.append(Diagnostic("DegenerateChoice",
                                        f"choice {n.id} has {len(n.alternatives)} alternative(s)"))
        if isinstance(n, Abs):
            if n.var.name in bound:
                diags.append(Diagnostic("ShadowedVariable",
                                        f"{n.var.name} bound again inside its own scope"))
            walk(n.body, bound | {n.var.name})
            return
        for c in children(n):
            walk(c, bound)

    walk(node, frozenset())
    return diags


def canonical_vars(node: QlfNode) -> QlfNode:
    """Rename object variables to V0, V1, ... in order of first occurrence."""
    names: dict[str, str] = {}

    def walk(n):
        if isinstance(n, ObjVar):
            if n.name not in names:
                names[n.name] = f"V{len(names)}"
            return ObjVar(names[n.name])
        kids = children(n)
        if not kids:
            return n
        return rebuild(n, [walk(c) for c in kids])

    return walk(node)


def alpha_equivalent(a: QlfNode, b: QlfNode) -> bool:
    """Structural equality up to a consistent renaming of object variables."""
    return canonical_vars(a) == canonical_vars(b)
