"""Negation-free constraint trees.

Atoms compare a term with zero.  Connectives are n-ary, quantifiers bind
blocks of variables to closed intervals.  Trees are immutable; every
transformation returns a new tree and shares unchanged subtrees.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Iterator, Union

from .interval import Box, Interval
from .terms import Term, compile_term, format_float, term_text, variables

RELATIONS = (">=", ">", "<=", "<")
OPPOSITE_REL = {">=": "<", "<": ">=", ">": "<=", "<=": ">"}


@dataclass(frozen=True)
class Atom:
    """``term rel 0``.

    ``mark`` holds the variables on which this atom is known not to shrink
    the current bound; ``opp_mark`` the same claim for the opposite atom.
    """

    term: Term
    rel: str
    mark: frozenset = frozenset()
    opp_mark: frozenset = frozenset()
    fn: Callable = field(default=None, compare=False, repr=False, hash=False)
    vars: tuple = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        if self.rel not in RELATIONS:
            raise ValueError(f"bad relation {self.rel!r}")
        if self.fn is None:
            object.__setattr__(self, "fn", compile_term(self.term))
        if self.vars is None:
            object.__setattr__(self, "vars", tuple(sorted(variables(self.term))))

    def with_marks(self, mark: frozenset, opp_mark: frozenset) -> Atom:
        if mark == self.mark and opp_mark == self.opp_mark:
            return self
        return dataclasses.replace(self, mark=mark, opp_mark=opp_mark)


@dataclass(frozen=True)
class And:
    children: tuple
    last_branched: int = -1
    from_branch: bool = False

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ValueError("a conjunction needs at least two children")


@dataclass(frozen=True)
class Or:
    children: tuple
    last_branched: int = -1
    from_branch: bool = False

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ValueError("a disjunction needs at least two children")


@dataclass(frozen=True)
class Quant:
    kind: str  # "forall" or "exists"
    bindings: tuple  # ((name, Interval), ...)
    body: "Constraint"

    def __post_init__(self) -> None:
        if self.kind not in ("forall", "exists"):
            raise ValueError(f"bad quantifier {self.kind!r}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.bindings)

    def bound(self, name: str) -> Interval:
        for n, b in self.bindings:
            if n == name:
                return b
        raise KeyError(name)

    def volume(self) -> float:
        v = 1.0
        for _, b in self.bindings:
            v *= b.hi - b.lo
        return v

    def rebind(self, name: str, val: Interval) -> tuple:
        return tuple((n, val if n == name else b) for n, b in self.bindings)


Constraint = Union[Atom, And, Or, Quant]


def atom(term: Term, rel: str) -> Atom:
    return Atom(term, rel)


def opposite(phi: Constraint) -> Constraint:
    """Negation pushed to the predicates; an involution on trees."""
    if isinstance(phi, Atom):
        return dataclasses.replace(
            phi, rel=OPPOSITE_REL[phi.rel], mark=phi.opp_mark, opp_mark=phi.mark
        )
    if isinstance(phi, And):
        return Or(tuple(opposite(c) for c in phi.children), phi.last_branched, phi.from_branch)
    if isinstance(phi, Or):
        return And(tuple(opposite(c) for c in phi.children), phi.last_branched, phi.from_branch)
    kind = "exists" if phi.kind == "forall" else "forall"
    return Quant(kind, phi.bindings, opposite(phi.body))


def notify(phi: Constraint, names) -> Constraint:
    """Clear both marks of every atom that mentions one of ``names``."""
    if not names:
        return phi
    if isinstance(phi, Atom):
        if (phi.mark or phi.opp_mark) and not names.isdisjoint(phi.vars):
            return phi.with_marks(frozenset(), frozenset())
        return phi
    if isinstance(phi, Quant):
        body = notify(phi.body, names)
        return phi if body is phi.body else dataclasses.replace(phi, body=body)
    kids = tuple(notify(c, names) for c in phi.children)
    if all(a is b for a, b in zip(kids, phi.children)):
        return phi
    return dataclasses.replace(phi, children=kids)


def clear_marks(phi: Constraint) -> Constraint:
    if isinstance(phi, Atom):
        return phi.with_marks(frozenset(), frozenset())
    if isinstance(phi, Quant):
        return dataclasses.replace(phi, body=clear_marks(phi.body))
    return dataclasses.replace(phi, children=tuple(clear_marks(c) for c in phi.children))


def same(a: Constraint, b: Constraint, marks: bool = False) -> bool:
    """Structural equality; marks are ignored unless ``marks`` is set."""
    if a is b:
        return True
    if type(a) is not type(b):
        return False
    if isinstance(a, Atom):
        if a.rel != b.rel or a.term != b.term:
            return False
        return not marks or (a.mark == b.mark and a.opp_mark == b.opp_mark)
    if isinstance(a, Quant):
        return a.kind == b.kind and a.bindings == b.bindings and same(a.body, b.body, marks)
    if len(a.children) != len(b.children) or a.from_branch != b.from_branch:
        return False
    return all(same(x, y, marks) for x, y in zip(a.children, b.children))


def free_vars(phi: Constraint) -> frozenset[str]:
    if isinstance(phi, Atom):
        return frozenset(phi.vars)
    if isinstance(phi, Quant):
        return free_vars(phi.body) - set(phi.names)
    out: frozenset[str] = frozenset()
    for c in phi.children:
        out |= free_vars(c)
    return out


def atoms(phi: Constraint) -> Iterator[Atom]:
    if isinstance(phi, Atom):
        yield phi
    elif isinstance(phi, Quant):
        yield from atoms(phi.body)
    else:
        for c in phi.children:
            yield from atoms(c)


def atoms_in_scope(phi: Constraint, box: Box) -> Iterator[tuple[Atom, Box]]:
    """Each atom with the box it sees: ``box`` overridden by enclosing
    quantifier bounds."""
    if isinstance(phi, Atom):
        yield phi, box
    elif isinstance(phi, Quant):
        inner = box
        for n, b in phi.bindings:
            inner = inner.set(n, b)
        yield from atoms_in_scope(phi.body, inner)
    else:
        for c in phi.children:
            yield from atoms_in_scope(c, box)


def size(phi: Constraint) -> int:
    if isinstance(phi, Atom):
        return 1
    if isinstance(phi, Quant):
        return 1 + size(phi.body)
    return 1 + sum(size(c) for c in phi.children)


def quantifier_depth(phi: Constraint) -> int:
    if isinstance(phi, Atom):
        return 0
    if isinstance(phi, Quant):
        return 1 + quantifier_depth(phi.body)
    return max(quantifier_depth(c) for c in phi.children)


def check_wellformed(phi: Constraint) -> list[str]:
    """Diagnostics for malformed trees; an empty list means well formed."""
    problems: list[str] = []

    def walk(node, path: str, bound: frozenset) -> None:
        if isinstance(node, Atom):
            return
        if isinstance(node, Quant):
            seen = set()
            for n, b in node.bindings:
                if n in bound or n in seen:
                    problems.append(f"variable {n} bound twice at path {path}")
                seen.add(n)
                if b.is_empty:
                    problems.append(f"empty quantifier bound at path {path}")
                elif not b.is_finite:
                    problems.append(f"unbounded quantifier bound at path {path}")
            walk(node.body, path + "/" + _tag(node.body, 0), bound | seen)
            return
        if len(node.children) < 2:
            problems.append(f"connective with fewer than two children at path {path}")
        for i, c in enumerate(node.children):
            walk(c, path + "/" + _tag(c, i), bound)

    walk(phi, _tag(phi, 0), frozenset())
    return problems


def _tag(node, index: int) -> str:
    if isinstance(node, Quant):
        return f"q{index}"
    if isinstance(node, And):
        return f"and{index}"
    if isinstance(node, Or):
        return f"or{index}"
    return f"atom{index}"


def flatten_blocks(phi: Constraint) -> Constraint:
    """Merge directly nested quantifiers of the same kind into one block."""
    if isinstance(phi, Atom):
        return phi
    if isinstance(phi, Quant):
        body = flatten_blocks(phi.body)
        if isinstance(body, Quant) and body.kind == phi.kind:
            return Quant(phi.kind, phi.bindings + body.bindings, body.body)
        return Quant(phi.kind, phi.bindings, body)
    return dataclasses.replace(phi, children=tuple(flatten_blocks(c) for c in phi.children))


# -- printing ----------------------------------------------------------------


def to_text(phi: Constraint) -> str:
    """Concrete syntax accepted by the parser, reproducing the same tree."""
    if isinstance(phi, Atom):
        return f"{term_text(phi.term)} {phi.rel} 0"
    if isinstance(phi, Quant):
        binds = ", ".join(
            f"{n} in [{format_float(b.lo)}, {format_float(b.hi)}]" for n, b in phi.bindings
        )
        return f"{phi.kind} {binds}. {to_text(phi.body)}"
    if isinstance(phi, Or):
        parts = [f"({to_text(c)})" if isinstance(c, (Or, Quant)) else to_text(c) for c in phi.children]
        return " or ".join(parts)
    parts = [f"({to_text(c)})" if not isinstance(c, Atom) else to_text(c) for c in phi.children]
    return " and ".join(parts)
