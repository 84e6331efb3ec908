"""Splitting bounded constraints and choosing what to split next.

A split either halves the bound of a free variable (two bounded
constraints) or halves a quantifier bound inside the tree: a universal
becomes a conjunction of two copies, an existential a disjunction.

Target choice works on quantifier levels: free variables are level 0, a
quantifier nested under k others is level k+1.  After splitting level L the
next split goes to level L+1 when possible and otherwise to the top-most
level that still has something to split.  Within a level, connectives made
by earlier splits lead to the copy with the largest quantifier bound and
connectives of the input are visited round-robin.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .constraint import And, Atom, Constraint, Or, Quant, notify, quantifier_depth
from .interval import Box, splittable, split_interval, volume

STALENESS = 32


class Unsplittable(Exception):
    """No bound of the constraint can be split at machine precision."""


@dataclass(frozen=True)
class BranchChoice:
    kind: str  # "free" or "quant"
    var: str
    path: tuple = ()
    level: int = 0


@dataclass
class BoundedConstraint:
    phi: Constraint
    bound: Box
    last_split_level: int | None = None
    picks: int = 0

    def volume(self, names) -> float:
        return volume(self.bound, names)


def _widest(named_bounds) -> str | None:
    best, best_w = None, -1.0
    for name, b in named_bounds:
        if splittable(b) and b.hi - b.lo > best_w:
            best, best_w = name, b.hi - b.lo
    return best


def _quant_volume(node: Constraint) -> float:
    if isinstance(node, Quant):
        return node.volume()
    if isinstance(node, (And, Or)):
        return max(_quant_volume(c) for c in node.children)
    return 0.0


def _find(node: Constraint, depth: int, level: int):
    """Locate a quantifier at ``level``; returns (updated node, path, var)."""
    if isinstance(node, Atom):
        return None
    if isinstance(node, Quant):
        here = depth + 1
        if here == level:
            var = _widest(node.bindings)
            return None if var is None else (node, (), var)
        found = _find(node.body, here, level)
        if found is None:
            return None
        body, path, var = found
        return dataclasses.replace(node, body=body), (0,) + path, var
    kids = node.children
    n = len(kids)
    if node.from_branch:
        order = sorted(range(n), key=lambda i: -_quant_volume(kids[i]))
    else:
        order = [(node.last_branched + 1 + k) % n for k in range(n)]
    for i in order:
        found = _find(kids[i], depth, level)
        if found is None:
            continue
        child, path, var = found
        new_kids = kids[:i] + (child,) + kids[i + 1:]
        last = node.last_branched if node.from_branch else i
        return dataclasses.replace(node, children=new_kids, last_branched=last), (i,) + path, var
    return None


def choose_target(bc: BoundedConstraint, free=None) -> tuple[BoundedConstraint, BranchChoice]:
    """Pick what to split in ``bc``; updates the round-robin state.

    ``free`` lists the variables of the bound that may be split (default:
    every finite variable of the bound).  Raises Unsplittable.
    """
    if free is None:
        free = [n for n in bc.bound.vars() if bc.bound[n].is_finite]
    levels = list(range(1, quantifier_depth(bc.phi) + 1))
    free_var = _widest((n, bc.bound[n]) for n in free)
    if free_var is not None:
        levels.insert(0, 0)
    order = list(levels)
    if bc.last_split_level is not None and bc.last_split_level + 1 in levels:
        order.remove(bc.last_split_level + 1)
        order.insert(0, bc.last_split_level + 1)
    for level in order:
        if level == 0:
            return bc, BranchChoice("free", free_var, (), 0)
        found = _find(bc.phi, 0, level)
        if found is not None:
            phi, path, var = found
            new = dataclasses.replace(bc, phi=phi)
            return new, BranchChoice("quant", var, path, level)
    raise Unsplittable("every bound is below splitting resolution")


def _copies(q: Quant, var: str) -> tuple[Quant, Quant]:
    a, b = split_interval(q.bound(var))
    body = notify(q.body, {var})
    return Quant(q.kind, q.rebind(var, a), body), Quant(q.kind, q.rebind(var, b), body)


def _matches(conn: Constraint, q: Quant) -> bool:
    return isinstance(conn, And) if q.kind == "forall" else isinstance(conn, Or)


def _split_at(node: Constraint, path: tuple, var: str) -> Constraint:
    if not path:
        q1, q2 = _copies(node, var)
        conn = And if node.kind == "forall" else Or
        return conn((q1, q2), -1, True)
    if isinstance(node, Quant):
        return dataclasses.replace(node, body=_split_at(node.body, path[1:], var))
    i = path[0]
    kids = node.children
    child = kids[i]
    if len(path) == 1 and node.from_branch and isinstance(child, Quant) and _matches(node, child):
        q1, q2 = _copies(child, var)
        return dataclasses.replace(node, children=kids[:i] + (q1, q2) + kids[i + 1:])
    new_child = _split_at(child, path[1:], var)
    return dataclasses.replace(node, children=kids[:i] + (new_child,) + kids[i + 1:])


def branch(bc: BoundedConstraint, choice: BranchChoice) -> list[BoundedConstraint]:
    """Apply ``choice``; the union of the results equals ``bc``."""
    if choice.kind == "free":
        lo_half, hi_half = split_interval(bc.bound[choice.var])
        phi = notify(bc.phi, {choice.var})
        return [
            BoundedConstraint(phi, bc.bound.set(choice.var, lo_half), 0),
            BoundedConstraint(phi, bc.bound.set(choice.var, hi_half), 0),
        ]
    phi = _split_at(bc.phi, choice.path, choice.var)
    return [BoundedConstraint(phi, bc.bound, choice.level)]


def pick(bcs: list[BoundedConstraint], names, staleness: int = STALENESS) -> int:
    """Index of the next bounded constraint to work on.

    Largest volume wins, except that a constraint picked ``staleness``
    fewer times than the most-picked one takes precedence.
    """
    if not bcs:
        raise IndexError("no bounded constraints to choose from")
    top = max(bc.picks for bc in bcs)
    lagging = [i for i, bc in enumerate(bcs) if top - bc.picks >= staleness]
    if lagging:
        i = min(lagging, key=lambda i: (bcs[i].picks, -bcs[i].volume(names), i))
    else:
        i = min(range(len(bcs)), key=lambda i: (-bcs[i].volume(names), bcs[i].picks, i))
    bcs[i].picks += 1
    return i


def select(bcs: list[BoundedConstraint], names=None, staleness: int = STALENESS):
    """Pick a bounded constraint and a split target inside it.

    Returns ``(index, updated constraint, choice)``.
    """
    if names is None:
        names = sorted({n for bc in bcs for n in bc.bound.vars()})
    i = pick(bcs, names, staleness)
    bc, choice = choose_target(bcs[i], [n for n in names if n in bcs[i].bound])
    return i, bc, choice
