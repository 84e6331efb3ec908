"""Outer pruning of bounded constraints and its dual, inner pruning.

``prune(phi, B)`` returns a possibly simplified constraint and a sub-box of
``B`` that keeps every solution of ``phi`` in ``B``.  Applying it to the
opposite constraint removes points that certainly satisfy ``phi``.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field

from .atomic import DEFAULT_NARROW, NarrowConfig, atomic_narrow
from .constraint import And, Atom, Constraint, Or, Quant, notify, opposite
from .interval import Box

log = logging.getLogger(__name__)


@dataclass
class PruneStats:
    atomic_hits: int = 0
    skipped_by_mark: int = 0
    fixpoint_rounds: int = 0
    shadow_violations: int = 0
    prune_calls: int = 0
    capped: int = 0

    def merge(self, other: PruneStats) -> None:
        for f in dataclasses.fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))


@dataclass(frozen=True)
class PruneConfig:
    narrow: NarrowConfig = field(default_factory=lambda: DEFAULT_NARROW)
    marks: bool = True
    shortcut: bool = True
    shadow: bool = False
    # conjunction sweeps before giving up on an exact fixpoint
    max_and_rounds: int = 1000


DEFAULT_PRUNE = PruneConfig()


def prune(phi: Constraint, box: Box, cfg: PruneConfig | None = None,
          stats: PruneStats | None = None) -> tuple[Constraint, Box]:
    cfg = cfg or DEFAULT_PRUNE
    stats = stats if stats is not None else PruneStats()
    stats.prune_calls += 1
    if box.is_empty:
        return phi, box
    return _prune(phi, box, cfg, stats)


def inner_prune(phi: Constraint, box: Box, cfg: PruneConfig | None = None,
                stats: PruneStats | None = None) -> tuple[Constraint, Box]:
    """Prune the opposite; what is removed certainly satisfies ``phi``."""
    psi, out = prune(opposite(phi), box, cfg, stats)
    return opposite(psi), out


def _prune(phi, box, cfg, stats):
    if isinstance(phi, Atom):
        return atomic_narrow(phi, box, cfg.narrow, stats, cfg.marks, cfg.shadow)
    if isinstance(phi, And):
        return _prune_and(phi, box, cfg, stats)
    if isinstance(phi, Or):
        return _prune_or(phi, box, cfg, stats)
    return _prune_quant(phi, box, cfg, stats)


def _prune_and(phi: And, box: Box, cfg, stats):
    kids = list(phi.children)
    n = len(kids)
    i = 0
    stable = 0
    steps = 0
    while stable < n:
        kid, out = _prune(kids[i], box, cfg, stats)
        kids[i] = kid
        if out.is_empty:
            return dataclasses.replace(phi, children=tuple(kids)), out
        if out != box:
            moved = out.changed_vars(box)
            if cfg.marks:
                for j in range(n):
                    if j != i:
                        kids[j] = notify(kids[j], moved)
            box = out
            stable = 1
        else:
            stable += 1
        i = (i + 1) % n
        steps += 1
        if steps % n == 0:
            stats.fixpoint_rounds += 1
            if steps >= n * cfg.max_and_rounds:
                stats.capped += 1
                break
    if all(a is b for a, b in zip(kids, phi.children)):
        return phi, box
    return dataclasses.replace(phi, children=tuple(kids)), box


def _prune_or(phi: Or, box: Box, cfg, stats):
    kept: list[Constraint] = []
    bounds: list[Box | None] = []
    index_map: dict[int, int] = {}
    acc = Box.EMPTY
    kids = phi.children
    for i, kid in enumerate(kids):
        if cfg.shortcut and kept and acc == box:
            # the hull already covers the input; the rest cannot widen it
            for j in range(i, len(kids)):
                index_map[j] = len(kept)
                kept.append(kids[j])
                bounds.append(None)
            break
        new, out = _prune(kid, box, cfg, stats)
        if out.is_empty:
            continue
        index_map[i] = len(kept)
        kept.append(new)
        bounds.append(out)
        acc = acc.hull(out)
    if not kept:
        return phi, Box.EMPTY
    acc = acc.restrict(box.data.keys()) if not acc.is_empty else acc
    if cfg.marks:
        for j, b in enumerate(bounds):
            if b is not None and b != acc:
                kept[j] = notify(kept[j], b.changed_vars(acc))
    if len(kept) == 1:
        return kept[0], acc
    last = phi.last_branched
    if last >= 0:
        # keep pointing at the same child, or at the survivor before it
        while last >= 0 and last not in index_map:
            last -= 1
        last = index_map[last] if last >= 0 else -1
    if len(kept) == len(kids) and all(a is b for a, b in zip(kept, kids)):
        return phi, acc
    return Or(tuple(kept), last, phi.from_branch), acc


def _prune_quant(phi: Quant, box: Box, cfg, stats):
    inner = box
    for name, b in phi.bindings:
        inner = inner.set(name, b)
    body, out = _prune(phi.body, inner, cfg, stats)
    if out.is_empty:
        node = phi if body is phi.body else dataclasses.replace(phi, body=body)
        return node, Box.EMPTY
    if phi.kind == "forall":
        for name, b in phi.bindings:
            if out[name] != b:
                node = phi if body is phi.body else dataclasses.replace(phi, body=body)
                return node, Box.EMPTY
        bindings = phi.bindings
    else:
        bindings = tuple((name, out[name]) for name, _ in phi.bindings)
    result = _restore(out, box, phi.names)
    if body is phi.body and bindings == phi.bindings:
        return phi, result
    return Quant(phi.kind, bindings, body), result


def _restore(out: Box, outer: Box, names) -> Box:
    """Drop the bound variables again, reinstating any outer entries."""
    d = dict(out.data)
    for n in names:
        if n in outer.data:
            d[n] = outer.data[n]
        else:
            d.pop(n, None)
    return Box._raw(d)
