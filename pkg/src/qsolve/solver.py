"""Deciding closed constraints and paving open ones.

Both drivers alternate pruning of the constraint and of its opposite until
neither makes progress, then branch.  Closed constraints end when one side
prunes to the empty bound; open constraints accumulate the boxes removed by
each side as certainly-true (Y) or certainly-false (N) pieces.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from .branch import STALENESS, BoundedConstraint, Unsplittable, branch, choose_target, pick
from .constraint import Constraint, free_vars, opposite, same
from .interval import Box, box_difference, volume
from .prune import PruneConfig, PruneStats, prune

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Budget:
    seconds: float = 600.0
    max_hits: int = 10_000_000
    max_boxes: int = 1_000_000


@dataclass
class SolveStats:
    prune: PruneStats = field(default_factory=PruneStats)
    boxes: int = 1
    branches: int = 0
    seconds: float = 0.0

    @property
    def hits(self) -> int:
        return self.prune.atomic_hits


@dataclass(frozen=True)
class SolverConfig:
    prune: PruneConfig = field(default_factory=PruneConfig)
    staleness: int = STALENESS


class _OutOfBudget(Exception):
    def __init__(self, reason: str) -> None:
        super().__init__(reason)
        self.reason = reason


class _Clock:
    def __init__(self, budget: Budget, stats: SolveStats) -> None:
        self.budget = budget
        self.stats = stats
        self.start = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def check(self) -> None:
        if self.elapsed() > self.budget.seconds:
            raise _OutOfBudget("time")
        if self.stats.prune.atomic_hits > self.budget.max_hits:
            raise _OutOfBudget("hits")
        if self.stats.boxes > self.budget.max_boxes:
            raise _OutOfBudget("boxes")


@dataclass
class ClosedVerdict:
    """Outcome of a closed solve; ``value`` is None when the budget ran out."""

    value: bool | None
    reason: str | None
    stats: SolveStats
    constraint: Constraint | None = None

    @property
    def label(self) -> str:
        if self.value is None:
            return "unknown"
        return "true" if self.value else "false"


def _prune_neg(phi, bound, cfg, stats):
    psi, out = prune(opposite(phi), bound, cfg, stats)
    return opposite(psi), out


def solve_closed(phi: Constraint, cfg: SolverConfig | None = None,
                 budget: Budget | None = None) -> ClosedVerdict:
    """Decide a closed constraint by alternating pruning and branching."""
    cfg = cfg or SolverConfig()
    budget = budget or Budget()
    fv = free_vars(phi)
    if fv:
        raise ValueError(f"constraint is not closed; free variables: {', '.join(sorted(fv))}")
    stats = SolveStats()
    clock = _Clock(budget, stats)
    pc = cfg.prune
    bc = BoundedConstraint(phi, Box())
    unknown = Box()
    neg = True
    try:
        while True:
            neg = True
            phi, unknown = _prune_neg(phi, unknown, pc, stats.prune)
            clock.check()
            prev = None
            while not unknown.is_empty and (prev is None or not same(phi, prev)):
                prev = phi
                neg = not neg
                if neg:
                    phi, unknown = _prune_neg(phi, unknown, pc, stats.prune)
                else:
                    phi, unknown = prune(phi, unknown, pc, stats.prune)
                clock.check()
            if unknown.is_empty:
                break
            bc = BoundedConstraint(phi, unknown, bc.last_split_level)
            bc, choice = choose_target(bc, [])
            log.debug("branch %s %s at level %d", choice.kind, choice.var, choice.level)
            (bc,) = branch(bc, choice)
            phi = bc.phi
            stats.branches += 1
            stats.boxes += 1
            clock.check()
    except _OutOfBudget as exc:
        stats.seconds = clock.elapsed()
        return ClosedVerdict(None, exc.reason, stats, phi)
    except Unsplittable:
        stats.seconds = clock.elapsed()
        return ClosedVerdict(None, "precision", stats, phi)
    stats.seconds = clock.elapsed()
    return ClosedVerdict(neg, None, stats, phi)


@dataclass(frozen=True)
class PavingRecord:
    kind: str  # "Y", "N" or "U"
    box: Box


@dataclass
class Paving:
    """Y: certainly true, N: certainly false, U: undecided leftovers."""

    names: list[str]
    Y: list[Box]
    N: list[Box]
    U: list[BoundedConstraint]
    epsilon: float
    complete: bool
    reason: str | None
    stats: SolveStats

    def volume(self, kind: str) -> float:
        if kind == "U":
            return sum(volume(bc.bound, self.names) for bc in self.U)
        boxes = self.Y if kind == "Y" else self.N
        return sum(volume(b, self.names) for b in boxes)

    def records(self) -> list[PavingRecord]:
        out = [PavingRecord("Y", b.restrict(self.names)) for b in self.Y]
        out += [PavingRecord("N", b.restrict(self.names)) for b in self.N]
        out += [PavingRecord("U", bc.bound.restrict(self.names)) for bc in self.U]
        return out


def pave(phi: Constraint, box: Box, epsilon: float, cfg: SolverConfig | None = None,
         budget: Budget | None = None, check_invariants: bool = False) -> Paving:
    """Cover ``box`` by true, false and undecided boxes.

    Stops once the undecided volume drops below ``epsilon``, or when the
    budget runs out (``complete`` is then False).
    """
    cfg = cfg or SolverConfig()
    budget = budget or Budget()
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    names = sorted(box.vars())
    missing = free_vars(phi) - set(names)
    if missing:
        raise ValueError(f"box does not bound free variables: {', '.join(sorted(missing))}")
    for n in names:
        if not box[n].is_finite:
            raise ValueError(f"box bound for {n} is not finite")
    stats = SolveStats()
    clock = _Clock(budget, stats)
    pc = cfg.prune
    total = volume(box, names)
    U = [BoundedConstraint(phi, box)]
    stuck: list[BoundedConstraint] = []
    Y: list[Box] = []
    N: list[Box] = []
    reason = None
    inflight: BoundedConstraint | None = None

    def vol_u() -> float:
        return sum(volume(bc.bound, names) for bc in U) + sum(volume(bc.bound, names) for bc in stuck)

    try:
        while vol_u() >= epsilon:
            if not U:
                reason = "precision"
                break
            bc = U.pop(pick(U, names, cfg.staleness))
            inflight = bc
            cur_phi, cur = bc.phi, bc.bound
            neg = True
            prev_phi, prev = cur_phi, cur
            cur_phi, cur = _prune_neg(cur_phi, cur, pc, stats.prune)
            Y.extend(box_difference(prev, cur, names))
            inflight = BoundedConstraint(cur_phi, cur, bc.last_split_level)
            clock.check()
            # like the closed driver, always give the constraint itself one
            # pruning pass even when the opposite made no progress
            prev_phi = None
            while not cur.is_empty and not (prev_phi is not None and cur == prev and same(cur_phi, prev_phi)):
                prev_phi, prev = cur_phi, cur
                neg = not neg
                if neg:
                    cur_phi, cur = _prune_neg(cur_phi, cur, pc, stats.prune)
                    Y.extend(box_difference(prev, cur, names))
                else:
                    cur_phi, cur = prune(cur_phi, cur, pc, stats.prune)
                    N.extend(box_difference(prev, cur, names))
                inflight = BoundedConstraint(cur_phi, cur, bc.last_split_level)
                clock.check()
            inflight = None
            if not cur.is_empty:
                survivor = BoundedConstraint(cur_phi, cur, bc.last_split_level)
                if vol_u() + volume(cur, names) >= epsilon:
                    try:
                        survivor, choice = choose_target(survivor, names)
                    except Unsplittable:
                        stuck.append(survivor)
                    else:
                        parts = branch(survivor, choice)
                        stats.branches += 1
                        stats.boxes += len(parts)
                        U.extend(parts)
                else:
                    U.append(survivor)
            if check_invariants:
                _check_partition(Y, N, U + stuck, names, total)
            clock.check()
    except _OutOfBudget as exc:
        reason = exc.reason
        if inflight is not None and not inflight.bound.is_empty:
            U.append(inflight)
    stats.seconds = clock.elapsed()
    return Paving(names, Y, N, U + stuck, epsilon, reason is None, reason, stats)


def _check_partition(Y, N, U, names, total) -> None:
    got = sum(volume(b, names) for b in Y) + sum(volume(b, names) for b in N)
    got += sum(volume(bc.bound, names) for bc in U)
    if abs(got - total) > 1e-9 * max(1.0, total):
        raise AssertionError(f"paving volumes sum to {got}, expected {total}")
