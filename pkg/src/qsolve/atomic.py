"""Narrowing a box against a single atom by shaving.

Each side of each variable is shaved with slices of growing or shrinking
width measured in machine numbers.  A slice is removed only when interval
evaluation proves the atom false on all of it.  The search stops at the
first one-ulp slice that cannot be refuted, so normally the result is the
box-consistent bound and the operator is monotone and idempotent.  Work is
bounded by ``max_shave_rounds`` halvings per side and ``max_rounds`` passes;
near a tangency the exact bound is approached only sublinearly and the caps
stop short of it, in which case a second call can still shave a little.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .constraint import Atom
from .interval import EMPTY, Box, Interval, _mk, from_ordinal, to_ordinal

INF = float("inf")


class AtomVerdict(Enum):
    EMPTY = "proved-empty"
    FULL = "proved-full"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class NarrowConfig:
    shave_fraction: float = 0.25
    max_shave_rounds: int = 64
    min_width_ulps: int = 1
    # guard against the sublinear convergence of tangent configurations
    max_rounds: int = 100

    def __post_init__(self) -> None:
        if not 0.0 < self.shave_fraction <= 1.0:
            raise ValueError("shave_fraction must lie in (0, 1]")
        if self.max_shave_rounds < 1 or self.min_width_ulps < 1 or self.max_rounds < 1:
            raise ValueError("shaving limits must be positive")


DEFAULT_NARROW = NarrowConfig()


def _refutes(rel: str, val: Interval) -> bool:
    """Interval evaluation shows ``term rel 0`` fails everywhere."""
    lo, hi = val
    if lo > hi:
        # the term is undefined on the whole slice
        return True
    if rel == ">=":
        return hi < 0.0
    if rel == ">":
        return hi <= 0.0
    if rel == "<=":
        return lo > 0.0
    return lo >= 0.0


def _proves(rel: str, val: Interval) -> bool:
    lo, hi = val
    if lo > hi:
        return False
    if rel == ">=":
        return lo >= 0.0
    if rel == ">":
        return lo > 0.0
    if rel == "<=":
        return hi <= 0.0
    return hi < 0.0


def atom_test(a: Atom, box: Box) -> AtomVerdict:
    if box.is_empty:
        return AtomVerdict.EMPTY
    val = a.fn(box.data)
    if _refutes(a.rel, val):
        return AtomVerdict.EMPTY
    if _proves(a.rel, val):
        return AtomVerdict.FULL
    return AtomVerdict.UNKNOWN


def _initial_step(lo: float, hi: float, olo: int, ohi: int, frac: float) -> int:
    span = ohi - olo
    w = hi - lo
    if w == INF or w != w:
        return max(1, int(span * frac))
    target = lo + frac * w
    step = to_ordinal(min(target, hi)) - olo
    return max(1, min(step, span))


def _shave_lo(fn, rel, env, name, lo, hi, cfg):
    """Return (new_lo, moved) or None when the whole range is refuted."""
    olo, ohi = to_ordinal(lo), to_ordinal(hi)
    minw = cfg.min_width_ulps
    oa = olo
    a = lo
    moved = False
    # cheap probe on the leading canonical slice
    w = minw
    if oa + w >= ohi:
        w = ohi - oa
    step = _initial_step(lo, hi, olo, ohi, cfg.shave_fraction)
    tried_probe = False
    halvings = 0
    while True:
        if not tried_probe:
            cur = w
        else:
            cur = step
        oc = min(oa + cur, ohi)
        c = from_ordinal(oc)
        env[name] = _mk(Interval, (a, c))
        if _refutes(rel, fn(env)):
            if oc >= ohi:
                return None
            oa, a, moved = oc, c, True
            if tried_probe:
                step *= 2
        else:
            if not tried_probe:
                return a, moved
            if step <= minw:
                break
            step //= 2
            halvings += 1
            if halvings > cfg.max_shave_rounds:
                break
        tried_probe = True
    return a, moved


def _shave_hi(fn, rel, env, name, lo, hi, cfg):
    olo, ohi = to_ordinal(lo), to_ordinal(hi)
    minw = cfg.min_width_ulps
    ob = ohi
    b = hi
    moved = False
    w = minw
    if ob - w <= olo:
        w = ob - olo
    step = _initial_step(lo, hi, olo, ohi, cfg.shave_fraction)
    tried_probe = False
    halvings = 0
    while True:
        cur = step if tried_probe else w
        oc = max(ob - cur, olo)
        c = from_ordinal(oc)
        env[name] = _mk(Interval, (c, b))
        if _refutes(rel, fn(env)):
            if oc <= olo:
                return None
            ob, b, moved = oc, c, True
            if tried_probe:
                step *= 2
        else:
            if not tried_probe:
                return b, moved
            if step <= minw:
                break
            step //= 2
            halvings += 1
            if halvings > cfg.max_shave_rounds:
                break
        tried_probe = True
    return b, moved


def _shave(a: Atom, env: dict, name: str, cfg: NarrowConfig):
    """Shave one variable; ``env`` is a scratch copy of the box mapping."""
    cur = env.get(name)
    if cur is None:
        cur = _mk(Interval, (-INF, INF))
    lo, hi = cur
    fn, rel = a.fn, a.rel
    try:
        if lo == hi:
            if _refutes(rel, fn(env)):
                return EMPTY, True, True
            return cur, False, False
        r = _shave_lo(fn, rel, env, name, lo, hi, cfg)
        if r is None:
            return EMPTY, True, True
        new_lo, lo_moved = r
        r = _shave_hi(fn, rel, env, name, new_lo, hi, cfg)
        if r is None:
            return EMPTY, True, True
        new_hi, hi_moved = r
    finally:
        env[name] = cur
    if not lo_moved and not hi_moved:
        return cur, False, False
    return _mk(Interval, (new_lo, new_hi)), lo_moved, hi_moved


def shave_var(a: Atom, box: Box, name: str, cfg: NarrowConfig = DEFAULT_NARROW) -> Interval:
    """Box-consistent bound of ``name`` for the atom over ``box``."""
    if box.is_empty:
        return EMPTY
    env = dict(box.data)
    if _refutes(a.rel, a.fn(env)):
        return EMPTY
    if _proves(a.rel, a.fn(env)):
        return box[name]
    return _shave(a, env, name, cfg)[0]


def atomic_narrow(a: Atom, box: Box, cfg: NarrowConfig = DEFAULT_NARROW, stats=None,
                  marks: bool = True, shadow: bool = False) -> tuple[Atom, Box]:
    """Narrow ``box`` against ``a``; returns the re-marked atom and the box.

    With ``marks`` on, variables in ``a.mark`` are trusted to be consistent
    and are not shaved again until something changes.  ``shadow`` re-runs
    the skipped work and counts any disagreement in ``stats``.
    """
    if box.is_empty:
        return a, box
    names = a.vars
    if marks:
        pending = [n for n in names if n not in a.mark]
        if names and not pending:
            if stats is not None:
                stats.skipped_by_mark += 1
            if shadow:
                _shadow_check(a, box, names, cfg, stats)
            return a, box
    else:
        pending = list(names)
    if stats is not None:
        stats.atomic_hits += 1
    env = dict(box.data)
    val = a.fn(env)
    if _refutes(a.rel, val):
        return a.with_marks(frozenset(), frozenset()) if marks else a, Box.EMPTY
    if _proves(a.rel, val):
        # the atom holds on the whole box, so it cannot shave anything and
        # its opposite would shave everything
        if marks:
            a = a.with_marks(frozenset(names), frozenset())
        return a, box
    if shadow and marks:
        skipped = [n for n in names if n not in pending]
    else:
        skipped = []
    lo_cut: set[str] = set()
    hi_cut: set[str] = set()
    todo = pending
    changed_any = False
    rounds = 0
    capped = False
    while True:
        rounds += 1
        if rounds > cfg.max_rounds:
            capped = True
            break
        changed = False
        for n in todo:
            new, lm, hm = _shave(a, env, n, cfg)
            if new[0] > new[1]:
                return (a.with_marks(frozenset(), frozenset()) if marks else a), Box.EMPTY
            if lm or hm:
                env[n] = new
                changed = True
                if lm:
                    lo_cut.add(n)
                if hm:
                    hi_cut.add(n)
        if not changed:
            break
        changed_any = True
        todo = names
    if skipped and not changed_any:
        _shadow_check(a, box, skipped, cfg, stats)
    out = Box._raw(env) if changed_any else box
    if capped and stats is not None:
        stats.capped += 1
    if marks:
        opp = set(a.opp_mark) | (lo_cut & hi_cut)
        if _proves(a.rel, a.fn(env)):
            opp = set()
        a = a.with_marks(frozenset() if capped else frozenset(names), frozenset(opp))
    return a, out


def _shadow_check(a: Atom, box: Box, names, cfg: NarrowConfig, stats) -> None:
    env = dict(box.data)
    for n in names:
        new = _shave(a, env, n, cfg)[0]
        if new != box[n] and stats is not None:
            stats.shadow_violations += 1
