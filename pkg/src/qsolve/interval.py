"""Outward-rounded interval arithmetic and box assignments.

Intervals are ``(lo, hi)`` float pairs.  Every operation returns an
enclosure of the exact real result: sums and products are corrected with
error-free transforms, quotients and square roots with a residual sign
test, and library transcendentals are widened by one ulp.
"""

from __future__ import annotations

import math
import struct
from typing import Iterable, Iterator, Mapping, NamedTuple

INF = math.inf
MAX = 1.7976931348623157e308
_next = math.nextafter
_isfinite = math.isfinite


def down(x: float) -> float:
    return _next(x, -INF)


def up(x: float) -> float:
    return _next(x, INF)


class Interval(NamedTuple):
    lo: float
    hi: float

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi

    @property
    def width(self) -> float:
        if self.lo > self.hi:
            return 0.0
        return self.hi - self.lo

    @property
    def is_finite(self) -> bool:
        return _isfinite(self.lo) and _isfinite(self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def subset(self, other: Interval) -> bool:
        if self.lo > self.hi:
            return True
        return other.lo <= self.lo and self.hi <= other.hi

    def __repr__(self) -> str:
        if self.lo > self.hi:
            return "EMPTY"
        return f"[{self.lo!r}, {self.hi!r}]"


_mk = tuple.__new__
EMPTY = _mk(Interval, (INF, -INF))
ENTIRE = _mk(Interval, (-INF, INF))


def iv(lo: float, hi: float | None = None) -> Interval:
    """Build an interval, normalising ``-0.0`` and collapsing reversed bounds."""
    if hi is None:
        hi = lo
    lo = float(lo) + 0.0
    hi = float(hi) + 0.0
    if math.isnan(lo) or math.isnan(hi):
        raise ValueError("interval endpoint is NaN")
    if lo > hi:
        return EMPTY
    return _mk(Interval, (lo, hi))


# -- error-free transforms ---------------------------------------------------

_SPLITTER = 134217729.0  # 2**27 + 1
_SAFE_HI = 1e290
_SAFE_LO = 1e-280


def _two_prod_err(a: float, b: float, p: float) -> float:
    c = _SPLITTER * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLITTER * b
    bh = c - (c - b)
    bl = b - bh
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _prod_exact_ok(a: float, b: float, p: float) -> bool:
    ap = abs(p)
    return _SAFE_LO < ap < _SAFE_HI and abs(a) < _SAFE_HI and abs(b) < _SAFE_HI


def add_down(x: float, y: float) -> float:
    s = x + y
    if s - s != 0.0:
        if s == INF and _isfinite(x) and _isfinite(y):
            return MAX
        return s
    bb = s - x
    err = (x - (s - bb)) + (y - bb)
    return s if err >= 0.0 else _next(s, -INF)


def add_up(x: float, y: float) -> float:
    s = x + y
    if s - s != 0.0:
        if s == -INF and _isfinite(x) and _isfinite(y):
            return -MAX
        return s
    bb = s - x
    err = (x - (s - bb)) + (y - bb)
    return s if err <= 0.0 else _next(s, INF)


def mul_down(x: float, y: float) -> float:
    if x == 0.0 or y == 0.0:
        return 0.0
    p = x * y
    if p - p != 0.0:
        if p != p:
            return 0.0
        if p == INF and _isfinite(x) and _isfinite(y):
            return MAX
        return p
    if _prod_exact_ok(x, y, p):
        err = _two_prod_err(x, y, p)
        return p if err >= 0.0 else _next(p, -INF)
    if p == 0.0 and (x > 0.0) == (y > 0.0):
        # positive product that underflowed
        return 0.0
    return _next(p, -INF)


def mul_up(x: float, y: float) -> float:
    if x == 0.0 or y == 0.0:
        return 0.0
    p = x * y
    if p - p != 0.0:
        if p != p:
            return 0.0
        if p == -INF and _isfinite(x) and _isfinite(y):
            return -MAX
        return p
    if _prod_exact_ok(x, y, p):
        err = _two_prod_err(x, y, p)
        return p if err <= 0.0 else _next(p, INF)
    if p == 0.0 and (x > 0.0) != (y > 0.0):
        return 0.0
    return _next(p, INF)


def _div_residual_sign(x: float, y: float, q: float) -> int | None:
    """Sign of ``x/y - q`` or None when the check is unreliable."""
    if q == 0.0 or not _prod_exact_ok(q, y, q * y) or abs(x) >= _SAFE_HI:
        return None
    p = q * y
    r = (x - p) - _two_prod_err(q, y, p)
    if r == 0.0:
        return 0
    return 1 if (r > 0.0) == (y > 0.0) else -1


def div_down(x: float, y: float) -> float:
    q = x / y
    if q - q != 0.0:
        if q == INF and _isfinite(x) and y != 0.0:
            return MAX
        return q
    if not _isfinite(y):
        return 0.0 if _isfinite(x) else q
    s = _div_residual_sign(x, y, q)
    if s is None:
        return q if x == 0.0 else _next(q, -INF)
    return q if s >= 0 else _next(q, -INF)


def div_up(x: float, y: float) -> float:
    q = x / y
    if q - q != 0.0:
        if q == -INF and _isfinite(x) and y != 0.0:
            return -MAX
        return q
    if not _isfinite(y):
        return 0.0 if _isfinite(x) else q
    s = _div_residual_sign(x, y, q)
    if s is None:
        return q if x == 0.0 else _next(q, INF)
    return q if s <= 0 else _next(q, INF)


def _sqrt_residual_sign(x: float, s: float) -> int | None:
    if s == 0.0 or not _prod_exact_ok(s, s, s * s):
        return None
    p = s * s
    r = (x - p) - _two_prod_err(s, s, p)
    if r == 0.0:
        return 0
    return 1 if r > 0.0 else -1


def sqrt_down(x: float) -> float:
    if x <= 0.0:
        return 0.0
    s = math.sqrt(x)
    if s == INF:
        return s
    sign = _sqrt_residual_sign(x, s)
    if sign is None:
        return max(0.0, _next(s, -INF))
    return s if sign >= 0 else _next(s, -INF)


def sqrt_up(x: float) -> float:
    if x <= 0.0:
        return 0.0
    s = math.sqrt(x)
    if s == INF:
        return s
    sign = _sqrt_residual_sign(x, s)
    if sign is None:
        return _next(s, INF)
    return s if sign <= 0 else _next(s, INF)


# -- interval operations -----------------------------------------------------


def ineg(a: Interval) -> Interval:
    if a[0] > a[1]:
        return EMPTY
    return _mk(Interval, (-a[1], -a[0]))


def iadd(a: Interval, b: Interval) -> Interval:
    if a[0] > a[1] or b[0] > b[1]:
        return EMPTY
    return _mk(Interval, (add_down(a[0], b[0]), add_up(a[1], b[1])))


def isub(a: Interval, b: Interval) -> Interval:
    if a[0] > a[1] or b[0] > b[1]:
        return EMPTY
    return _mk(Interval, (add_down(a[0], -b[1]), add_up(a[1], -b[0])))


def imul(a: Interval, b: Interval) -> Interval:
    al, ah = a
    bl, bh = b
    if al > ah or bl > bh:
        return EMPTY
    if al >= 0.0:
        if bl >= 0.0:
            return _mk(Interval, (mul_down(al, bl), mul_up(ah, bh)))
        if bh <= 0.0:
            return _mk(Interval, (mul_down(ah, bl), mul_up(al, bh)))
        return _mk(Interval, (mul_down(ah, bl), mul_up(ah, bh)))
    if ah <= 0.0:
        if bl >= 0.0:
            return _mk(Interval, (mul_down(al, bh), mul_up(ah, bl)))
        if bh <= 0.0:
            return _mk(Interval, (mul_down(ah, bh), mul_up(al, bl)))
        return _mk(Interval, (mul_down(al, bh), mul_up(al, bl)))
    if bl >= 0.0:
        return _mk(Interval, (mul_down(al, bh), mul_up(ah, bh)))
    if bh <= 0.0:
        return _mk(Interval, (mul_down(ah, bl), mul_up(al, bl)))
    lo = min(mul_down(al, bh), mul_down(ah, bl))
    hi = max(mul_up(al, bl), mul_up(ah, bh))
    return _mk(Interval, (lo, hi))


def idiv(a: Interval, b: Interval) -> Interval:
    """Quotient; a divisor straddling zero gives the whole line."""
    al, ah = a
    bl, bh = b
    if al > ah or bl > bh:
        return EMPTY
    if bl == 0.0 and bh == 0.0:
        return EMPTY
    if bl <= 0.0 <= bh:
        return ENTIRE
    if bl > 0.0:
        # numerator sign decides which divisor endpoint is extreme
        lo = div_down(al, bh) if al >= 0.0 else div_down(al, bl)
        hi = div_up(ah, bl) if ah >= 0.0 else div_up(ah, bh)
    else:
        lo = div_down(ah, bh) if ah >= 0.0 else div_down(ah, bl)
        hi = div_up(al, bl) if al >= 0.0 else div_up(al, bh)
    return _mk(Interval, (lo, hi))


def isqr(a: Interval) -> Interval:
    al, ah = a
    if al > ah:
        return EMPTY
    if al >= 0.0:
        return _mk(Interval, (mul_down(al, al), mul_up(ah, ah)))
    if ah <= 0.0:
        return _mk(Interval, (mul_down(ah, ah), mul_up(al, al)))
    m = max(-al, ah)
    return _mk(Interval, (0.0, mul_up(m, m)))


def _pow_pos(x: float, n: int, mul) -> float:
    result = 1.0
    base = x
    while n:
        if n & 1:
            result = mul(result, base)
        n >>= 1
        if n:
            base = mul(base, base)
    return result


def ipow(a: Interval, n: int) -> Interval:
    al, ah = a
    if al > ah:
        return EMPTY
    if n == 0:
        return _mk(Interval, (1.0, 1.0))
    if n < 0:
        return idiv(_mk(Interval, (1.0, 1.0)), ipow(a, -n))
    if n == 1:
        return a
    if n % 2 == 0:
        if al >= 0.0:
            return _mk(Interval, (_pow_pos(al, n, mul_down), _pow_pos(ah, n, mul_up)))
        if ah <= 0.0:
            return _mk(Interval, (_pow_pos(-ah, n, mul_down), _pow_pos(-al, n, mul_up)))
        return _mk(Interval, (0.0, _pow_pos(max(-al, ah), n, mul_up)))
    lo = _pow_pos(al, n, mul_down) if al >= 0.0 else -_pow_pos(-al, n, mul_up)
    hi = _pow_pos(ah, n, mul_up) if ah >= 0.0 else -_pow_pos(-ah, n, mul_down)
    return _mk(Interval, (lo, hi))


def iabs(a: Interval) -> Interval:
    al, ah = a
    if al > ah:
        return EMPTY
    if al >= 0.0:
        return a
    if ah <= 0.0:
        return _mk(Interval, (-ah, -al))
    return _mk(Interval, (0.0, max(-al, ah)))


def isqrt(a: Interval) -> Interval:
    """Square root over the part of ``a`` inside the domain ``[0, inf)``."""
    al, ah = a
    if al > ah or ah < 0.0:
        return EMPTY
    return _mk(Interval, (sqrt_down(max(al, 0.0)), sqrt_up(ah)))


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return INF


def iexp(a: Interval) -> Interval:
    al, ah = a
    if al > ah:
        return EMPTY
    lo = 1.0 if al == 0.0 else max(0.0, down(_exp(al)))
    if lo == INF:
        lo = MAX
    hi = 1.0 if ah == 0.0 else up(_exp(ah))
    return _mk(Interval, (lo, hi))


def ilog(a: Interval) -> Interval:
    al, ah = a
    if al > ah or ah <= 0.0:
        return EMPTY
    lo = -INF if al <= 0.0 else (0.0 if al == 1.0 else down(math.log(al)))
    hi = 0.0 if ah == 1.0 else up(math.log(ah))
    return _mk(Interval, (lo, hi))


_TWO_PI = 2.0 * math.pi


def _contains_phase(lo: float, hi: float, phase: float) -> bool:
    """Whether ``[lo, hi]`` holds a point ``phase + 2k*pi``.

    The test is approximate near the endpoints, which is harmless: sin and
    cos are flat at their extrema, so the one-ulp widening of the endpoint
    values still encloses the true range.
    """
    k = math.ceil((lo - phase) / _TWO_PI)
    return phase + k * _TWO_PI <= hi


def _trig(a: Interval, fn, top: float, bottom: float) -> Interval:
    al, ah = a
    if al > ah:
        return EMPTY
    if not (_isfinite(al) and _isfinite(ah)) or ah - al >= _TWO_PI:
        return _mk(Interval, (-1.0, 1.0))
    fa, fb = fn(al), fn(ah)
    lo = max(-1.0, down(min(fa, fb)))
    hi = min(1.0, up(max(fa, fb)))
    if _contains_phase(al, ah, top):
        hi = 1.0
    if _contains_phase(al, ah, bottom):
        lo = -1.0
    return _mk(Interval, (lo, hi))


def isin(a: Interval) -> Interval:
    if a[0] == 0.0 and a[1] == 0.0:
        return _mk(Interval, (0.0, 0.0))
    return _trig(a, math.sin, math.pi / 2, -math.pi / 2)


def icos(a: Interval) -> Interval:
    if a[0] == 0.0 and a[1] == 0.0:
        return _mk(Interval, (1.0, 1.0))
    return _trig(a, math.cos, 0.0, math.pi)


def hull(a: Interval, b: Interval) -> Interval:
    if a[0] > a[1]:
        return b
    if b[0] > b[1]:
        return a
    return _mk(Interval, (min(a[0], b[0]), max(a[1], b[1])))


def meet(a: Interval, b: Interval) -> Interval:
    lo = max(a[0], b[0])
    hi = min(a[1], b[1])
    if lo > hi:
        return EMPTY
    return _mk(Interval, (lo, hi))


def decimal_interval(text: str) -> Interval:
    """Tightest machine interval enclosing the decimal literal ``text``."""
    from fractions import Fraction

    exact = Fraction(text.strip())
    v = float(exact)
    if math.isinf(v):
        return _mk(Interval, (MAX, INF)) if v > 0 else _mk(Interval, (-INF, -MAX))
    fv = Fraction(v)
    if fv == exact:
        return iv(v, v)
    if fv < exact:
        return iv(v, up(v))
    return iv(down(v), v)


# -- float ordinals ----------------------------------------------------------

_D = struct.Struct("<d")
_Q = struct.Struct("<q")
_SIGN = 0x7FFFFFFFFFFFFFFF


def to_ordinal(x: float) -> int:
    """Map a float to an integer so that adjacent floats differ by one."""
    i = _Q.unpack(_D.pack(x))[0]
    return i if i >= 0 else -(i & _SIGN)


def from_ordinal(k: int) -> float:
    if k >= 0:
        return _D.unpack(_Q.pack(k))[0]
    return -_D.unpack(_Q.pack(-k))[0]


MIN_SPLIT_ULPS = 16


class AtomicInterval(ValueError):
    """The interval is too narrow to split at machine precision."""


def splittable(a: Interval) -> bool:
    lo, hi = a
    if lo > hi or not (_isfinite(lo) and _isfinite(hi)):
        return False
    mid = 0.5 * lo + 0.5 * hi
    return hi - lo > MIN_SPLIT_ULPS * math.ulp(mid) and lo < mid < hi


def split_interval(a: Interval) -> tuple[Interval, Interval]:
    """Halve ``a`` at its midpoint; the halves share the midpoint."""
    if not splittable(a):
        raise AtomicInterval(f"interval {a!r} is below splitting resolution")
    lo, hi = a
    mid = 0.5 * lo + 0.5 * hi
    return _mk(Interval, (lo, mid)), _mk(Interval, (mid, hi))


# -- boxes -------------------------------------------------------------------


class Box:
    """Finite map from variable names to intervals.

    A variable without an entry is unconstrained.  ``Box.EMPTY`` is the
    empty assignment (falsity); ``Box()`` with no entries is truth.
    """

    __slots__ = ("_d", "_empty")
    EMPTY: Box

    def __init__(self, bindings: Mapping[str, Interval] | Iterable | None = None) -> None:
        d: dict[str, Interval] = {}
        empty = False
        if bindings:
            items = bindings.items() if isinstance(bindings, Mapping) else bindings
            for name, val in items:
                val = val if isinstance(val, Interval) else iv(*val)
                if val.is_empty:
                    empty = True
                d[name] = val
        self._d = {} if empty else d
        self._empty = empty

    @classmethod
    def _raw(cls, d: dict[str, Interval]) -> Box:
        b = object.__new__(cls)
        b._d = d
        b._empty = False
        return b

    @classmethod
    def of(cls, **bounds: tuple[float, float]) -> Box:
        return cls({k: iv(*v) for k, v in bounds.items()})

    @property
    def is_empty(self) -> bool:
        return self._empty

    @property
    def data(self) -> dict[str, Interval]:
        """Underlying mapping; callers must not mutate it."""
        return self._d

    def __getitem__(self, name: str) -> Interval:
        if self._empty:
            return EMPTY
        return self._d.get(name, ENTIRE)

    def __contains__(self, name: str) -> bool:
        return name in self._d

    def __iter__(self) -> Iterator[str]:
        return iter(self._d)

    def __len__(self) -> int:
        return len(self._d)

    def vars(self) -> list[str]:
        return sorted(self._d)

    def items(self):
        return self._d.items()

    def set(self, name: str, val: Interval) -> Box:
        if self._empty:
            return self
        if val[0] > val[1]:
            return Box.EMPTY
        d = dict(self._d)
        d[name] = val
        return Box._raw(d)

    def without(self, name: str) -> Box:
        if self._empty or name not in self._d:
            return self
        d = dict(self._d)
        del d[name]
        return Box._raw(d)

    def restrict(self, names: Iterable[str]) -> Box:
        if self._empty:
            return self
        return Box._raw({n: self._d[n] for n in names if n in self._d})

    def meet(self, other: Box) -> Box:
        if self._empty or other._empty:
            return Box.EMPTY
        d = dict(self._d)
        for k, v in other._d.items():
            cur = d.get(k)
            m = v if cur is None else meet(cur, v)
            if m.is_empty:
                return Box.EMPTY
            d[k] = m
        return Box._raw(d)

    def hull(self, other: Box) -> Box:
        """Smallest box containing both; a variable missing on either side
        is unconstrained in the result."""
        if self._empty:
            return other
        if other._empty:
            return self
        d = {}
        for k, v in self._d.items():
            w = other._d.get(k)
            if w is not None:
                h = hull(v, w)
                if h != ENTIRE:
                    d[k] = h
        return Box._raw(d)

    def subset(self, other: Box) -> bool:
        if self._empty:
            return True
        if other._empty:
            return False
        for k, w in other._d.items():
            v = self._d.get(k, ENTIRE)
            if not (w[0] <= v[0] and v[1] <= w[1]):
                return False
        return True

    def changed_vars(self, other: Box) -> set[str]:
        """Variables whose interval differs between the two boxes."""
        keys = set(self._d) | set(other._d)
        return {k for k in keys if self[k] != other[k]}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Box):
            return NotImplemented
        if self._empty or other._empty:
            return self._empty and other._empty
        a, b = self._d, other._d
        if a == b:
            return True
        for k in set(a) | set(b):
            if a.get(k, ENTIRE) != b.get(k, ENTIRE):
                return False
        return True

    def __hash__(self) -> int:
        if self._empty:
            return hash("EMPTY-BOX")
        return hash(frozenset((k, v) for k, v in self._d.items() if v != ENTIRE))

    def __repr__(self) -> str:
        if self._empty:
            return "Box.EMPTY"
        inner = ", ".join(f"{k}={v!r}" for k, v in sorted(self._d.items()))
        return f"Box({inner})"


Box.EMPTY = object.__new__(Box)
Box.EMPTY._d = {}
Box.EMPTY._empty = True


def volume(box: Box, names: Iterable[str]) -> float:
    """Product of widths over ``names``; an unbounded axis gives inf."""
    if box.is_empty:
        return 0.0
    v = 1.0
    for n in names:
        lo, hi = box[n]
        v *= hi - lo
    return v


def box_difference(outer: Box, inner: Box, names: Iterable[str]) -> list[Box]:
    """Pieces covering ``outer`` minus ``inner`` by peeling one axis at a time.

    Requires ``inner`` inside ``outer``.  Pieces have disjoint interiors and
    together with ``inner`` they tile ``outer``.
    """
    if outer.is_empty:
        return []
    if inner.is_empty:
        return [outer]
    pieces: list[Box] = []
    cur = outer
    for n in names:
        o = cur[n]
        i = inner[n]
        if o.lo < i.lo:
            pieces.append(cur.set(n, _mk(Interval, (o.lo, i.lo))))
        if i.hi < o.hi:
            pieces.append(cur.set(n, _mk(Interval, (i.hi, o.hi))))
        if o != i:
            cur = cur.set(n, i)
    return pieces
