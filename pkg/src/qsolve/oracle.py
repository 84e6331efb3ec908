"""Independent sampling oracle and random instance generators.

The oracle evaluates a quantitative truth value on a uniform grid: atoms
give their signed residual, conjunction and universal quantification take
minima, disjunction and existential quantification take maxima.  It uses
plain floating point and shares no code with the pruning engine beyond the
term structure.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .constraint import And, Atom, Constraint, Or, Quant, flatten_blocks, free_vars
from .interval import Box, iv
from .terms import Add, Const, Mul, Neg, Pow, Sub, Term, Var, eval_point


@dataclass(frozen=True)
class GridSpec:
    """``samples_per_axis`` subdivisions per quantified axis (so that many
    plus one points, endpoints and midpoint included)."""

    samples_per_axis: int = 20
    margin: float = 1e-3
    refinement: int = 0


class OracleAbstained(Exception):
    """The sampled truth value is too close to zero to call."""


def _degree(node: Constraint, env: dict, shape: tuple, n: int) -> np.ndarray:
    if isinstance(node, Atom):
        with np.errstate(all="ignore"):
            val = np.asarray(eval_point(node.term, env), dtype=float)
        if node.rel in ("<=", "<"):
            val = -val
        return np.where(np.isnan(val), -np.inf, val)
    if isinstance(node, And):
        out = _degree(node.children[0], env, shape, n)
        for c in node.children[1:]:
            out = np.minimum(out, _degree(c, env, shape, n))
        return out
    if isinstance(node, Or):
        out = _degree(node.children[0], env, shape, n)
        for c in node.children[1:]:
            out = np.maximum(out, _degree(c, env, shape, n))
        return out
    inner = dict(env)
    cur = shape
    for name, b in node.bindings:
        pts = np.linspace(b.lo, b.hi, n + 1)
        inner[name] = pts.reshape((n + 1,) + (1,) * len(cur))
        cur = (n + 1,) + cur
    val = np.broadcast_to(_degree(node.body, inner, cur, n), cur)
    reduce = np.min if node.kind == "forall" else np.max
    axes = tuple(range(len(node.bindings)))
    return reduce(val, axis=axes)


def degree_of_truth(phi: Constraint, d: dict | None = None, g: GridSpec | None = None):
    """Sampled truth value of ``phi`` at the free-variable assignment ``d``.

    Values in ``d`` may be scalars or equal-length 1-d arrays; the result
    has the matching shape.
    """
    g = g or GridSpec()
    d = dict(d or {})
    missing = free_vars(phi) - set(d)
    if missing:
        raise ValueError(f"no value for free variables {sorted(missing)}")
    arrays = {k: np.asarray(v, dtype=float) for k, v in d.items()}
    shape: tuple = ()
    for v in arrays.values():
        if v.ndim:
            shape = v.shape
    val = np.broadcast_to(_degree(phi, arrays, shape, g.samples_per_axis), shape)
    return float(val) if not shape else np.array(val)


def grid_verdicts(phi: Constraint, d: dict | None = None, g: GridSpec | None = None) -> np.ndarray:
    """+1 (true), -1 (false) or 0 (abstain) per point, with refinement."""
    g = g or GridSpec()
    deg = np.atleast_1d(degree_of_truth(phi, d, g))
    verdict = np.where(deg >= g.margin, 1, np.where(deg <= -g.margin, -1, 0))
    n = g.samples_per_axis
    for _ in range(g.refinement):
        n *= 2
        finer = np.atleast_1d(degree_of_truth(phi, d, GridSpec(n, g.margin)))
        again = np.where(finer >= g.margin, 1, np.where(finer <= -g.margin, -1, 0))
        verdict = np.where(verdict == again, verdict, 0)
    return verdict


def grid_truth(phi: Constraint, d: dict | None = None, g: GridSpec | None = None) -> bool:
    """Truth of ``phi`` at one assignment; raises OracleAbstained when the
    sampled value is within the margin or refinements disagree."""
    v = int(grid_verdicts(phi, d, g)[0])
    if v == 0:
        raise OracleAbstained("sampled truth value is within the abstention margin")
    return v > 0


def box_grid(box: Box, names, n: int) -> dict:
    """Flattened grid of ``n + 1`` points per axis over ``box``."""
    axes = [np.linspace(box[k].lo, box[k].hi, n + 1) for k in names]
    if not axes:
        return {}
    mesh = np.meshgrid(*axes, indexing="ij")
    return {k: m.ravel() for k, m in zip(names, mesh)}


# -- random instances --------------------------------------------------------

_COEFFS = ("0.5", "1", "1.5", "2", "3")


def _const(text: str) -> Const:
    return Const.parse(text)


def _monomial(rng: random.Random, names: list[str], max_degree: int) -> Term:
    deg = rng.randint(1, max_degree)
    chosen = [rng.choice(names) for _ in range(deg)]
    factors: list[Term] = []
    for name in sorted(set(chosen)):
        k = chosen.count(name)
        factors.append(Var(name) if k == 1 else Pow(Var(name), k))
    coeff = rng.choice(_COEFFS)
    term: Term = factors[0]
    for f in factors[1:]:
        term = Mul(term, f)
    if coeff != "1":
        term = Mul(_const(coeff), term)
    return term


def random_poly(rng: random.Random, names: list[str], max_degree: int = 2, max_terms: int = 3) -> Term:
    """Random polynomial with a constant offset, in parser-normal form."""
    k = rng.randint(1, max_terms)
    term: Term = _monomial(rng, names, max_degree)
    if rng.random() < 0.3:
        term = Neg(term)
    for _ in range(k - 1):
        m = _monomial(rng, names, max_degree)
        term = Add(term, m) if rng.random() < 0.5 else Sub(term, m)
    c = rng.choice(("0.25", "0.5", "1", "1.5", "2"))
    return Add(term, _const(c)) if rng.random() < 0.5 else Sub(term, _const(c))


def random_atom(rng: random.Random, scope: list[str], max_degree: int = 2) -> Atom:
    k = min(len(scope), rng.choice((1, 2, 2)))
    names = rng.sample(scope, k)
    return Atom(random_poly(rng, names, max_degree), rng.choice((">=", ">", "<=", "<")))


def random_bound(rng: random.Random):
    lo = rng.choice((-2.0, -1.5, -1.0, -0.5, 0.0))
    hi = lo + rng.choice((0.5, 1.0, 1.5, 2.0, 3.0))
    return iv(lo, hi)


def random_constraint(rng: random.Random, free: list[str], bound_names: list[str],
                      max_depth: int = 3) -> Constraint:
    """Random well-formed constraint over ``free`` plus quantified names.

    Each bound name is used by at most one quantifier on any path, so the
    total number of distinct variables is ``len(free) + len(bound_names)``.
    """

    def gen(depth: int, scope: list[str], pool: list[str]) -> Constraint:
        if not scope and pool:
            return quant(depth, scope, pool)
        r = rng.random()
        if depth <= 0 or r < 0.3:
            return random_atom(rng, scope)
        if pool and r < 0.65:
            return quant(depth, scope, pool)
        conn = And if rng.random() < 0.5 else Or
        kids = tuple(gen(depth - 1, scope, list(pool)) for _ in range(rng.choice((2, 2, 3))))
        return conn(kids)

    def quant(depth: int, scope: list[str], pool: list[str]) -> Constraint:
        name = pool[0]
        body = gen(depth - 1, scope + [name], pool[1:])
        kind = rng.choice(("forall", "exists"))
        return Quant(kind, ((name, random_bound(rng)),), body)

    return flatten_blocks(gen(max_depth, list(free), list(bound_names)))


def random_box(rng: random.Random, names) -> Box:
    return Box({n: random_bound(rng) for n in names})


def random_closed(rng: random.Random, n_vars: int = 2, alternations: int = 1) -> Constraint:
    """Closed prenex-like instance with ``alternations + 1`` quantifier
    blocks over ``n_vars`` variables; some atoms sit above the innermost
    block."""
    names = ["x", "y", "z"][:n_vars]
    blocks = alternations + 1
    if blocks > len(names):
        raise ValueError("need at least one variable per quantifier block")
    first = rng.choice(("forall", "exists"))
    kinds = [first if i % 2 == 0 else ("exists" if first == "forall" else "forall") for i in range(blocks)]
    # distribute variables over blocks, one at least per block
    per_block = [[n] for n in names[:blocks]]
    for n in names[blocks:]:
        rng.choice(per_block).append(n)

    def level(i: int, scope: list[str]) -> Constraint:
        scope = scope + per_block[i]
        if i + 1 < blocks:
            body = level(i + 1, scope)
        else:
            k = rng.choice((1, 2, 2, 3))
            parts = tuple(random_atom(rng, scope) for _ in range(k))
            body = parts[0] if k == 1 else (And if rng.random() < 0.5 else Or)(parts)
        if i + 1 < blocks and rng.random() < 0.3:
            side = random_atom(rng, scope)
            body = (And if rng.random() < 0.5 else Or)((side, body))
        bindings = tuple((n, random_bound(rng)) for n in per_block[i])
        return Quant(kinds[i], bindings, body)

    return flatten_blocks(level(0, []))


def certify(phi: Constraint, margin: float = 0.05, samples: tuple[int, ...] = (20, 40)) -> bool | None:
    """Truth of a closed constraint when every grid agrees on a sign with
    magnitude at least ``margin``; None otherwise."""
    signs = set()
    for n in samples:
        deg = float(degree_of_truth(phi, {}, GridSpec(n, margin)))
        if abs(deg) < margin:
            return None
        signs.add(deg > 0)
    return signs.pop() if len(signs) == 1 else None


def certified_closed(seed: int, count: int, margin: float = 0.05) -> list[tuple[Constraint, bool]]:
    """``count`` random closed instances whose oracle verdict is stable.

    Instances are drawn in order from one seeded stream and kept or skipped
    on the oracle alone, never on how a solver fares.
    """
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n_vars = rng.choice((2, 3))
        alternations = rng.choice((1, 2)) if n_vars == 3 else 1
        phi = random_closed(rng, n_vars, alternations)
        verdict = certify(phi, margin)
        if verdict is not None:
            out.append((phi, verdict))
    return out
