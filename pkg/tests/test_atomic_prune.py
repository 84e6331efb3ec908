from __future__ import annotations

import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsolve.atomic import AtomVerdict, NarrowConfig, atom_test, atomic_narrow, shave_var
from qsolve.constraint import And, Atom, Or, Quant, atoms, opposite, same
from qsolve.interval import Box, iv
from qsolve.oracle import random_atom, random_box, random_constraint
from qsolve.parser import parse
from qsolve.prune import PruneConfig, PruneStats, inner_prune, prune


def test_atom_test_verdicts():
    a = parse("x^2 + 1 >= 0")
    assert atom_test(a, Box.of(x=(-5, 5))) is AtomVerdict.FULL
    assert atom_test(parse("x >= 3"), Box.of(x=(-5, 2))) is AtomVerdict.EMPTY
    assert atom_test(parse("x >= 0"), Box.of(x=(-1, 1))) is AtomVerdict.UNKNOWN
    assert atom_test(a, Box.EMPTY) is AtomVerdict.EMPTY


def test_shave_reaches_the_root():
    a = parse("x^2 <= 2")
    out = shave_var(a, Box.of(x=(-3, 3)), "x")
    assert out.lo == pytest.approx(-2**0.5, abs=1e-12)
    assert out.hi == pytest.approx(2**0.5, abs=1e-12)
    assert shave_var(parse("x >= 5"), Box.of(x=(-3, 3)), "x").is_empty


def test_narrow_marks_and_opposite_marks():
    a = parse("x >= 0")
    a2, out = atomic_narrow(a, Box.of(x=(-2, 2)))
    assert out["x"].lo <= 0 <= out["x"].lo + 1e-300 and out["x"].hi == 2
    assert a2.mark == {"x"}
    # only the lower side moved, so the opposite may still cut
    assert a2.opp_mark == frozenset()
    b2, out = atomic_narrow(parse("x^2 <= 1"), Box.of(x=(-2, 2)))
    assert b2.opp_mark == {"x"}
    stats = PruneStats()
    b3, out2 = atomic_narrow(b2, out, stats=stats)
    assert out2 == out and stats.skipped_by_mark == 1 and stats.atomic_hits == 0


def test_proved_full_sets_own_marks():
    a, out = atomic_narrow(parse("x^2 + 1 >= 0"), Box.of(x=(-1, 1)))
    assert a.mark == {"x"} and out == Box.of(x=(-1, 1))


# the shrinking-box convergence suite: the atom is strictly false at p
CONVERGING = [
    ("x^2 + y^2 <= 1", {"x": 1.0, "y": 0.5}),
    ("x * y >= 1", {"x": 0.5, "y": 0.5}),
    ("sin(x) > 0.5", {"x": 0.0}),
    ("exp(x) - 2 <= 0", {"x": 1.0}),
    ("x^3 - x > 0", {"x": 0.5}),
]


@pytest.mark.parametrize("text, p", CONVERGING)
def test_shrinking_boxes_around_false_points_become_empty(text, p):
    a = parse(text)
    results = []
    for w in (1, 0.1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
        box = Box({k: iv(v - w / 2, v + w / 2) for k, v in p.items()})
        results.append(atomic_narrow(a, box)[1].is_empty)
    assert results[-1], f"{text} does not refute tiny boxes around {p}"
    # once refuted, smaller boxes stay refuted
    first = results.index(True)
    assert all(results[first:])


def _random_atom_case(seed: int):
    rng = random.Random(seed)
    names = ["x", "y", "z"][: rng.randint(1, 3)]
    return random_atom(rng, names), random_box(rng, names), names


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_atomic_narrowing_is_idempotent_and_contracting(seed):
    a, box, _ = _random_atom_case(seed)
    stats = PruneStats()
    a1, b1 = atomic_narrow(a, box, stats=stats)
    a2, b2 = atomic_narrow(a1, b1, marks=False)
    assert b1.subset(box)
    if not stats.capped:
        assert b2 == b1


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_atomic_narrowing_keeps_solutions(seed):
    a, box, names = _random_atom_case(seed)
    _, out = atomic_narrow(a, box)
    axes = [np.linspace(box[n].lo, box[n].hi, 11) for n in names]
    for pt in itertools.product(*axes):
        env = dict(zip(names, pt))
        val = float(eval(_py(a), {}, env))
        holds = {">=": val >= 0, ">": val > 0, "<=": val <= 0, "<": val < 0}[a.rel]
        # only points clearly inside the solution set are checked
        if holds and abs(val) > 1e-9:
            assert not out.is_empty and all(out[n].lo <= env[n] <= out[n].hi for n in names)


def _py(a: Atom) -> str:
    from qsolve.terms import term_text

    return term_text(a.term).replace("^", "**")


def test_narrow_config_validation():
    with pytest.raises(ValueError):
        NarrowConfig(shave_fraction=0)
    with pytest.raises(ValueError):
        NarrowConfig(max_rounds=0)


# -- prune ----------------------------------------------------------------------

def test_worked_example_prunes_both_bounds():
    phi = parse("exists y in [-2, 2]. x^2 + y^2 <= 1 and y >= 0")
    psi, out = prune(phi, Box.of(x=(-2, 2)))
    y = psi.bound("y")
    assert abs(y.lo) < 1e-12 and abs(y.hi - 1) < 1e-12
    assert abs(out["x"].lo + 1) < 1e-12 and abs(out["x"].hi - 1) < 1e-12
    assert "y" not in out


def test_universal_failure_empties_the_bound():
    _, out = prune(parse("forall x in [-2, 2]. x >= 0"), Box())
    assert out.is_empty


def test_or_hull_and_shortcut():
    phi = parse("x >= 0 or x <= 0")
    stats = PruneStats()
    _, out = prune(phi, Box.of(x=(-1, 1)), stats=stats)
    assert out == Box.of(x=(-1, 1))
    # with the shortcut the third disjunct is never looked at
    phi3 = parse("x >= 0 or x <= 0 or x^2 <= 4")
    s_on, s_off = PruneStats(), PruneStats()
    prune(phi3, Box.of(x=(-1, 1)), PruneConfig(shortcut=True), s_on)
    prune(phi3, Box.of(x=(-1, 1)), PruneConfig(shortcut=False), s_off)
    assert s_on.atomic_hits == 2 and s_off.atomic_hits == 3


def test_empty_disjuncts_are_removed():
    phi = parse("x >= 5 or x <= 0 or x >= 10")
    psi, out = prune(phi, Box.of(x=(-1, 1)))
    assert isinstance(psi, Atom)
    assert out["x"].hi <= 1e-300


def test_inner_prune_examples():
    _, out = inner_prune(parse("x^2 + 1 >= 0"), Box.of(x=(-5, 5)))
    assert out.is_empty
    _, out = inner_prune(parse("x^2 <= -1"), Box.of(x=(-1, 1)))
    assert out == Box.of(x=(-1, 1))
    _, out = inner_prune(parse("x >= 0"), Box.of(x=(-2, 2)))
    assert out["x"].lo == -2 and out["x"].hi <= 0


def _random_case(seed: int):
    rng = random.Random(seed)
    free = ["a", "b"][: rng.randint(1, 2)]
    return random_constraint(rng, free, ["u", "v"], 3), random_box(rng, free)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_duality_through_opposite(seed):
    phi, box = _random_case(seed)
    psi, a = inner_prune(phi, box)
    chi, b = prune(opposite(phi), box)
    assert a == b and same(psi, opposite(chi))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.randoms(use_true_random=False))
def test_conjunction_order_does_not_matter(seed, shuffler):
    phi, box = _random_case(seed)
    kids = list(parse("a^2 + b^2 <= 2 and a - b >= -0.5 and a * b <= 0.5").children) + [phi]
    base = prune(And(tuple(kids)), box)[1]
    shuffler.shuffle(kids)
    stats = PruneStats()
    out = prune(And(tuple(kids)), box, stats=stats)[1]
    if not stats.capped:
        assert out == base


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_marks_do_not_change_results(seed):
    phi, box = _random_case(seed)
    on = prune(phi, box, PruneConfig(marks=True))
    off = prune(phi, box, PruneConfig(marks=False))
    assert on[1] == off[1] and same(on[0], off[0])
    # a second pass with marks set skips work but agrees with a fresh pass
    stats = PruneStats()
    again = prune(on[0], on[1], PruneConfig(marks=True, shadow=True), stats)
    assert stats.shadow_violations == 0
    assert again[1] == prune(off[0], off[1], PruneConfig(marks=False))[1]


def test_marks_fire_on_a_repeated_conjunction():
    phi = parse("x^2 + y^2 <= 1 and x + y >= 0.5 and x - y <= 0.5")
    psi, box = prune(phi, Box.of(x=(-2, 2), y=(-2, 2)))
    stats = PruneStats()
    prune(psi, box, stats=stats)
    assert stats.skipped_by_mark == 3 and stats.atomic_hits == 0
    assert all(a.mark for a in atoms(psi))


def test_existential_bound_var_does_not_leak_into_sibling_scope():
    phi = parse("(exists y in [0, 1]. x + y >= 1.5) and (exists y in [-1, 0]. x - y >= 0)")
    _, out = prune(phi, Box.of(x=(-2, 2)))
    assert "y" not in out
    assert out["x"].lo >= 0.5 - 1e-12


def test_quantifier_bounds_follow_the_rules():
    psi, _ = prune(parse("forall y in [0, 1]. x + y >= 0"), Box.of(x=(-2, 2)))
    assert isinstance(psi, Quant) and psi.bound("y") == iv(0, 1)
    psi, _ = prune(parse("exists y in [0, 4]. y^2 <= x"), Box.of(x=(0, 1)))
    assert psi.bound("y").hi <= 1 + 1e-12


def test_or_children_get_notified_about_the_hull():
    phi = parse("x >= 0.5 or x <= -0.5")
    psi, _ = prune(phi, Box.of(x=(-1, 1)))
    assert isinstance(psi, Or)
    assert all(a.mark == frozenset() for a in atoms(psi))
