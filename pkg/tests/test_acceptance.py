"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are printed even
when output capture is on) or directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import random
import time
from fractions import Fraction

import numpy as np

from qsolve.bench import CONFIGS, bench_run, compare_configs, corpus_files
from qsolve.branch import BoundedConstraint, pick
from qsolve.constraint import And, Quant, free_vars, opposite, same
from qsolve.interval import Box, iv
from qsolve.oracle import GridSpec, OracleAbstained, box_grid, grid_truth, grid_verdicts, random_box, random_constraint
from qsolve.parser import parse
from qsolve.prune import PruneConfig, PruneStats, inner_prune, prune
from qsolve.solver import Budget, SolverConfig, pave, solve_closed

LAW_SEED = 0
DUALITY_SEED = 1


def report(capsys, number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)


def law_instance(rng: random.Random):
    nf = rng.randint(0, 3)
    nb = rng.randint(0, 4 - nf)
    if nf + nb == 0:
        nf = 1
    free = ["a", "b", "c"][:nf]
    bound = ["u", "v", "w", "s"][:nb]
    return random_constraint(rng, free, bound, 3), random_box(rng, free), free


def nested_box(rng: random.Random, box: Box, names) -> Box:
    out = {}
    for n in names:
        b = box[n]
        lo, hi = sorted(rng.uniform(b.lo, b.hi) for _ in range(2))
        out[n] = iv(lo, hi)
    return Box(out)


# -- criterion 1 ---------------------------------------------------------------

def check_closed_examples():
    t = time.perf_counter()
    v_true = solve_closed(parse("forall x in [-10, 10]. x^2 + 1 >= 0"))
    t_true = time.perf_counter() - t
    t = time.perf_counter()
    v_false = solve_closed(parse("forall x in [-2, 2]. x >= 0"))
    t_false = time.perf_counter() - t
    ok = (v_true.value is True and t_true < 1.0 and v_false.value is False and t_false < 1.0
          and v_false.stats.branches == 0)
    detail = (f"x^2+1>=0 -> {v_true.label} in {t_true:.3f}s; x>=0 -> {v_false.label} in {t_false:.3f}s "
              f"with {v_false.stats.branches} branches")
    return ok, detail


def test_criterion_1_closed_solver(capsys):
    ok, detail = check_closed_examples()
    report(capsys, 1, ok, detail)
    assert ok, detail


# -- criterion 2 ---------------------------------------------------------------

def check_worked_example():
    phi = parse("exists y in [-2, 2]. x^2 + y^2 <= 1 and y >= 0")
    stats = PruneStats()
    t = time.perf_counter()
    psi, out = prune(phi, Box.of(x=(-2, 2)), stats=stats)
    dt = time.perf_counter() - t
    assert isinstance(psi, Quant)
    y = psi.bound("y")
    x = out["x"]
    err = max(abs(y.lo - 0), abs(y.hi - 1), abs(x.lo + 1), abs(x.hi - 1))
    ok = err <= 1e-6 and stats.prune_calls == 1 and dt < 0.1
    return ok, f"y in {y}, x in {x}, max error {err:.2e}, {stats.prune_calls} prune call, {dt * 1000:.1f} ms"


def test_criterion_2_worked_example(capsys):
    ok, detail = check_worked_example()
    report(capsys, 2, ok, detail)
    assert ok, detail


# -- criterion 3 ---------------------------------------------------------------

def check_laws(n: int = 500):
    rng = random.Random(LAW_SEED)
    failures = {"contractance": 0, "idempotence": 0, "monotonicity": 0, "soundness": 0}
    first = {}
    t0 = time.perf_counter()
    for k in range(n):
        phi, box, free = law_instance(rng)
        psi, b1 = prune(phi, box)
        psi2, b2 = prune(psi, b1)
        sub = nested_box(rng, box, free)
        _, b3 = prune(phi, sub)
        bad = []
        if not b1.subset(box):
            bad.append("contractance")
        if not (b2 == b1 and same(psi2, psi)):
            bad.append("idempotence")
        if not b3.subset(b1):
            bad.append("monotonicity")
        if free:
            pts = box_grid(box, free, 20)
            v = grid_verdicts(phi, pts, GridSpec(20, 1e-3, 1))
            if b1.is_empty:
                inside = np.zeros(len(v), bool)
            else:
                inside = np.ones(len(v), bool)
                for name in free:
                    inside &= (pts[name] >= b1[name].lo) & (pts[name] <= b1[name].hi)
            if np.any((v == 1) & ~inside):
                bad.append("soundness")
        else:
            v = grid_verdicts(phi, {}, GridSpec(20, 1e-3, 1))
            if v[0] == 1 and b1.is_empty:
                bad.append("soundness")
        for law in bad:
            failures[law] += 1
            first.setdefault(law, k)
    dt = time.perf_counter() - t0
    ok = not any(failures.values()) and dt < 60.0
    parts = ", ".join(f"{law} {c}" for law, c in failures.items())
    where = "; first failing instance " + ", ".join(f"{law} #{k}" for law, k in first.items()) if first else ""
    return ok, f"{n} instances in {dt:.1f}s, violations: {parts}{where}"


def test_criterion_3_narrowing_laws(capsys):
    ok, detail = check_laws()
    report(capsys, 3, ok, detail)
    assert ok, detail


# -- criterion 4 ---------------------------------------------------------------

def check_duality(n: int = 200):
    rng = random.Random(DUALITY_SEED)
    mismatches = 0
    for _ in range(n):
        phi, box, _ = law_instance(rng)
        _, a = inner_prune(phi, box)
        _, b = prune(opposite(phi), box)
        same_bits = (a.is_empty and b.is_empty) or (
            a.vars() == b.vars()
            and all(a[k].lo.hex() == b[k].lo.hex() and a[k].hi.hex() == b[k].hi.hex() for k in a.vars())
        )
        mismatches += not same_bits
    return mismatches == 0, f"{n} instances, {mismatches} bound mismatches"


def test_criterion_4_duality(capsys):
    ok, detail = check_duality()
    report(capsys, 4, ok, detail)
    assert ok, detail


# -- criterion 5 ---------------------------------------------------------------

def check_circle():
    phi = parse("x^2 + y^2 <= 1")
    box = Box.of(x=(-2, 2), y=(-2, 2))
    t = time.perf_counter()
    p = pave(phi, box, 0.1)
    dt = time.perf_counter() - t
    vy, vn = p.volume("Y"), p.volume("N")
    bad_points = 0
    for b in p.Y:
        for xs in np.linspace(b["x"].lo, b["x"].hi, 10):
            for ys in np.linspace(b["y"].lo, b["y"].hi, 10):
                # exact rational check: a grid point of a proved box satisfies the atom
                if Fraction(float(xs)) ** 2 + Fraction(float(ys)) ** 2 > 1:
                    bad_points += 1
    ok = (p.complete and vy + vn > 15.9 and vy <= math.pi <= 16 - vn and bad_points == 0 and dt < 30)
    detail = (f"Y={vy:.4f} N={vn:.4f} Y+N={vy + vn:.4f}, {len(p.Y)} Y boxes, "
              f"{bad_points} bad samples, {dt:.2f}s")
    return ok, detail


def test_criterion_5_circle_paving(capsys):
    ok, detail = check_circle()
    report(capsys, 5, ok, detail)
    assert ok, detail


# -- criterion 6 ---------------------------------------------------------------

def check_instability():
    unstable = solve_closed(parse("exists x in [-1, 1]. -x^2 >= 0"), budget=Budget(seconds=5.0))
    results = []
    for text, want in (("exists x in [-1, 1]. -x^2 >= -0.01", True),
                       ("exists x in [-1, 1]. -x^2 - 0.01 >= 0", False)):
        t = time.perf_counter()
        v = solve_closed(parse(text), budget=Budget(seconds=5.0))
        results.append((v.value is want, time.perf_counter() - t, v.label))
    ok = unstable.value is None and unstable.reason == "time" and all(r[0] and r[1] < 1.0 for r in results)
    detail = (f"unstable -> {unstable.label} ({unstable.reason}, {unstable.stats.seconds:.1f}s); "
              f"raised -> {results[0][2]} in {results[0][1]:.3f}s; lowered -> {results[1][2]} in {results[1][1]:.3f}s")
    return ok, detail


def test_criterion_6_instability(capsys):
    ok, detail = check_instability()
    report(capsys, 6, ok, detail)
    assert ok, detail


# -- criterion 7 ---------------------------------------------------------------

def _is_conjunctive(phi) -> bool:
    node = phi
    while isinstance(node, Quant):
        node = node.body
    return isinstance(node, And)


def check_invariance():
    problems = corpus_files()
    budget = Budget(seconds=5.0)
    rep = bench_run(problems, CONFIGS, budget)
    mismatches = compare_configs(rep)
    shadow_cfg = {"reuse/sh.cut shadow": PruneConfig(marks=True, shortcut=True, shadow=True)}
    shadow = bench_run(problems, shadow_cfg, budget)
    violations = sum(r.shadow_violations for r in shadow.rows)
    conj = {p.name for p in problems if _is_conjunctive(p.phi)}
    skipped = sum(r.skipped for r in shadow.rows if r.name in conj)
    ok = not mismatches and violations == 0 and skipped > 0
    detail = (f"{len(problems)} examples x {len(CONFIGS)} configs, {len(mismatches)} differences; "
              f"shadow violations {violations}; skipped_by_mark on conjunctive examples {skipped}")
    if mismatches:
        detail += "; " + "; ".join(mismatches[:3])
    return ok, detail


def test_criterion_7_improvement_invariance(capsys):
    ok, detail = check_invariance()
    report(capsys, 7, ok, detail)
    assert ok, detail


# -- criterion 8 ---------------------------------------------------------------

def check_fairness():
    phi = parse("x >= 0")
    bcs = [BoundedConstraint(phi, Box.of(x=(0, w))) for w in (100.0, 10.0, 1.0)]
    counts = [0, 0, 0]
    for _ in range(10_000):
        counts[pick(bcs, ["x"])] += 1
    ok = min(counts) >= 1000
    return ok, f"selections per bound {counts}"


def test_criterion_8_fairness(capsys):
    ok, detail = check_fairness()
    report(capsys, 8, ok, detail)
    assert ok, detail


# -- criterion 9 ---------------------------------------------------------------

def check_oracle_agreement():
    problems = [p for p in corpus_files() if p.name.startswith("random_")]
    agree = abstain = 0
    disagree = []
    for p in problems:
        assert not free_vars(p.phi)
        try:
            truth = grid_truth(p.phi, {}, GridSpec(40))
        except OracleAbstained:
            abstain += 1
            continue
        v = solve_closed(p.phi, SolverConfig(), Budget(seconds=30.0))
        if v.value is truth:
            agree += 1
        else:
            disagree.append(f"{p.name}: solver {v.label}, oracle {truth}")
    decided = agree + len(disagree)
    ok = len(problems) >= 50 and decided > 0 and not disagree
    detail = f"{len(problems)} instances, {agree}/{decided} agree, {abstain} abstained"
    if disagree:
        detail += "; " + "; ".join(disagree[:3])
    return ok, detail


def test_criterion_9_oracle_agreement(capsys):
    ok, detail = check_oracle_agreement()
    report(capsys, 9, ok, detail)
    assert ok, detail


CHECKS = [check_closed_examples, check_worked_example, check_laws, check_duality, check_circle,
          check_instability, check_invariance, check_fairness, check_oracle_agreement]


if __name__ == "__main__":
    for i, check in enumerate(CHECKS, 1):
        try:
            ok, detail = check()
        except Exception as exc:  # report and go on with the rest
            ok, detail = False, f"raised {exc!r}"
        report(None, i, ok, detail)
