"""Benchmark harness: run a corpus under the marks/shortcut configurations.

Every example is proved (closed constraints) or paved (open ones) once per
configuration.  The report lists time, atomic hits and boxes per run, with
``inf`` standing for a run that exhausted its budget.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .interval import Box
from .parser import ProblemFile, load_file, parse_file_text
from .prune import PruneConfig
from .solver import Budget, Paving, SolverConfig, pave, solve_closed

CONFIGS: dict[str, PruneConfig] = {
    "no reuse/no sh.cut": PruneConfig(marks=False, shortcut=False),
    "no reuse/sh.cut": PruneConfig(marks=False, shortcut=True),
    "reuse/no sh.cut": PruneConfig(marks=True, shortcut=False),
    "reuse/sh.cut": PruneConfig(marks=True, shortcut=True),
}

SUFFIX = ".qs"


@dataclass
class BenchRow:
    name: str
    config: str
    expect: str | None
    verdict: str
    seconds: float
    hits: int
    boxes: int
    skipped: int = 0
    shadow_violations: int = 0
    paving: Paving | None = field(default=None, repr=False)

    @property
    def exhausted(self) -> bool:
        if self.paving is not None:
            return not self.paving.complete
        return self.verdict == "unknown"


@dataclass
class BenchReport:
    rows: list[BenchRow]

    def by_example(self) -> dict[str, list[BenchRow]]:
        out: dict[str, list[BenchRow]] = {}
        for r in self.rows:
            out.setdefault(r.name, []).append(r)
        return out

    def text(self) -> str:
        head = ("example", "config", "expect", "verdict", "time", "hits", "boxes")
        body = []
        for r in self.rows:
            t = "inf" if r.exhausted else f"{r.seconds:.3f}"
            body.append((r.name, r.config, r.expect or "-", r.verdict, t, str(r.hits), str(r.boxes)))
        widths = [max(len(row[i]) for row in [head] + body) for i in range(len(head))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in [head] + body]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"

    def csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["example", "config", "expect", "verdict", "seconds", "hits", "boxes",
                    "skipped_by_mark", "shadow_violations"])
        for r in self.rows:
            secs = "inf" if r.exhausted else f"{r.seconds:.6f}"
            w.writerow([r.name, r.config, r.expect or "", r.verdict, secs, r.hits, r.boxes,
                        r.skipped, r.shadow_violations])
        return out.getvalue()


def corpus_files(directory=None) -> list[ProblemFile]:
    """Load every ``*.qs`` file of ``directory``, or the bundled corpus."""
    if directory is not None:
        paths = sorted(Path(directory).glob(f"*{SUFFIX}"))
        return [load_file(p) for p in paths]
    root = resources.files("qsolve") / "corpus"
    items = sorted((p for p in root.iterdir() if p.name.endswith(SUFFIX)), key=lambda p: p.name)
    return [parse_file_text(p.read_text(), p.name[: -len(SUFFIX)]) for p in items]


def run_one(problem: ProblemFile, config: str, cfg: PruneConfig, budget: Budget) -> BenchRow:
    scfg = SolverConfig(prune=cfg)
    if problem.expect == "pave" or problem.box is not None:
        if problem.box is None:
            raise ValueError(f"{problem.name}: paving example needs a '# box:' header")
        eps = problem.epsilon if problem.epsilon is not None else 0.1
        p = pave(problem.phi, problem.box, eps, scfg, budget)
        st = p.stats
        verdict = "paved" if p.complete else "unknown"
        return BenchRow(problem.name, config, problem.expect, verdict, st.seconds, st.hits, st.boxes,
                        st.prune.skipped_by_mark, st.prune.shadow_violations, p)
    v = solve_closed(problem.phi, scfg, budget)
    st = v.stats
    return BenchRow(problem.name, config, problem.expect, v.label, st.seconds, st.hits, st.boxes,
                    st.prune.skipped_by_mark, st.prune.shadow_violations)


def bench_run(problems: list[ProblemFile], configs: dict[str, PruneConfig] | None = None,
              budget: Budget | None = None) -> BenchReport:
    configs = configs if configs is not None else CONFIGS
    budget = budget or Budget(seconds=60.0)
    rows = []
    for prob in problems:
        for name, cfg in configs.items():
            rows.append(run_one(prob, name, cfg, budget))
    return BenchReport(rows)


# -- comparing pavings as point sets ------------------------------------------

def symmetric_difference_volume(a: list[Box], b: list[Box], names: list[str]) -> float:
    """Volume of (union a) xor (union b), by coordinate compression."""
    boxes = [x for x in a + b if not x.is_empty]
    if not boxes:
        return 0.0
    cuts = []
    for n in names:
        pts = sorted({x[n].lo for x in boxes} | {x[n].hi for x in boxes})
        cuts.append(np.array(pts))
    shape = tuple(max(len(c) - 1, 1) for c in cuts)

    def cover(group: list[Box]) -> np.ndarray:
        m = np.zeros(shape, dtype=bool)
        for x in group:
            if x.is_empty:
                continue
            idx = tuple(
                slice(int(np.searchsorted(c, x[n].lo)), int(np.searchsorted(c, x[n].hi)))
                for c, n in zip(cuts, names)
            )
            m[idx] = True
        return m

    diff = cover(a) ^ cover(b)
    cell = np.ones(shape)
    for axis, c in enumerate(cuts):
        w = np.diff(c) if len(c) > 1 else np.zeros(1)
        sh = [1] * len(shape)
        sh[axis] = len(w)
        cell = cell * w.reshape(sh)
    return float(np.sum(cell[diff]))


def compare_configs(report: BenchReport, tol: float = 1e-9) -> list[str]:
    """Differences between configurations: verdicts and paving point sets."""
    problems = []
    for name, rows in report.by_example().items():
        ref = rows[0]
        for r in rows[1:]:
            if r.verdict != ref.verdict:
                problems.append(f"{name}: verdict {ref.verdict} under {ref.config}, {r.verdict} under {r.config}")
                continue
            if ref.paving is None or r.paving is None:
                continue
            names = ref.paving.names
            for kind in ("Y", "N"):
                a = getattr(ref.paving, kind)
                b = getattr(r.paving, kind)
                d = symmetric_difference_volume(a, b, names)
                if d >= tol:
                    problems.append(f"{name}: {kind} differs by volume {d:.3g} between {ref.config} and {r.config}")
    return problems
