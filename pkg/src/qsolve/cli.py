"""Command line entry point: ``qsolve prove | pave | bench``.

Exit codes: 0 proved or paved, 1 disproved, 2 budget exhausted, 3 bad input.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .bench import CONFIGS, bench_run, compare_configs, corpus_files
from .constraint import free_vars
from .emit import FORMATS, emit_boxes, emit_svg
from .parser import ParseError, load_file, parse_box
from .prune import PruneConfig
from .solver import Budget, SolverConfig, pave, solve_closed

EXIT_OK, EXIT_FALSE, EXIT_BUDGET, EXIT_INPUT = 0, 1, 2, 3


class InputError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    # usage errors are input errors; argparse would exit with 2
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _budget(args) -> Budget:
    return Budget(seconds=args.budget_secs, max_hits=args.max_hits, max_boxes=args.max_boxes)


def _config(args) -> SolverConfig:
    return SolverConfig(prune=PruneConfig(marks=not args.no_marks, shortcut=not args.no_shortcut))


def _load(path: str):
    try:
        return load_file(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except ParseError as exc:
        raise InputError(f"{path}: {exc}") from exc
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_prove(args) -> int:
    prob = _load(args.file)
    fv = free_vars(prob.phi)
    if fv:
        raise InputError(f"{args.file}: free variables {', '.join(sorted(fv))}; use 'pave' for open constraints")
    v = solve_closed(prob.phi, _config(args), _budget(args))
    st = v.stats
    print("unknown (budget)" if v.value is None else v.label)
    print(f"hits={st.hits} boxes={st.boxes} time={st.seconds:.3f}")
    if v.value is None:
        return EXIT_BUDGET
    return EXIT_OK if v.value else EXIT_FALSE


def cmd_pave(args) -> int:
    prob = _load(args.file)
    try:
        box = parse_box(args.box) if args.box else prob.box
    except ValueError as exc:
        raise InputError(f"--box: {exc}") from exc
    if box is None:
        raise InputError("no box given; pass --box or add a '# box:' header")
    eps = args.epsilon if args.epsilon is not None else prob.epsilon
    if eps is None or eps <= 0:
        raise InputError("epsilon must be a positive number (--epsilon or '# epsilon:' header)")
    axes = None
    if args.svg:
        axes = [a.strip() for a in (args.axes or "").split(",") if a.strip()]
        if len(axes) != 2:
            raise InputError("--svg needs --axes x,y naming two variables")
        unknown = [a for a in axes if a not in box.vars()]
        if unknown:
            raise InputError(f"--axes names variables not in the box: {', '.join(unknown)}")
    try:
        p = pave(prob.phi, box, eps, _config(args), _budget(args))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    records = p.records()
    sys.stdout.write(emit_boxes(records, args.format, p.names))
    if args.svg:
        Path(args.svg).write_text(emit_svg(records, axes[0], axes[1]))
    st = p.stats
    print(
        f"Y={p.volume('Y'):.6g} N={p.volume('N'):.6g} U={p.volume('U'):.6g} "
        f"hits={st.hits} boxes={st.boxes} time={st.seconds:.3f}",
        file=sys.stderr,
    )
    return EXIT_OK if p.complete else EXIT_BUDGET


def cmd_bench(args) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        raise InputError(f"{directory} is not a directory")
    try:
        problems = corpus_files(directory)
    except (ParseError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    if not problems:
        raise InputError(f"no *.qs files in {directory}")
    report = bench_run(problems, CONFIGS, _budget(args))
    sys.stdout.write(report.text())
    if args.csv:
        Path(args.csv).write_text(report.csv())
    for line in compare_configs(report):
        print(f"config mismatch: {line}", file=sys.stderr)
    return EXIT_OK


def _budget_flags(p: argparse.ArgumentParser, secs: float) -> None:
    p.add_argument("--budget-secs", type=float, default=secs, help="wall-clock limit per run")
    p.add_argument("--max-hits", type=int, default=Budget.max_hits, help="limit on atomic narrowing calls")
    p.add_argument("--max-boxes", type=int, default=Budget.max_boxes, help="limit on boxes created")


def build_parser() -> argparse.ArgumentParser:
    ap = _ArgumentParser(prog="qsolve", description="Solve quantified inequality constraints over the reals.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prove", help="decide a closed constraint")
    p.add_argument("file")
    _budget_flags(p, Budget.seconds)
    p.add_argument("--no-marks", action="store_true", help="disable reuse of atomic narrowing results")
    p.add_argument("--no-shortcut", action="store_true", help="always prune every disjunct")
    p.add_argument("--trace", action="store_true", help="log branching decisions to stderr")
    p.set_defaults(run=cmd_prove)

    p = sub.add_parser("pave", help="cover a box by true, false and undecided boxes")
    p.add_argument("file")
    p.add_argument("--box", help='bounds of the free variables, e.g. "x=[-2,2];y=[-2,2]"')
    p.add_argument("--epsilon", type=float, help="stop when the undecided volume is below this")
    p.add_argument("--format", choices=FORMATS, default="jsonl")
    p.add_argument("--svg", metavar="OUT", help="also draw the paving")
    p.add_argument("--axes", help="two variables for the picture, e.g. x,y")
    _budget_flags(p, Budget.seconds)
    p.add_argument("--no-marks", action="store_true")
    p.add_argument("--no-shortcut", action="store_true")
    p.add_argument("--trace", action="store_true")
    p.set_defaults(run=cmd_pave)

    p = sub.add_parser("bench", help="run every *.qs file of a directory under all configurations")
    p.add_argument("dir")
    p.add_argument("--csv", metavar="OUT", help="write the report as CSV too")
    _budget_flags(p, 60.0)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(run=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.trace else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.run(args)
    except InputError as exc:
        print(f"qsolve: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
