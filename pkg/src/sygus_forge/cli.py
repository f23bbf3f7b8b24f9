"""Command-line entry point: solve one file, or time the max-of-n family."""
from __future__ import annotations

import argparse
import csv
import io
import re
import sys
import time
from dataclasses import dataclass

from .core import Limits, ResourceOut, SynthError
from .engine import STRATEGIES, NoSolution, Solution, solve
from .frontend import SygusSyntaxError, parse, print_solution
from .theory import find_counterexample

EXIT_SOLVED, EXIT_FAIL, EXIT_RESOURCE, EXIT_USAGE = 0, 1, 2, 3


@dataclass(frozen=True)
class RunReport:
    problem: str
    strategy: str
    outcome: str  # "solved", "no-solution" or "resource-out"
    seconds: float
    size: int | None = None
    iterations: int | None = None


def gen_max_n(n: int) -> str:
    """The max-of-n problem with the two-nonterminal linear grammar."""
    if n < 2:
        raise ValueError("max-of-n needs n >= 2")
    xs = [f"x{i}" for i in range(1, n + 1)]
    name = f"max{n}"
    call = f"({name} {' '.join(xs)})"
    params = " ".join(f"({x} Int)" for x in xs)
    lines = [
        "(set-logic LIA)",
        f"(synth-fun {name} ({params}) Int",
        f"  ((S Int ({' '.join(xs)} 0 1 (+ S S) (- S S) (ite C S S)))",
        "   (C Bool ((<= S S) (= S S) (and C C) (not C)))))",
        " ".join(f"(declare-var {x} Int)" for x in xs),
    ]
    lines += [f"(constraint (>= {call} {x}))" for x in xs]
    lines.append(f"(constraint (or {' '.join(f'(= {call} {x})' for x in xs)}))")
    lines.append("(check-synth)")
    return "\n".join(lines) + "\n"


def run_problem(problem, strategy: str, limits: Limits, problem_id: str = "",
                trace=None) -> tuple[RunReport, Solution | NoSolution | None]:
    start = time.perf_counter()
    try:
        res = solve(problem, strategy, limits, trace)
    except ResourceOut:
        return RunReport(problem_id, strategy, "resource-out", time.perf_counter() - start), None
    elapsed = time.perf_counter() - start
    if isinstance(res, NoSolution):
        return RunReport(problem_id, strategy, "no-solution", elapsed, None, res.iterations), res
    return RunReport(problem_id, strategy, "solved", elapsed, res.size, res.iterations), res


def _parse_range(spec: str) -> tuple[int, int]:
    m = re.fullmatch(r"max:(\d+)\.\.(\d+)", spec)
    if not m:
        raise ValueError(f"expected max:<lo>..<hi>, got {spec!r}")
    lo, hi = int(m.group(1)), int(m.group(2))
    if lo < 2 or hi < lo:
        raise ValueError(f"bad range {spec!r}")
    return lo, hi


def bench(ns, strategies, limits: Limits) -> list[RunReport]:
    reports = []
    for strategy in strategies:
        for n in ns:
            report, _ = run_problem(parse(gen_max_n(n)), strategy, limits, f"max{n}")
            reports.append(report)
    return reports


def format_table(reports: list[RunReport], ns, strategies) -> str:
    """One row per strategy, one column per n; `--` marks a cell that did not solve."""
    if not strategies:
        return ""
    cells = {(r.strategy, r.problem): r for r in reports}
    header = ["strategy"] + [f"n={n}" for n in ns]
    rows = [header]
    for s in strategies:
        row = [s]
        for n in ns:
            r = cells.get((s, f"max{n}"))
            row.append(f"{r.seconds:.2f}" if r is not None and r.outcome == "solved" else "--")
        rows.append(row)
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in rows) + "\n"


def format_csv(reports: list[RunReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "strategy", "outcome", "seconds", "size"])
    for r in reports:
        w.writerow([r.problem[3:], r.strategy, r.outcome, f"{r.seconds:.4f}",
                    "" if r.size is None else r.size])
    return buf.getvalue()


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sygus-forge", description=__doc__)
    ap.add_argument("file", nargs="?", help="problem file ('-' for stdin)")
    ap.add_argument("--strategy", default="auto",
                    help="one of auto, si, si-r, cegis, portfolio; a comma list with --bench")
    ap.add_argument("--timeout", type=float, default=60.0, help="seconds per run")
    ap.add_argument("--max-size", type=int, default=8, help="cegis program size cap")
    ap.add_argument("--trace", action="store_true", help="per-iteration lines on stderr")
    ap.add_argument("--bench", metavar="max:LO..HI", help="time the max-of-n family")
    ap.add_argument("--csv", metavar="PATH", help="with --bench, also write results as CSV")
    return ap


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    limits = Limits(timeout=args.timeout, max_size=args.max_size)

    if args.bench:
        try:
            lo, hi = _parse_range(args.bench)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        strategies = [s for s in args.strategy.split(",") if s]
        bad = [s for s in strategies if s not in STRATEGIES]
        if bad:
            print(f"error: unknown strategy {bad[0]}", file=sys.stderr)
            return EXIT_USAGE
        ns = list(range(lo, hi + 1))
        reports = bench(ns, strategies, limits)
        sys.stdout.write(format_table(reports, ns, strategies))
        if args.csv:
            with open(args.csv, "w") as fh:
                fh.write(format_csv(reports))
        return EXIT_SOLVED

    if args.file is None:
        ap.print_usage(sys.stderr)
        print("error: a problem file is required", file=sys.stderr)
        return EXIT_USAGE
    if args.strategy not in STRATEGIES:
        print(f"error: unknown strategy {args.strategy}", file=sys.stderr)
        return EXIT_USAGE
    try:
        text = sys.stdin.read() if args.file == "-" else open(args.file).read()
        problem = parse(text)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SygusSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    def trace(line: str) -> None:
        print(line, file=sys.stderr, flush=True)

    try:
        report, res = run_problem(problem, args.strategy, limits, args.file,
                                  trace if args.trace else None)
    except SynthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if report.outcome == "resource-out":
        print("error: resource limit reached", file=sys.stderr)
        return EXIT_RESOURCE
    if report.outcome == "no-solution":
        print("(fail)")
        return EXIT_FAIL
    # never print an unverified solution
    if find_counterexample(res.fn, problem, Limits(timeout=args.timeout)) is not None:
        print("error: internal error, solution failed verification", file=sys.stderr)
        return EXIT_USAGE
    print(print_solution(problem, res.fn))
    return EXIT_SOLVED


if __name__ == "__main__":
    sys.exit(main())
