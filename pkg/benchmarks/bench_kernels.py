"""Compare the compiled and pure-Python point-evaluation backends.

Part 1 times `check_points` directly on the max-of-n specification with a
correct candidate, so every point is evaluated.  Part 2 times an
enumerative run in subprocesses, with and without SYGUS_FORGE_PURE: cegis on
max-of-n capped below the solution size, so every program up to the cap is
filtered against the stored counterexamples before the run gives up.

    python benchmarks/bench_kernels.py [--points 10 100 1000] [--repeat 5]
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from sygus_forge import kernel
from sygus_forge.cli import gen_max_n
from sygus_forge.core import Lambda
from sygus_forge.frontend import parse, parse_term
from sygus_forge.kernel import PointSet, check_points, compile_lambda, compile_term


def max_lambda(p, n: int) -> Lambda:
    body = "x1"
    for i in range(2, n + 1):
        body = f"(ite (<= {body} x{i}) x{i} {body})"
    return Lambda(p.target.params, parse_term(body, dict(p.target.params)))


def micro(ns, counts, repeat: int) -> list[tuple]:
    rows = []
    rng = np.random.default_rng(0)
    for n in ns:
        p = parse(gen_max_n(n))
        names = [v for v, _ in p.universals]
        spec = compile_term(p.spec, {v: i for i, v in enumerate(names)}, p.target.name)
        fun = compile_lambda(max_lambda(p, n))
        for count in counts:
            ps = PointSet(n)
            for row in rng.integers(-1000, 1000, size=(count, n)):
                ps.add(row)
            times = {}
            for backend in ("python", "compiled"):
                if backend == "compiled" and kernel.BACKEND != "compiled":
                    continue
                assert check_points(spec, fun, ps, backend=backend) == -1
                t = min(timeit.repeat(lambda: check_points(spec, fun, ps, backend=backend),
                                      number=1, repeat=repeat))
                times[backend] = t
            rows.append((n, count, times.get("python"), times.get("compiled")))
    return rows


END_TO_END = """
import time
from sygus_forge.cli import gen_max_n
from sygus_forge.core import Limits, ResourceOut
from sygus_forge.engine import solve
from sygus_forge.frontend import parse
from sygus_forge import kernel
p = parse(gen_max_n({n}))
t = time.perf_counter()
try:
    solve(p, "cegis", Limits(timeout=600, max_size={cap}))
except ResourceOut:
    pass
print(kernel.BACKEND, time.perf_counter() - t)
"""


def end_to_end(n: int, cap: int) -> list[tuple[str, float]]:
    out = []
    for pure in (True, False):
        env = dict(os.environ)
        env.pop("SYGUS_FORGE_PURE", None)
        if pure:
            env["SYGUS_FORGE_PURE"] = "1"
        res = subprocess.run([sys.executable, "-c", END_TO_END.format(n=n, cap=cap)], env=env,
                             capture_output=True, text=True, check=True)
        backend, secs = res.stdout.split()
        out.append((backend, float(secs)))
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[2, 4])
    ap.add_argument("--points", type=int, nargs="+", default=[10, 100, 1000, 10000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--cegis-n", type=int, default=3, help="max-of-n size for the end-to-end run")
    ap.add_argument("--cap", type=int, default=3, help="program size cap for the end-to-end run")
    args = ap.parse_args(argv)

    print(f"default backend: {kernel.BACKEND}")
    print(f"{'n':>3} {'points':>7} {'python s':>10} {'compiled s':>11} {'speedup':>8}")
    for n, count, tp, tc in micro(args.n, args.points, args.repeat):
        tc_s = f"{tc:.6f}" if tc is not None else "n/a"
        sp = f"{tp / tc:.1f}x" if tc else "n/a"
        print(f"{n:>3} {count:>7} {tp:>10.6f} {tc_s:>11} {sp:>8}")
    print(f"\ncegis on max{args.cegis_n}, all programs up to size {args.cap}:")
    for backend, secs in end_to_end(args.cegis_n, args.cap):
        print(f"  {backend:>8}: {secs:.3f}s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
