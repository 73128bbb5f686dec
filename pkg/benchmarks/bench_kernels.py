"""Time the compiled kernels against the pure-Python fallback.

Usage::

    python benchmarks/bench_kernels.py --states 5 --repeat 3
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from cvtelefid import kernels
from cvtelefid.optimize import oracle_starts
from cvtelefid.state import invariants, random_asymmetric_cm


def _timed(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def bench(states: int, repeat: int, starts: int) -> list:
    mods = kernels.backends()
    cases = [random_asymmetric_cm(seed) for seed in range(states)]
    invs = [invariants(V) for V in cases]
    tasks = {
        "lambda_roots (eta=1)": lambda m: [m.lambda_roots(1.0, i.a, i.b, i.c2_signed, i.v) for i in invs],
        "interior_candidates": lambda m: [m.interior_candidates(i.a, i.b, i.c2_signed, i.v) for i in invs],
        f"oracle_search ({starts} starts)": lambda m: [m.oracle_search(V.V, oracle_starts(0, starts))[0] for V in cases],
    }
    rows = []
    for label, task in tasks.items():
        timing = {}
        outputs = {}
        for name, mod in mods.items():
            timing[name], outputs[name] = _timed(lambda: task(mod), repeat)
        if "compiled" in outputs:
            for p, c in zip(outputs["python"], outputs["compiled"]):
                np.testing.assert_allclose(np.asarray(p, float), np.asarray(c, float), rtol=1e-7, atol=1e-9)
        rows.append((label, timing))
    return rows


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--states", type=int, default=5)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--starts", type=int, default=4)
    args = p.parse_args(argv)
    rows = bench(args.states, args.repeat, args.starts)
    print(f"active backend: {kernels.BACKEND}; {args.states} states, median of {args.repeat}")
    print(f"{'kernel':<28}{'python [s]':>12}{'compiled [s]':>14}{'speed-up':>10}")
    for label, t in rows:
        if "compiled" in t:
            print(f"{label:<28}{t['python']:>12.4f}{t['compiled']:>14.4f}{t['python'] / t['compiled']:>9.1f}x")
        else:
            print(f"{label:<28}{t['python']:>12.4f}{'n/a':>14}{'':>10}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
