"""Compare the compiled kernels against the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py``.  Prints one line per kernel
and workload with the best-of-N time of each implementation and the speedup.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from time4lab import _kernels_py

try:
    from time4lab import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def assignment_workloads():
    yield "6 items / 3 edges", ([3, 3, 2, 2, 1, 1], 3, 6)
    yield "9 items / 4 edges", ([4, 4, 3, 3, 2, 2, 2, 1, 1], 4, 6)
    yield "11 items / 4 edges", ([5, 4, 4, 3, 3, 3, 2, 2, 1, 1, 1], 4, 8)


def excess_workloads():
    rng = np.random.default_rng(7)
    for rows, edges in ((200, 8), (2_000, 34), (20_000, 34)):
        times = np.cumsum(rng.integers(1, 1_000_000, rows + 1)).astype(np.int64)
        loads = rng.integers(0, 20, (rows, edges)).astype(np.int64)
        caps = np.full(edges, 10, dtype=np.int64)
        yield f"{rows} segments x {edges} edges", (times, loads, caps)


def best_of(func, args, repeat: int) -> float:
    timer = timeit.Timer(lambda: func(*args))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _compiled is None:
        print("compiled extension not available; only the fallback can be timed")
    print(f"{'kernel':<22} {'workload':<26} {'python':>12} {'cython':>12} {'speedup':>8}")
    cases = [("lossless_assignments", name, a) for name, a in assignment_workloads()]
    cases += [("excess_integral", name, a) for name, a in excess_workloads()]
    for kernel, name, kargs in cases:
        py = best_of(getattr(_kernels_py, kernel), kargs, args.repeat)
        if _compiled is not None:
            cy = best_of(getattr(_compiled, kernel), kargs, args.repeat)
            fast, slow = getattr(_compiled, kernel)(*kargs), getattr(_kernels_py, kernel)(*kargs)
            same = fast == slow if kernel == "lossless_assignments" else np.isclose(fast, slow, rtol=1e-12)
            if not same:
                raise SystemExit(f"{kernel}: implementations disagree on {name}")
            print(f"{kernel:<22} {name:<26} {py * 1e3:>10.3f}ms {cy * 1e3:>10.3f}ms {py / cy:>7.1f}x")
        else:
            print(f"{kernel:<22} {name:<26} {py * 1e3:>10.3f}ms {'-':>12} {'-':>8}")


if __name__ == "__main__":
    main()
