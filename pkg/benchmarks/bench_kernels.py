"""Compare the compiled and numpy reachability backends on large grids.

The queue BFS (numba) and the frontier fixpoint (numpy) must return the
same closure; this script checks that and reports wall times, plus the
timing of the null-pair oracle under whichever backend ISOCAUSAL_NUMBA
selected for this process.

    python3 benchmarks/bench_kernels.py --repeats 5
"""

import argparse
import time

import numpy as np

from isocausal._kernels import backend, reach
from isocausal.algebra import null_oracle
from isocausal.fixtures import fixture
from isocausal.grid import node_index
from isocausal.lorentz import minkowski


def time_reach(grid, seed_point, backend_name, repeats):
    seeds = np.zeros(grid.shape, dtype=bool)
    seeds[node_index(grid, seed_point)] = True
    best = np.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = reach(grid.edges, seeds, grid.wrap, backend_name=backend_name)
        best = min(best, time.perf_counter() - t0)
    return out, best


def bench_reach(repeats):
    cases = [
        ("rect:2.5 (502x201)", fixture("rect:2.5").grid, (0.1, 0.5)),
        ("wedge (201x201)", fixture("wedge").grid, (1.0, -0.5)),
    ]
    print(f"{'grid':<22} {'numba':>10} {'numpy':>10} {'speedup':>9}  match")
    for label, grid, seed_point in cases:
        reach(grid.edges, np.zeros(grid.shape, dtype=bool), grid.wrap,
              backend_name="numba")  # compile outside the timer
        fast, t_nb = time_reach(grid, seed_point, "numba", repeats)
        slow, t_np = time_reach(grid, seed_point, "numpy", repeats)
        match = bool(np.array_equal(fast, slow))
        print(f"{label:<22} {t_nb * 1e3:>8.2f}ms {t_np * 1e3:>8.2f}ms "
              f"{t_np / t_nb:>8.1f}x  {match}")
        if not match:
            raise SystemExit("backend disagreement on " + label)


def bench_oracle(repeats):
    rng = np.random.default_rng(3)
    n = 4
    a = rng.normal(size=(n, n))
    g = a @ minkowski(n) @ a.T
    s = rng.normal(size=(n, n))
    T = s + s.T
    null_oracle(g, T, samples=64)  # warm the refiner
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        null_oracle(g, T, samples=4096, seed=42)
        best = min(best, time.perf_counter() - t0)
    print(f"\nnull_oracle 4096 samples, n=4, backend={backend()}: "
          f"{best * 1e3:.2f}ms")
    print("rerun with ISOCAUSAL_NUMBA=0 to time the numpy refiner")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats, best-of is reported")
    args = parser.parse_args()
    bench_reach(args.repeats)
    bench_oracle(args.repeats)


if __name__ == "__main__":
    main()
