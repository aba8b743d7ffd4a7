#!/usr/bin/env python3
"""Benchmark the verification hot kernels: numba vs pure numpy.

The window-oscillation sup is quadratic in grid points and dominates
verification runtime.  Run with FEJERFLOW_NUMBA=0 to force the numpy path;
this script times both from one process regardless of the flag.

Usage: python benchmarks/bench_kernels.py [n_points ...]
"""

import sys
import time

import numpy as np

from fejerflow import _kernels


def time_fn(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv):
    sizes = [int(a) for a in argv[1:]] or [256, 1024, 4096]
    rng = np.random.default_rng(0)
    print(f"numba available: {_kernels.using_numba()}")
    print(f"{'n':>8} {'kernel':>12} {'numpy':>12} {'speedup':>9}")
    for n in sizes:
        xs = np.ascontiguousarray(rng.normal(size=(n, 2)))
        n_np = time_fn(_kernels._pairwise_max_distance_numpy, xs)
        if _kernels.using_numba():
            _kernels._pairwise_max_distance_nb(xs)  # warm the jit
            n_nb = time_fn(_kernels._pairwise_max_distance_nb, xs)
            label, fast = "njit", n_nb
        else:
            label, fast = "numpy", n_np
        print(f"{n:>8} {fast * 1e3:>10.2f}ms {n_np * 1e3:>10.2f}ms "
              f"{n_np / fast:>8.1f}x   ({label})")

    h = rng.normal(size=100_000) ** 2
    g = rng.normal(size=100_000) ** 2
    z = np.zeros(100_000)
    t_np = time_fn(_kernels._prefix_min_violation_numpy, h, g, z, z)
    if _kernels.using_numba():
        _kernels._prefix_min_violation_nb(h, g, z, z)
        t_nb = time_fn(_kernels._prefix_min_violation_nb, h, g, z, z)
        print(f"prefix_min_violation (1e5): njit {t_nb * 1e3:.2f}ms "
              f"numpy {t_np * 1e3:.2f}ms ({t_np / t_nb:.1f}x)")
    else:
        print(f"prefix_min_violation (1e5): numpy {t_np * 1e3:.2f}ms")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
