"""Timing comparison of the compiled kernels against the numpy fallback.

Run as `python benchmarks/bench_kernels.py`.  Workloads mirror the hot
spots of the test and acceptance suites: the one-step transform on small
dense tables, capacity evaluation, and the batched simplex sweeps.
"""

import time

import numpy as np

from qpolar import _kernels_py

try:
    from qpolar import _kernels
except ImportError:
    _kernels = None


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads():
    rng = np.random.default_rng(1)
    small = rng.dirichlet(np.ones(8), size=5)
    big = rng.dirichlet(np.ones(4096), size=5)
    mass7 = rng.dirichlet(np.ones(7), size=100_000)
    mass7b = rng.dirichlet(np.ones(7), size=100_000)
    posts = rng.dirichlet(np.ones(5), size=64)
    weights = np.full(64, 1.0 / 64)
    return [
        ("split 5x8 table x1000", 5,
         lambda impl: [impl.split_tables(small, small) for _ in range(1000)]),
        ("capacity 5x4096 x100", 5,
         lambda impl: [impl.capacity_nats(big) for _ in range(100)]),
        ("entropy 100k x q=7", 5,
         lambda impl: impl.entropy_nats(mass7)),
        ("min shift L1 100k x q=7", 5,
         lambda impl: impl.min_shift_l1(mass7)),
        ("convolve pairs 100k x q=7", 5,
         lambda impl: impl.convolve_pairs(mass7, mass7b)),
        ("mixture entropy 64x64 x20", 5,
         lambda impl: [impl.mixture_convolution_entropy_nats(
             weights, posts, weights, posts) for _ in range(20)]),
    ]


def main():
    if _kernels is None:
        print("compiled kernels not built; timing the numpy fallback only")
    rows = []
    for name, repeats, job in workloads():
        py_t = _time(lambda: job(_kernels_py), repeats)
        if _kernels is not None:
            c_t = _time(lambda: job(_kernels), repeats)
            rows.append((name, py_t, c_t, py_t / c_t))
        else:
            rows.append((name, py_t, None, None))
    print(f"{'workload':<30} {'numpy':>10} {'compiled':>10} {'speedup':>8}")
    for name, py_t, c_t, ratio in rows:
        if c_t is None:
            print(f"{name:<30} {py_t * 1e3:>8.2f}ms {'-':>10} {'-':>8}")
        else:
            print(f"{name:<30} {py_t * 1e3:>8.2f}ms {c_t * 1e3:>8.2f}ms "
                  f"{ratio:>7.1f}x")


if __name__ == "__main__":
    main()
