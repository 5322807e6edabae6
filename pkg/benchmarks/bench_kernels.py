"""Compare the compiled transfer-product kernel against the pure-Python one.

Run:  python benchmarks/bench_kernels.py [n_segments ...]
"""

import sys
import time

import numpy as np

from canonsys import kernels


def make_chain(n, seed=0):
    rng = np.random.default_rng(seed)
    deltas = rng.uniform(0.1, 1.0, n)
    phis = rng.uniform(0.0, np.pi, n)
    kinds = np.zeros(n, dtype=np.uint8)
    hmats = np.zeros((n, 3))
    return deltas, phis, kinds, hmats


def time_impl(fn, args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    sizes = [int(float(a)) for a in sys.argv[1:]] or [1_000, 10_000, 100_000]
    z = 1j * 1e3
    print(f"compiled kernel available: {kernels.KERNEL_IMPL == 'cython'}")
    print(f"{'n':>9}  {'pure (s)':>10}  {'compiled (s)':>12}  {'speedup':>8}")
    for n in sizes:
        args = (*make_chain(n), z)
        t_py = time_impl(kernels._transfer_py.transfer_product, args)
        if kernels.KERNEL_IMPL == "cython":
            t_cy = time_impl(kernels.transfer_product, args)
            print(f"{n:>9}  {t_py:>10.5f}  {t_cy:>12.5f}  {t_py / t_cy:>7.1f}x")
        else:
            print(f"{n:>9}  {t_py:>10.5f}  {'-':>12}  {'-':>8}")


if __name__ == "__main__":
    main()
