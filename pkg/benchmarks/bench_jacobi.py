"""Benchmark the compiled and pure-numpy Jacobi sweep backends.

The one-sided Jacobi SVD is the package's only hand-written hot loop; this
script times both backends on square triangular factors of the sizes the
factorization actually produces, plus LAPACK's divide-and-conquer SVD as a
reference point.

Usage::

    python benchmarks/bench_jacobi.py [--sizes 50,100,200,331]
"""

import argparse
import os
import time

import numpy as np


def time_call(fn, *args, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="50,100,200,331")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    from sketchsvd import jacobi_svd
    from sketchsvd._jacobi import _HAVE_NUMBA

    if not _HAVE_NUMBA:
        print("numba not importable; only the numpy backend will run")

    # triangular factors like the ones the sketched factorization feeds in
    mats = {}
    for n in sizes:
        rng = np.random.default_rng(n)
        mats[n] = np.triu(rng.standard_normal((n, n)))

    # warm both paths (first numba call compiles)
    os.environ.pop("SKETCHSVD_NO_NUMBA", None)
    jacobi_svd(mats[sizes[0]])
    os.environ["SKETCHSVD_NO_NUMBA"] = "1"
    jacobi_svd(mats[sizes[0]])

    print(f"{'n':>6} {'numba (s)':>12} {'numpy (s)':>12} {'speedup':>9} {'lapack (s)':>12}")
    for n in sizes:
        X = mats[n]
        os.environ.pop("SKETCHSVD_NO_NUMBA", None)
        t_numba = time_call(jacobi_svd, X, repeats=args.repeats) if _HAVE_NUMBA else np.nan
        os.environ["SKETCHSVD_NO_NUMBA"] = "1"
        t_numpy = time_call(jacobi_svd, X, repeats=args.repeats)
        os.environ.pop("SKETCHSVD_NO_NUMBA", None)
        t_lapack = time_call(np.linalg.svd, X, repeats=args.repeats)
        speedup = t_numpy / t_numba if t_numba == t_numba else np.nan
        print(f"{n:>6} {t_numba:>12.4f} {t_numpy:>12.4f} {speedup:>8.1f}x {t_lapack:>12.4f}")


if __name__ == "__main__":
    main()
