#!/usr/bin/env python3
"""Compare the numba kernels against the numpy fallback.

Usage:
    python3 benchmarks/benchmark_kernels.py [--n 2000] [--reps 200]

The workload mirrors a Monte Carlo replication: sorted covariates, one
pass of suffix sums, then per-candidate fits.  Timings are the median of
5 rounds after a warm-up call (the warm-up also absorbs JIT compilation,
so what is measured is steady-state throughput).
"""

import argparse
import statistics
import time

import numpy as np

from lintail import _kernels


def make_workload(n, seed=0):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0.0, 1.0, n))
    y = 1.0 + 2.0 * x + 0.05 * rng.standard_normal(n)
    starts = np.unique(x, return_index=True)[1].astype(np.int64)
    counts = (n - starts).astype(np.float64)
    return x, y, starts, counts


def time_fn(fn, reps):
    rounds = []
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(reps):
            fn()
        rounds.append((time.perf_counter() - t0) / reps)
    return statistics.median(rounds)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000, help="sample size")
    ap.add_argument("--reps", type=int, default=200, help="calls per round")
    args = ap.parse_args()

    if not _kernels.NUMBA_OK:
        print("numba is not importable; nothing to compare against")
        return 1

    x, y, starts, counts = make_workload(args.n)
    sums = _kernels.suffix_sums_numpy(x, y)
    fit_args = (starts, counts, *sums, 1e-12)

    cases = [
        ("suffix_sums", lambda: _kernels.suffix_sums_numpy(x, y),
         lambda: _kernels.suffix_sums_numba(x, y)),
        ("candidate_fits", lambda: _kernels.candidate_fits_numpy(*fit_args),
         lambda: _kernels.candidate_fits_numba(*fit_args)),
    ]

    print(f"n={args.n}, {args.reps} calls per round, median of 5 rounds")
    print(f"{'kernel':<16}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for name, f_np, f_nb in cases:
        f_np()
        f_nb()  # warm-up, includes JIT compilation
        t_np = time_fn(f_np, args.reps)
        t_nb = time_fn(f_nb, args.reps)
        print(
            f"{name:<16}{t_np * 1e6:>10.1f}us{t_nb * 1e6:>10.1f}us"
            f"{t_np / t_nb:>9.2f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
