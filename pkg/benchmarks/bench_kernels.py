"""Benchmark the JIT-compiled kernels against their fallback twins.

Usage:
    python benchmarks/bench_kernels.py [--keys 2000] [--trials 50] [--N 1500]

Runs both code paths in one process (the env flag is not needed here)
and reports wall times plus the speedup.  The numba rows include a
separate warm-up call so compilation does not pollute the timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from btreehist import kernels


def time_call(fn, *args, repeat: int = 3) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_series(N: int) -> list[tuple[str, float]]:
    rows = []
    impls = kernels.implementations()["series_ladder"]
    for name, fn in impls.items():
        mant = np.zeros(N + 1)
        expo = np.zeros(N + 1, dtype=np.int64)
        if name == "numba":
            fn(1, 50, np.zeros(51), np.zeros(51, dtype=np.int64))  # warm-up
        rows.append((name, time_call(fn, 1, N, mant, expo)))
    return rows


def bench_leaf_counts(keys: int, trials: int) -> list[tuple[str, float]]:
    rng = np.random.default_rng(0)
    perms = np.empty((trials, keys), dtype=np.int64)
    for i in range(trials):
        perms[i] = rng.permutation(keys)
    rows = []
    impls = kernels.implementations()["leaf_counts"]
    for name, fn in impls.items():
        out = np.zeros(trials, dtype=np.int64)
        if name == "numba":
            fn(perms[:1], 1, np.zeros(1, dtype=np.int64))  # warm-up
        rows.append((name, time_call(fn, perms, 1, out, repeat=1)))
    return rows


def report(title: str, rows: list[tuple[str, float]]) -> None:
    print(f"\n{title}")
    base = dict(rows).get("fallback")
    for name, t in rows:
        speedup = f"  ({base / t:.1f}x vs fallback)" if name == "numba" and base else ""
        print(f"  {name:10s} {t * 1e3:10.2f} ms{speedup}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--keys", type=int, default=2000)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--N", type=int, default=1500)
    args = ap.parse_args()

    print(f"numba available: {kernels.USING_NUMBA}")
    report(f"series ladder (m=1, N={args.N})", bench_series(args.N))
    report(
        f"B-tree leaf counts (m=1, {args.trials} trials x {args.keys} keys)",
        bench_leaf_counts(args.keys, args.trials),
    )


if __name__ == "__main__":
    main()
