"""Weighted enumeration of reduced historic trees and B-tree leaf statistics.

Weighting each reduced tree by the number of key permutations realising
its history turns the counting series into the permutation-counting
series: the total weight at n vertices is (n+m)!, the number of ways to
insert n+m keys.  Marking external-vertex counts with a second variable
u gives, coefficient by coefficient, the exact distribution of the leaf
count of a B-tree built from uniformly random keys.  The recurrence is
the same stem decomposition as for plain counts, with the branching
factor (2m+1)!/(m!)^2 attached to every stem:

    w_{n+m+1}(u) = (2m+1)!/(m!)^2 * sum_k C(n,k) w_k(u) w_{n-k}(u),
    w_i(u) = (m+i)! u                       for 0 <= i <= m.

Everything exact runs on integer polynomials and Fractions; the Monte
Carlo harness drives the flat-array kernel over seeded permutations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Sequence

import numpy as np

from . import kernels
from .historic import HistoricTree, ReducedHistoricTree, branchings, s_values


def harmonic(k: int) -> Fraction:
    """H_k = 1 + 1/2 + ... + 1/k as an exact rational."""
    return sum((Fraction(1, i) for i in range(1, k + 1)), Fraction(0))


def tree_weight(t: HistoricTree | ReducedHistoricTree) -> int:
    """Number of key permutations realising the history of ``t``.

    Branching-free trees absorb every insertion order of their keys; a
    reduced tree on n vertices stands for a history of n+m keys.
    """
    m = t.m
    b = len(branchings(t))
    if b == 0:
        extra = m if isinstance(t, ReducedHistoricTree) else 0
        return factorial(t.n + extra)
    per_branching = factorial(2 * m + 1) // factorial(m) ** 2
    w = per_branching**b
    for s in s_values(t):
        w *= factorial(m + s)
    return w


def external_count(t: HistoricTree | ReducedHistoricTree) -> int:
    from .historic import external_slots

    return len(external_slots(t))


@dataclass(frozen=True)
class WeightedSeriesTable:
    """coefficients[n][e] = total weight of reduced trees with n vertices
    and e external vertices; row sums are (n+m)!."""

    m: int
    coefficients: tuple[tuple[int, ...], ...]

    def total(self, n: int) -> int:
        return sum(self.coefficients[n])

    def __len__(self) -> int:
        return len(self.coefficients)


def bivariate_counts(m: int, N: int) -> WeightedSeriesTable:
    """Exact weighted series w_0(u)..w_N(u), one integer polynomial each."""
    if m < 1 or N < 0:
        raise ValueError("need m >= 1 and N >= 0")
    big_c = factorial(2 * m + 1) // factorial(m) ** 2
    polys: list[list[int]] = [[0, factorial(m + i)] for i in range(min(m, N) + 1)]
    row = [1]
    for n in range(N - m):
        acc = [0] * (max(len(polys[k]) + len(polys[n - k]) for k in range(n + 1)) - 1)
        for k in range((n + 1) // 2 + (n + 1) % 2):
            j = n - k
            scale = row[k] if k == j else 2 * row[k]
            p, q = polys[k], polys[j]
            for i, a in enumerate(p):
                if a:
                    ai = a * scale
                    for jj, bcoef in enumerate(q):
                        if bcoef:
                            acc[i + jj] += ai * bcoef
        polys.append([big_c * c for c in acc])
        row = [1] + [row[i] + row[i + 1] for i in range(n)] + [1]
    return WeightedSeriesTable(m, tuple(tuple(p) for p in polys))


@dataclass(frozen=True)
class LeafMoments:
    m: int
    key_count: int
    mean: Fraction
    variance: Fraction
    distribution: dict[int, Fraction] | None = None


def leaf_moments(
    m: int, key_count: int, with_distribution: bool = False
) -> LeafMoments:
    """Exact mean and variance of the leaf count of a B-tree of order
    2m+1 built from ``key_count`` uniformly random keys."""
    if key_count < 1:
        raise ValueError("need at least one key")
    if key_count < m:
        # below the reduced range the tree is a single node, hence one leaf
        dist = {1: Fraction(1)} if with_distribution else None
        return LeafMoments(m, key_count, Fraction(1), Fraction(0), dist)
    n = key_count - m
    poly = bivariate_counts(m, n).coefficients[n]
    total = factorial(key_count)
    mean = Fraction(sum(e * c for e, c in enumerate(poly)), total)
    second = Fraction(sum(e * e * c for e, c in enumerate(poly)), total)
    dist = None
    if with_distribution:
        dist = {e: Fraction(c, total) for e, c in enumerate(poly) if c}
    return LeafMoments(m, key_count, mean, second - mean * mean, dist)


def mean_ratio_trend(m: int, N: int) -> list[Fraction]:
    """mean_n / (n+m+1) for n = 0..N, exact; the limit is kappa(m).value."""
    if N < m + 1:
        raise ValueError("need N >= m+1 for a non-degenerate trend")
    table = bivariate_counts(m, N)
    out = []
    for n in range(N + 1):
        weighted = sum(e * c for e, c in enumerate(table.coefficients[n]))
        out.append(Fraction(weighted, factorial(n + m + 1)))
    return out


@dataclass(frozen=True)
class KappaConstant:
    """Asymptotic leaf density: leaves / keys -> value as keys grow."""

    m: int
    value: Fraction  # kappa_m / (m+1)!
    harmonic_upper: Fraction  # H_{2m+2}
    harmonic_lower: Fraction  # H_{m+1}

    @property
    def kappa(self) -> Fraction:
        return self.value * factorial(self.m + 1)


def kappa(m: int) -> KappaConstant:
    if m < 1:
        raise ValueError("need m >= 1")
    hu, hl = harmonic(2 * m + 2), harmonic(m + 1)
    return KappaConstant(m, 1 / (2 * (m + 1) * (hu - hl)), hu, hl)


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class LeafSample:
    """Leaf counts of B-trees built from seeded random permutations.

    Permutations are drawn one at a time from a single PCG64 stream
    (``numpy.random.default_rng(seed)``, Fisher-Yates shuffle), so the
    result is a pure function of (m, key_count, trials, seed).
    """

    m: int
    key_count: int
    trials: int
    seed: int
    mean: float
    variance: float
    skewness: float
    histogram: dict[int, int]

    @property
    def std_error(self) -> float:
        return (self.variance / self.trials) ** 0.5


def _histogram_moments(hist: dict[int, int]) -> tuple[float, float, float]:
    total = sum(hist.values())
    xs = np.array(sorted(hist), dtype=np.float64)
    cs = np.array([hist[int(x)] for x in xs], dtype=np.float64)
    mean = float((xs * cs).sum() / total)
    d = xs - mean
    m2 = float((d * d * cs).sum() / total)
    m3 = float((d * d * d * cs).sum() / total)
    variance = m2 * total / (total - 1) if total > 1 else 0.0
    skew = m3 / m2**1.5 if m2 > 0 else 0.0
    return mean, variance, skew


def monte_carlo_leaves(
    m: int, key_count: int, trials: int, seed: int, batch_size: int = 256
) -> LeafSample:
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    hist: dict[int, int] = {}
    done = 0
    while done < trials:
        b = min(batch_size, trials - done)
        perms = np.empty((b, key_count), dtype=np.int64)
        for i in range(b):
            perms[i] = rng.permutation(key_count)
        for leaves in kernels.btree_leaf_counts(perms, m):
            hist[int(leaves)] = hist.get(int(leaves), 0) + 1
        done += b
    mean, variance, skew = _histogram_moments(hist)
    return LeafSample(
        m, key_count, trials, seed, mean, variance, skew, dict(sorted(hist.items()))
    )


def sample_skewness(values: Sequence[float]) -> float:
    a = np.asarray(values, dtype=np.float64)
    d = a - a.mean()
    m2 = float((d * d).mean())
    m3 = float((d * d * d).mean())
    return m3 / m2**1.5 if m2 > 0 else 0.0
