"""Exact history counts and numeric estimation of their growth rate.

Let h_n be the number of reduced historic trees with n vertices for
order parameter m (equivalently, the number of insertion histories of
length n+m).  Removing the m+1 forced stem vertices splits such a tree
into an ordered pair of smaller ones, which on exponential generating
functions reads H^(m+1)(x) = H(x)^2 with H(0) = ... = H^(m)(0) = 1.
Matching coefficients of x^n/n! gives the recurrence used here:

    h_{n+m+1} = sum_{k=0}^{n} C(n,k) h_k h_{n-k},    h_0 = ... = h_m = 1.

Exact values use arbitrary precision; the growth estimators run the
same recurrence on a_n = h_n/n! in mantissa/exponent form (kernels
module) since a_n underflows float64 long before n = 5000.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, log

import numpy as np

from . import kernels
from .historic import iter_reduced_trees

_LN2 = log(2.0)


@dataclass(frozen=True)
class HistoryCountTable:
    m: int
    h: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.h)


@dataclass(frozen=True)
class GrowthEstimate:
    m: int
    rho_inverse_estimate: float
    polynomial_exponent_estimate: float
    N_used: int
    method: str

    @property
    def rho_estimate(self) -> float:
        return 1.0 / self.rho_inverse_estimate


@dataclass(frozen=True)
class ConjectureReport:
    """Normalized ratios r_n = h_n / (n! * C * n^m * rho^{-n-m-1}).

    Flat ratios (slope ~ 0 on a log-log scale) support the conjectured
    asymptotic shape; nothing here proves it.
    """

    m: int
    N: int
    rho_used: float
    ratios: tuple[float, ...]  # index n, entry 0 unused (log n undefined)
    slope_last_decade: float
    insufficient_range: bool


def history_counts(m: int, N: int) -> HistoryCountTable:
    """Exact h_0..h_N by the binomial convolution recurrence."""
    if m < 1 or N < 0:
        raise ValueError("need m >= 1 and N >= 0")
    h = [1] * min(m + 1, N + 1)
    row = [1]  # binomial row C(n, .)
    for n in range(N - m):
        total = 0
        for k in range(n + 1):
            total += row[k] * h[k] * h[n - k]
        h.append(total)
        row = [1] + [row[i] + row[i + 1] for i in range(n)] + [1]
    return HistoryCountTable(m, tuple(h))


def brute_force_historic_count(m: int, n: int) -> int:
    """Count reduced historic trees on n vertices by explicit growth.

    Independent oracle for :func:`history_counts`; every tree is built
    exactly once, so no deduplication is involved.  Practical for
    n up to ~14 (m = 1); larger m shrinks the counts.
    """
    if n < 0:
        raise ValueError("vertex count must be >= 0")
    if n == 0:
        return 1  # the empty tree: a single external slot
    return sum(1 for _ in iter_reduced_trees(m, n))


def log_scaled_coefficients(m: int, N: int) -> np.ndarray:
    """ln(h_n/n!) for n = 0..N, from the mantissa/exponent ladder."""
    mant, expo = kernels.scaled_history_series(m, N)
    return np.log(mant) + expo * _LN2


def corrected_ratio_sequence(m: int, N: int) -> np.ndarray:
    """s_n = (a_n/a_{n+1}) * (n+m+1)/(n+1) -> rho with O(n^-2) error.

    The factor removes the binomial part of a_n ~ c C(n+m, m) rho^-n
    exactly, which is the (1 - m/n + ...) correction of the raw ratios.
    """
    la = log_scaled_coefficients(m, N)
    n = np.arange(N, dtype=np.float64)
    return np.exp(la[:-1] - la[1:]) * (n + m + 1.0) / (n + 1.0)


def _aitken(s: np.ndarray) -> np.ndarray:
    d1 = s[1:-1] - s[:-2]
    d2 = s[2:] - 2.0 * s[1:-1] + s[:-2]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = s[:-2] - d1 * d1 / d2
    return t


def estimate_rho(m: int, N: int, method: str = "aitken") -> GrowthEstimate:
    """Estimate the growth constant from N+1 scaled coefficients.

    ``method="ratio"`` takes the last corrected ratio; ``"aitken"``
    additionally applies one Aitken delta-squared pass, evaluated where
    the second differences still dominate rounding noise.
    """
    if m < 1:
        raise ValueError("need m >= 1")
    if N < 50:
        raise ValueError("need N >= 50 coefficients for a stable estimate")
    s = corrected_ratio_sequence(m, N)
    if method == "ratio":
        rho = float(s[-1])
    elif method == "aitken":
        t = _aitken(s)
        # keep indices whose curvature is safely above float noise
        d2 = np.abs(s[2:] - 2.0 * s[1:-1] + s[:-2])
        usable = np.nonzero(np.isfinite(t) & (d2 > 1e-10 * np.abs(s[1:-1])))[0]
        if usable.size:
            hi = usable[-1]
            lo = max(0, hi - max(10, hi // 10))
            window = t[lo : hi + 1]
            window = window[np.isfinite(window)]
            rho = float(np.median(window))
        else:
            rho = float(s[-1])
    else:
        raise ValueError(f"unknown method {method!r}")

    la = log_scaled_coefficients(m, N)
    lo = max(2, N // 2)
    n = np.arange(lo, N + 1, dtype=np.float64)
    y = la[lo:] + n * log(rho)
    exponent = float(np.polyfit(np.log(n), y, 1)[0])
    return GrowthEstimate(m, 1.0 / rho, exponent, N, method)


def conjecture_report(m: int, N: int, rho: float | None = None) -> ConjectureReport:
    """Normalized ratio table for the conjectured n! C n^m rho^{-n-m-1} form."""
    insufficient = N < 10 * m
    if rho is None:
        rho = estimate_rho(m, max(N, 50)).rho_estimate
    la = log_scaled_coefficients(m, N)
    big_c = factorial(2 * m + 1) / factorial(m) ** 2
    n = np.arange(1, N + 1, dtype=np.float64)
    log_r = la[1:] - log(big_c) - m * np.log(n) + (n + m + 1) * log(rho)
    ratios = np.concatenate([[np.nan], np.exp(log_r)])
    if insufficient or N < 10:
        slope = float("nan")
    else:
        lo = max(1, N // 10)
        slope = float(
            np.polyfit(np.log(n[lo - 1 :]), np.log(ratios[lo:]), 1)[0]
        )
    return ConjectureReport(m, N, rho, tuple(ratios), slope, insufficient)


def history_count_oracle(m: int, length: int) -> int:
    """Number of histories of a given length, via h (lengths >= m) or the
    forced single-node phase (lengths < m)."""
    if length < 1:
        raise ValueError("histories have length >= 1")
    if length < m:
        return 1
    return history_counts(m, length - m).h[length - m]


def check_table(table: HistoryCountTable, max_brute: int = 12) -> list[str]:
    """Cross-check a count table against the explicit-growth oracle."""
    problems = []
    for n in range(min(len(table.h) - 1, max_brute) + 1):
        expect = brute_force_historic_count(table.m, n)
        if table.h[n] != expect:
            problems.append(f"h_{n} = {table.h[n]} but the oracle grew {expect}")
    return problems


def counts_to_rows(table: HistoryCountTable) -> list[dict]:
    return [{"n": n, "h": str(v)} for n, v in enumerate(table.h)]


def monotone_from(table: HistoryCountTable) -> bool:
    h, m = table.h, table.m
    return all(h[i + 1] >= h[i] for i in range(m, len(h) - 1))
