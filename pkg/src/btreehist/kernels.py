"""Hot numeric kernels, JIT-compiled with numba when available.

Set ``BTREEHIST_NO_NUMBA=1`` to force the pure NumPy/Python fallback
path.  Both paths run the same algorithms; the Monte Carlo kernel is
bit-identical either way, the floating series kernel agrees to within
summation-order rounding (~1e-12 relative).
"""

from __future__ import annotations

import math
import os

import numpy as np

_want_numba = os.environ.get("BTREEHIST_NO_NUMBA", "") in ("", "0")
if _want_numba:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover - numba is a hard dependency
        _njit = None
else:
    _njit = None

USING_NUMBA = _njit is not None


def _series_ladder_impl(m, N, mant, expo):
    # Scaled history counts a_n = h_n / n!, stored as mant * 2**expo to
    # survive the ~rho^-n decay far past float range.  Recurrence:
    # a_{n+m+1} = (n! / (n+m+1)!) * sum_{k=0}^{n} a_k a_{n-k}.
    fact = 1.0
    for i in range(min(m, N) + 1):
        f, e = math.frexp(1.0 / fact)
        mant[i] = f
        expo[i] = e
        fact *= i + 1
    for n in range(N - m):
        top = expo[0] + expo[n]
        for k in range(n + 1):
            e = expo[k] + expo[n - k]
            if e > top:
                top = e
        total = 0.0
        for k in range(n + 1):
            total += math.ldexp(mant[k] * mant[n - k], int(expo[k] + expo[n - k] - top))
        denom = 1.0
        for j in range(n + 1, n + m + 2):
            denom *= j
        f, e = math.frexp(total / denom)
        mant[n + m + 1] = f
        expo[n + m + 1] = e + top


def _series_ladder_numpy(m, N, mant, expo):
    # Vectorized twin of _series_ladder_impl.
    fact = 1.0
    for i in range(min(m, N) + 1):
        f, e = math.frexp(1.0 / fact)
        mant[i] = f
        expo[i] = e
        fact *= i + 1
    for n in range(N - m):
        prods = mant[: n + 1] * mant[n::-1]
        exps = expo[: n + 1] + expo[n::-1]
        top = exps.max()
        total = float(np.ldexp(prods, (exps - top).astype(np.int32)).sum())
        denom = 1.0
        for j in range(n + 1, n + m + 2):
            denom *= j
        f, e = math.frexp(total / denom)
        mant[n + m + 1] = f
        expo[n + m + 1] = e + int(top)


def _leaf_counts_impl(perms, m, out):
    # Build one B-tree of order 2m+1 per row of perms, returning its leaf
    # count.  Flat preallocated node arrays; nodes are never freed, so a
    # capacity of N+2 nodes is enough (every node keeps >= m >= 1 keys).
    trials, nkeys_total = perms.shape
    cap = nkeys_total + 2
    maxk = 2 * m + 1
    keys = np.zeros((cap, maxk), dtype=np.int64)
    nkeys = np.zeros(cap, dtype=np.int64)
    children = np.zeros((cap, maxk + 1), dtype=np.int64)
    is_leaf = np.zeros(cap, dtype=np.int64)
    path = np.zeros(64, dtype=np.int64)
    path_pos = np.zeros(64, dtype=np.int64)
    for t in range(trials):
        root = 0
        n_nodes = 1
        is_leaf[0] = 1
        nkeys[0] = 0
        leaves = 1
        for j in range(nkeys_total):
            key = perms[t, j]
            cur = root
            depth = 0
            while is_leaf[cur] == 0:
                nk = nkeys[cur]
                pos = 0
                while pos < nk and keys[cur, pos] < key:
                    pos += 1
                path[depth] = cur
                path_pos[depth] = pos
                depth += 1
                cur = children[cur, pos]
            nk = nkeys[cur]
            pos = nk
            while pos > 0 and keys[cur, pos - 1] > key:
                keys[cur, pos] = keys[cur, pos - 1]
                pos -= 1
            keys[cur, pos] = key
            nkeys[cur] = nk + 1
            while nkeys[cur] == maxk:
                right = n_nodes
                n_nodes += 1
                is_leaf[right] = is_leaf[cur]
                for i in range(m):
                    keys[right, i] = keys[cur, m + 1 + i]
                nkeys[right] = m
                if is_leaf[cur] == 0:
                    for i in range(m + 1):
                        children[right, i] = children[cur, m + 1 + i]
                else:
                    leaves += 1
                median = keys[cur, m]
                nkeys[cur] = m
                if depth == 0:
                    newroot = n_nodes
                    n_nodes += 1
                    is_leaf[newroot] = 0
                    keys[newroot, 0] = median
                    nkeys[newroot] = 1
                    children[newroot, 0] = cur
                    children[newroot, 1] = right
                    root = newroot
                    break
                depth -= 1
                par = path[depth]
                ppos = path_pos[depth]
                nk = nkeys[par]
                i = nk
                while i > ppos:
                    keys[par, i] = keys[par, i - 1]
                    i -= 1
                keys[par, ppos] = median
                i = nk + 1
                while i > ppos + 1:
                    children[par, i] = children[par, i - 1]
                    i -= 1
                children[par, ppos + 1] = right
                nkeys[par] = nk + 1
                cur = par
        out[t] = leaves


if USING_NUMBA:
    _series_ladder_jit = _njit(cache=True)(_series_ladder_impl)
    _leaf_counts_jit = _njit(cache=True)(_leaf_counts_impl)
else:  # pragma: no cover - exercised via the env flag
    _series_ladder_jit = None
    _leaf_counts_jit = None


def scaled_history_series(m: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    """(mantissa, exponent) arrays for a_n = h_n/n!, n = 0..N."""
    if m < 1 or N < 0:
        raise ValueError("need m >= 1 and N >= 0")
    mant = np.zeros(N + 1)
    expo = np.zeros(N + 1, dtype=np.int64)
    if USING_NUMBA:
        _series_ladder_jit(m, N, mant, expo)
    else:
        _series_ladder_numpy(m, N, mant, expo)
    return mant, expo


def btree_leaf_counts(perms: np.ndarray, m: int) -> np.ndarray:
    """Leaf count of the B-tree of order 2m+1 built from each row."""
    perms = np.ascontiguousarray(perms, dtype=np.int64)
    if perms.ndim != 2:
        raise ValueError("perms must be a 2-D array, one permutation per row")
    out = np.zeros(perms.shape[0], dtype=np.int64)
    if USING_NUMBA:
        _leaf_counts_jit(perms, m, out)
    else:
        _leaf_counts_impl(perms, m, out)
    return out


def implementations() -> dict[str, dict[str, object]]:
    """Both code paths for each kernel, for benchmarking side by side."""
    table: dict[str, dict[str, object]] = {
        "series_ladder": {"fallback": _series_ladder_numpy},
        "leaf_counts": {"fallback": _leaf_counts_impl},
    }
    if USING_NUMBA:
        table["series_ladder"]["numba"] = _series_ladder_jit
        table["leaf_counts"]["numba"] = _leaf_counts_jit
    return table
