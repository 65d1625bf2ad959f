"""Exact non-crossing probability for uniform order statistics.

noncrossing_prob(b) returns P(U_(1) >= b_1, ..., U_(n) >= b_n) for the order
statistics of n i.i.d. Uniform(0, 1) draws and a nondecreasing boundary b.
This is the quantity every simultaneous CDF bound in the package is
calibrated against, so it has to be exact (floating error only), not a
union-bound approximation.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["noncrossing_prob"]


def _validate_boundary(bounds) -> np.ndarray:
    b = np.asarray(bounds, dtype=float)
    if b.ndim != 1 or b.size == 0:
        raise ValueError("boundary must be a non-empty 1-D array")
    if not np.all(np.isfinite(b)):
        raise ValueError("boundary entries must be finite")
    if b[0] < 0.0 or b[-1] > 1.0:
        raise ValueError("boundary entries must lie in [0, 1]")
    if np.any(np.diff(b) < 0.0):
        raise ValueError("boundary must be nondecreasing")
    return b


def _lgamma_table(n: int) -> np.ndarray:
    # gl[k] = lgamma(k) for k = 0..n+1, with the k=0 slot set to +inf so that
    # out-of-support pmf terms exponentiate to exactly zero.
    gl = np.empty(n + 2)
    gl[0] = math.inf
    for k in range(1, n + 2):
        gl[k] = math.lgamma(k)
    return gl


def _advance(f: np.ndarray, j: int, n: int, p: float, gl: np.ndarray) -> np.ndarray:
    """One DP stage: add the count falling in the j-th boundary interval.

    f[c] is the probability that exactly c samples lie below the previous
    boundary level and every prefix constraint so far held. Conditioned on c,
    the n - c samples still above that level are uniform on the remaining
    range, so the new count is Binomial(n - c, p). Totals above j - 1 would
    push the j-th order statistic below b_j and are dropped.
    """
    c = np.arange(f.size)[:, None]
    cp = np.arange(j)[None, :]
    m = cp - c
    log_pmf = (
        gl[n - c + 1]
        - gl[np.maximum(m + 1, 0)]
        - gl[n - cp + 1]
        + m * math.log(p)
        + (n - cp) * math.log1p(-p)
    )
    return f @ np.exp(log_pmf)


def noncrossing_prob(bounds) -> float:
    """P(all order statistics stay at or above the boundary), exactly.

    Walks the intervals [b_{j-1}, b_j) left to right, tracking the
    distribution of how many samples have landed below the current level,
    conditioned on no prefix constraint having failed. Runs in O(n^2) per
    stage; probabilities stay in linear space with pmf terms assembled from
    an integer log-gamma table.
    """
    b = _validate_boundary(bounds)
    n = b.size
    if b[-1] >= 1.0:
        # Some constraint demands an order statistic >= 1, which continuous
        # uniforms achieve with probability zero.
        return 0.0
    if b[-1] == 0.0:
        return 1.0
    gl = _lgamma_table(n)
    f = np.ones(1)
    prev = 0.0
    for j in range(1, n + 1):
        bj = b[j - 1]
        if bj <= prev:
            # Zero-width interval: no sample can land in it, and the prefix
            # count already satisfies the looser constraint at this index.
            continue
        f = _advance(f, j, n, (bj - prev) / (1.0 - prev), gl)
        prev = bj
    return float(f.sum())
