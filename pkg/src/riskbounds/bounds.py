"""Simultaneous lower confidence bounds for a loss CDF.

Given n i.i.d. losses, `cdf_lower_bound` returns a step function that lies
at or below the true loss CDF everywhere with probability at least
1 - delta. Calibration is exact: the boundary placed under the order
statistics is inverted from a minimum-type goodness-of-fit statistic whose
critical value is found by bisecting the exact non-crossing probability,
never a union bound.

The module also carries the cheaper point-wise routes (DKW and order-statistic
quantile indices on a grid with a Bonferroni split, plus Hoeffding's mean
bound) so the simulation harness and CLI can compare all methods on a common
interface.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .betainc import _beta_quantile_orders, reg_inc_beta
from .crossing import noncrossing_prob

__all__ = [
    "InfeasibleError",
    "GofStatistic",
    "StepCdfLowerBound",
    "boundary_from_statistic",
    "critical_value",
    "cdf_lower_bound",
    "truncation_index_one_sided",
    "truncation_indices_two_sided",
    "dkw_quantile_index",
    "order_stats_quantile_index",
    "pointwise_bound_grid",
    "hoeffding_mean_ucb",
]

_BISECT_ITERS = 80


class InfeasibleError(Exception):
    """No configuration can deliver the requested guarantee at this n/delta.

    Raised deterministically from (n, beta, delta) alone, never from the
    observed data.
    """


@dataclass(frozen=True)
class GofStatistic:
    """A minimum-type statistic over uniform order statistics.

    kind "ks" is the one-sided Kolmogorov-Smirnov statistic
    min_i (U_(i) - i/n); kind "berk_jones" is min_i I_{U_(i)}(i, n-i+1)
    restricted to the index window [first, last]. The full Berk-Jones
    statistic is the window (1, n); truncating the window drops constraints
    outside it, which buys tighter boundary levels inside.
    """

    kind: str
    n: int
    first: int = 1
    last: int | None = None

    def __post_init__(self):
        if self.kind not in ("ks", "berk_jones"):
            raise ValueError(f"unknown statistic kind {self.kind!r}")
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if self.last is None:
            object.__setattr__(self, "last", self.n)
        if not (isinstance(self.first, int) and isinstance(self.last, int)):
            raise ValueError("window indices must be integers")
        if not 1 <= self.first <= self.last <= self.n:
            raise ValueError(
                f"need 1 <= first <= last <= n, got ({self.first}, {self.last}, {self.n})"
            )
        if self.kind == "ks" and (self.first != 1 or self.last != self.n):
            raise ValueError("the KS statistic does not support index windows")

    @classmethod
    def ks(cls, n: int) -> "GofStatistic":
        return cls("ks", n)

    @classmethod
    def berk_jones(cls, n: int) -> "GofStatistic":
        return cls("berk_jones", n)

    @classmethod
    def truncated_one_sided(cls, n: int, k: int) -> "GofStatistic":
        """Berk-Jones restricted to the upper-tail indices i >= k."""
        return cls("berk_jones", n, k, n)

    @classmethod
    def truncated_two_sided(cls, n: int, k: int, l: int) -> "GofStatistic":
        """Berk-Jones restricted to the index window k <= i <= l."""
        return cls("berk_jones", n, k, l)

    @property
    def value_range(self) -> tuple[float, float]:
        # KS values live in [-1, 0] at every critical level; the range is
        # widened to [-1, 1] defensively (positive r forces b_n = 1, whose
        # non-crossing probability is 0, so bisection never settles there).
        if self.kind == "ks":
            return (-1.0, 1.0)
        return (0.0, 1.0)


def boundary_from_statistic(spec: GofStatistic, r: float) -> np.ndarray:
    """Invert a statistic value into per-index boundary levels b_i.

    b_i is the smallest u with s_i(u) >= r, clamped into [0, 1], zero at
    indices outside the window, then monotonized with a running maximum so
    the result is a valid nondecreasing boundary.
    """
    lo, hi = spec.value_range
    r = float(r)
    if not lo <= r <= hi:
        raise ValueError(f"statistic value {r} outside range [{lo}, {hi}]")
    n = spec.n
    if spec.kind == "ks":
        b = np.clip(r + np.arange(1, n + 1) / n, 0.0, 1.0)
    else:
        b = np.zeros(n)
        b[spec.first - 1 : spec.last] = _beta_quantile_orders(
            r, n, spec.first, spec.last
        )
    return np.maximum.accumulate(b)


@functools.lru_cache(maxsize=512)
def _critical_value_cached(spec: GofStatistic, delta: float) -> float:
    lo, hi = spec.value_range
    # At the range minimum the boundary is all zeros, so feasibility there is
    # trivial; every move of `lo` afterwards is a verified feasible value and
    # the final `lo` is the conservative (rounded-down) critical value.
    target = 1.0 - delta
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if noncrossing_prob(boundary_from_statistic(spec, mid)) >= target:
            lo = mid
        else:
            hi = mid
    return lo


def critical_value(spec: GofStatistic, delta: float) -> float:
    """Largest statistic value r with P(S >= r) >= 1 - delta.

    Fixed-count bisection on the statistic's value range, rounding down to
    the last value whose boundary was verified non-crossing, so the returned
    configuration never over-covers the nominal failure rate. Results are
    cached per (spec, delta): selection runs share one boundary across
    predictors.
    """
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return _critical_value_cached(spec, delta)


@dataclass(frozen=True)
class StepCdfLowerBound:
    """Right-continuous step function lying below a CDF with high probability.

    Zero before the first breakpoint, `levels[i]` from `breakpoints[i]` up to
    the next breakpoint, and one at and beyond `x_max` (the a-priori upper
    limit of the loss; None when no finite limit is known, in which case the
    function never reaches one and upper-tail risk bounds are infinite).
    """

    breakpoints: np.ndarray
    levels: np.ndarray
    x_max: float | None = None

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        lv = np.asarray(self.levels, dtype=float)
        if bp.ndim != 1 or bp.size == 0 or bp.shape != lv.shape:
            raise ValueError("breakpoints and levels must be matching non-empty 1-D arrays")
        if not np.all(np.isfinite(bp)):
            raise ValueError("breakpoints must be finite")
        if np.any(np.diff(bp) <= 0.0):
            raise ValueError("breakpoints must be strictly increasing")
        if not np.all(np.isfinite(lv)) or lv[0] < 0.0 or lv[-1] >= 1.0:
            raise ValueError("levels must lie in [0, 1)")
        if np.any(np.diff(lv) < 0.0):
            raise ValueError("levels must be nondecreasing")
        x_max = self.x_max
        if x_max is not None:
            x_max = float(x_max)
            if not math.isfinite(x_max):
                raise ValueError("x_max must be finite or None")
            if x_max < bp[-1]:
                raise ValueError(f"x_max={x_max} below the largest breakpoint {bp[-1]}")
        bp.setflags(write=False)
        lv.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "levels", lv)
        object.__setattr__(self, "x_max", x_max)

    def at(self, x):
        """Evaluate the step function pointwise (scalar or array)."""
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.breakpoints, x, side="right")
        padded = np.concatenate(([0.0], self.levels))
        out = padded[idx]
        if self.x_max is not None:
            out = np.where(x >= self.x_max, 1.0, out)
        return out if out.ndim else float(out)

    def quantile(self, p):
        """Generalized inverse inf{x : value >= p} for p in (0, 1].

        At p equal to a level the breakpoint carrying that level is returned
        (the interval of attainment is closed on the left). Probing above the
        last level returns x_max, or +inf when no finite limit is known.
        """
        p_arr = np.asarray(p, dtype=float)
        if np.any(~np.isfinite(p_arr)) or np.any(p_arr <= 0.0) or np.any(p_arr > 1.0):
            raise ValueError("quantile levels must lie in (0, 1]")
        tail = math.inf if self.x_max is None else self.x_max
        padded = np.concatenate((self.breakpoints, [tail]))
        out = padded[np.searchsorted(self.levels, p_arr, side="left")]
        return out if out.ndim else float(out)


def _sorted_samples(samples, n_expected: int | None = None) -> np.ndarray:
    x = np.sort(np.asarray(samples, dtype=float))
    if x.ndim != 1 or x.size == 0:
        raise ValueError("samples must form a non-empty 1-D array")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    if n_expected is not None and x.size != n_expected:
        raise ValueError(f"statistic is calibrated for n={n_expected}, got {x.size} samples")
    return x


def _collapse_ties(x: np.ndarray, levels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Duplicate sample values collapse to one breakpoint carrying the largest
    # applicable level; levels are nondecreasing so that is the last in a run.
    keep = np.concatenate((x[1:] != x[:-1], [True]))
    return x[keep], levels[keep]


def cdf_lower_bound(
    samples,
    spec: GofStatistic,
    delta: float,
    x_max: float | None = None,
) -> StepCdfLowerBound:
    """Simultaneous lower confidence bound for the loss CDF at level 1 - delta."""
    x = _sorted_samples(samples, spec.n)
    if x_max is not None and x_max < x[-1]:
        raise ValueError(f"x_max={x_max} below the largest observed loss {x[-1]}")
    b = boundary_from_statistic(spec, critical_value(spec, delta))
    bp, lv = _collapse_ties(x, b)
    return StepCdfLowerBound(bp, lv, x_max)


def _window_attained(n: int, delta: float, first: int, last: int, at: int) -> float:
    """Boundary level reached at index `at` by the windowed Berk-Jones bound."""
    spec = GofStatistic("berk_jones", n, first, last)
    b = boundary_from_statistic(spec, critical_value(spec, delta))
    return float(b[at - 1])


def _search_min_index(lo: int, hi: int, meets) -> int | None:
    """Smallest index in [lo, hi] where `meets` holds, assuming monotone meets.

    Bisects, then verifies the answer and its left neighbor; if the
    monotonicity assumption turns out false, falls back to a linear scan.
    Returns None when no index qualifies.
    """
    memo: dict[int, bool] = {}

    def ok(i: int) -> bool:
        if i not in memo:
            memo[i] = meets(i)
        return memo[i]

    if not ok(hi):
        return None
    a, b = lo, hi
    while a < b:
        mid = (a + b) // 2
        if ok(mid):
            b = mid
        else:
            a = mid + 1
    if ok(a) and (a == lo or not ok(a - 1)):
        return a
    for i in range(lo, hi + 1):
        if ok(i):
            return i
    return None


def truncation_index_one_sided(n: int, delta: float, beta_min: float) -> int:
    """Smallest k whose upper-tail window [k, n] reaches level beta_min at k.

    Dropping constraints below k raises the critical value and therefore the
    boundary levels in the tail; this finds the least truncation that pushes
    the first constrained level up to beta_min.
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if not 0.0 < beta_min < 1.0:
        raise ValueError(f"beta_min must lie in (0, 1), got {beta_min}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    k = _search_min_index(1, n, lambda i: _window_attained(n, delta, i, n, i) >= beta_min)
    if k is None:
        best = _window_attained(n, delta, n, n, n)  # = delta ** (1/n)
        raise InfeasibleError(
            f"no truncation reaches beta_min={beta_min:g}: even the single "
            f"constraint at index n={n} attains only {best:.6g} (= delta^(1/n))"
        )
    return k


def truncation_indices_two_sided(
    n: int, delta: float, beta_min: float, beta_max: float
) -> tuple[int, int]:
    """Window (k, l) covering quantile levels [beta_min, beta_max].

    k is the one-sided truncation index for beta_min; l is then the smallest
    window end whose level at index l reaches beta_max.
    """
    if not 0.0 < beta_min < beta_max < 1.0:
        raise ValueError(
            f"need 0 < beta_min < beta_max < 1, got ({beta_min}, {beta_max})"
        )
    k = truncation_index_one_sided(n, delta, beta_min)
    l = _search_min_index(k, n, lambda i: _window_attained(n, delta, k, i, i) >= beta_max)
    if l is None:
        best = _window_attained(n, delta, k, n, n)
        raise InfeasibleError(
            f"no window end reaches beta_max={beta_max:g}: the widest window "
            f"({k}, {n}) attains only {best:.6g} at its last index"
        )
    return k, l


def dkw_quantile_index(n: int, beta: float, delta: float) -> int:
    """Order-statistic index k with P(F(X_(k)) >= beta) >= 1 - delta, via the
    two-sided empirical-CDF concentration bound (valid for delta <= 1/2)."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if not 0.0 < delta <= 0.5:
        raise ValueError(f"delta must lie in (0, 1/2], got {delta}")
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    eps = math.sqrt(math.log(1.0 / delta) / (2.0 * n))
    if beta + eps > 1.0:
        raise InfeasibleError(
            f"beta + sqrt(log(1/delta)/(2n)) = {beta + eps:.6g} exceeds 1 at "
            f"n={n}; a larger sample or looser (beta, delta) is required"
        )
    return math.ceil(n * (beta + eps))


def order_stats_quantile_index(n: int, beta: float, delta: float) -> int:
    """Smallest k with P(F(X_(k)) < beta) <= delta, from the exact Beta law
    of uniform order statistics."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    if reg_inc_beta(n, 1, beta) > delta:
        raise InfeasibleError(
            f"P(U_(n) < beta) = beta^n = {beta ** n:.6g} exceeds delta={delta:g} "
            f"at n={n}; no order statistic certifies the beta-quantile"
        )
    lo, hi = 1, n
    while lo < hi:
        mid = (lo + hi) // 2
        if reg_inc_beta(mid, n - mid + 1, beta) <= delta:
            hi = mid
        else:
            lo = mid + 1
    return hi


def pointwise_bound_grid(
    samples,
    method: str,
    delta: float,
    betas,
    x_max: float | None = None,
) -> StepCdfLowerBound:
    """Step CDF bound from per-quantile constraints on a grid of levels.

    Each grid level gets an equal Bonferroni share delta/len(betas) and an
    order-statistic index from the chosen method; the resulting constraints
    F(X_(k_j)) >= beta_j assemble into a step bound that is zero below the
    first constrained sample.
    """
    index_fn = {
        "dkw": dkw_quantile_index,
        "order_stats": order_stats_quantile_index,
    }.get(method)
    if index_fn is None:
        raise ValueError(f"method must be 'dkw' or 'order_stats', got {method!r}")
    x = _sorted_samples(samples)
    if x_max is not None and x_max < x[-1]:
        raise ValueError(f"x_max={x_max} below the largest observed loss {x[-1]}")
    betas = np.asarray(betas, dtype=float)
    if betas.ndim != 1 or betas.size == 0:
        raise ValueError("betas must form a non-empty 1-D grid")
    if np.any(np.diff(betas) <= 0.0):
        raise ValueError("betas must be strictly increasing")
    budget = delta / betas.size
    n = x.size
    indices = []
    for beta in betas:
        try:
            indices.append(index_fn(n, float(beta), budget))
        except InfeasibleError as exc:
            raise InfeasibleError(
                f"grid point beta={beta:g} (per-point delta={budget:g}): {exc}"
            ) from exc
    bp, lv = _collapse_ties(x[np.asarray(indices) - 1], betas)
    return StepCdfLowerBound(bp, lv, x_max)


def hoeffding_mean_ucb(samples, delta: float) -> float:
    """Upper confidence bound on the mean of a [0, 1]-valued loss."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("samples must form a non-empty 1-D array")
    if np.any(~np.isfinite(x)) or np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("Hoeffding's mean bound requires losses in [0, 1]")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return float(x.mean()) + math.sqrt(math.log(1.0 / delta) / (2.0 * x.size))
