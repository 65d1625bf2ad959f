"""Regularized incomplete beta function and its inverse.

The whole package leans on these two functions: order-statistic tail
probabilities, quantile-index searches and the Berk-Jones boundary inverse
all reduce to I_x(a, b) or its inverse in x. They are implemented from
scratch (continued fraction plus a safeguarded Newton solve) and compiled
with numba so that boundary construction over thousands of order statistics
stays cheap. Accuracy target: absolute error <= 1e-12 over shape parameters
up to a few thousand, which the tests check against independent oracles.
"""
from __future__ import annotations

import math

import numba as nb
import numpy as np

__all__ = ["reg_inc_beta", "reg_inc_beta_inv"]

# Continued-fraction knobs: _CF_EPS is a relative convergence target close to
# machine precision; _CF_TINY guards Lentz denominators against exact zeros.
_CF_TINY = 1e-300
_CF_EPS = 1e-16
_CF_MAX_ITER = 600


@nb.njit(cache=True)
def _cont_frac(a, b, x):
    """Modified Lentz evaluation of the continued fraction for I_x(a, b).

    Converges fast only for x below (a+1)/(a+b+2); the caller applies the
    symmetry split so we are always on that side. Returns NaN if the
    fraction has not settled after _CF_MAX_ITER steps.
    """
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    return math.nan


@nb.njit(cache=True)
def _reg_inc_beta_raw(a, b, x):
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(ln_front) * _cont_frac(a, b, x) / a
    return 1.0 - math.exp(ln_front) * _cont_frac(b, a, 1.0 - x) / b


@nb.njit(cache=True)
def _reg_inc_beta_inv_raw(a, b, p):
    """Solve I_x(a, b) = p for x via Newton steps bracketed by bisection.

    The bracket [lo, hi] always contains the root; a Newton step is taken
    only when it stays strictly inside, otherwise the bracket is halved.
    """
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    lo = 0.0
    hi = 1.0
    x = a / (a + b)
    ln_beta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    for _ in range(200):
        f = _reg_inc_beta_raw(a, b, x) - p
        if f > 0.0:
            hi = x
        elif f < 0.0:
            lo = x
        else:
            return x
        if hi - lo <= 1e-16 * hi:
            break
        x_new = 0.5 * (lo + hi)
        ln_pdf = (a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - ln_beta
        if ln_pdf > -690.0:
            step = x - f / math.exp(ln_pdf)
            if lo < step < hi:
                x_new = step
        if x_new == x:
            break
        x = x_new
    return 0.5 * (lo + hi)


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) = P(Beta(a, b) <= x)."""
    a = float(a)
    b = float(b)
    x = float(x)
    if not (math.isfinite(a) and math.isfinite(b)) or a <= 0.0 or b <= 0.0:
        raise ValueError(f"shape parameters must be positive finite, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    v = _reg_inc_beta_raw(a, b, x)
    if math.isnan(v):
        raise ArithmeticError(
            f"continued fraction for I_x(a, b) did not converge at a={a}, b={b}, x={x}"
        )
    return min(max(v, 0.0), 1.0)


def reg_inc_beta_inv(a: float, b: float, p: float) -> float:
    """Inverse of reg_inc_beta in x: the p-quantile of a Beta(a, b) law."""
    a = float(a)
    b = float(b)
    p = float(p)
    if not (math.isfinite(a) and math.isfinite(b)) or a <= 0.0 or b <= 0.0:
        raise ValueError(f"shape parameters must be positive finite, got a={a}, b={b}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    x = _reg_inc_beta_inv_raw(a, b, p)
    if math.isnan(x):
        raise ArithmeticError(
            f"inverse incomplete beta failed to converge at a={a}, b={b}, p={p}"
        )
    return x


@nb.njit(cache=True)
def _beta_quantile_orders(p, n, first, last):
    """Beta(i, n-i+1) p-quantiles for order-statistic indices first..last."""
    out = np.empty(last - first + 1)
    for i in range(first, last + 1):
        out[i - first] = _reg_inc_beta_inv_raw(float(i), float(n - i + 1), p)
    return out
