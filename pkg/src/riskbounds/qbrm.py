"""Quantile-based risk measures evaluated exactly on step CDF bounds.

A quantile-based risk measure integrates the quantile function against a
probability weight on (0, 1]: R(F) = integral of F^{-1}(p) dPsi(p). The
weight is a mix of point masses and constant-density pieces, which covers
the mean, value-at-risk, conditional value-at-risk and quantile-interval
averages. Because a step CDF has a step quantile function, the integral has
a closed form; no numerical quadrature is involved.

Larger weight on upper quantile levels means more tail-averse. If bound G
sits below bound H everywhere then every such risk measure of G is at least
that of H, so evaluating on a CDF *lower* bound yields a risk *upper* bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import StepCdfLowerBound

__all__ = ["QbrmWeight", "evaluate_qbrm", "parse_metric"]

_MASS_TOL = 1e-12


@dataclass(frozen=True)
class QbrmWeight:
    """Probability weight over quantile levels: atoms plus flat pieces.

    atoms: (location, mass) point masses with locations in (0, 1).
    pieces: (lo, hi, density) constant densities on subintervals of [0, 1],
    pairwise non-overlapping. Total mass must be 1.
    """

    name: str
    atoms: tuple[tuple[float, float], ...] = ()
    pieces: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        if not self.name:
            raise ValueError("weight needs a non-empty name")
        total = 0.0
        for loc, mass in self.atoms:
            if not 0.0 < loc < 1.0:
                raise ValueError(f"atom location must lie in (0, 1), got {loc}")
            if not mass > 0.0:
                raise ValueError(f"atom mass must be positive, got {mass}")
            total += mass
        spans = []
        for lo, hi, density in self.pieces:
            if not 0.0 <= lo < hi <= 1.0:
                raise ValueError(f"piece must satisfy 0 <= lo < hi <= 1, got ({lo}, {hi})")
            if not density > 0.0:
                raise ValueError(f"piece density must be positive, got {density}")
            spans.append((lo, hi))
            total += density * (hi - lo)
        spans.sort()
        for (_, prev_hi), (cur_lo, _) in zip(spans, spans[1:]):
            if cur_lo < prev_hi - _MASS_TOL:
                raise ValueError("pieces must not overlap")
        if abs(total - 1.0) > _MASS_TOL:
            raise ValueError(f"weight mass must total 1, got {total!r}")

    @classmethod
    def mean(cls) -> "QbrmWeight":
        return cls("mean", pieces=((0.0, 1.0, 1.0),))

    @classmethod
    def value_at_risk(cls, beta: float) -> "QbrmWeight":
        beta = float(beta)
        if not 0.0 < beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {beta}")
        return cls(f"var:{beta:g}", atoms=((beta, 1.0),))

    @classmethod
    def cvar(cls, beta: float) -> "QbrmWeight":
        beta = float(beta)
        if not 0.0 < beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {beta}")
        return cls(f"cvar:{beta:g}", pieces=((beta, 1.0, 1.0 / (1.0 - beta)),))

    @classmethod
    def var_interval(cls, beta_min: float, beta_max: float) -> "QbrmWeight":
        beta_min = float(beta_min)
        beta_max = float(beta_max)
        if not 0.0 < beta_min < beta_max < 1.0:
            raise ValueError(
                f"need 0 < beta_min < beta_max < 1, got ({beta_min}, {beta_max})"
            )
        return cls(
            f"interval:{beta_min:g},{beta_max:g}",
            pieces=((beta_min, beta_max, 1.0 / (beta_max - beta_min)),),
        )


def parse_metric(text: str) -> QbrmWeight:
    """Parse a metric descriptor: mean | var:B | cvar:B | interval:A,B."""
    body = text.strip().lower()
    try:
        if body == "mean":
            return QbrmWeight.mean()
        head, _, args = body.partition(":")
        if head == "var":
            return QbrmWeight.value_at_risk(float(args))
        if head == "cvar":
            return QbrmWeight.cvar(float(args))
        if head == "interval":
            lo_s, hi_s = args.split(",")
            return QbrmWeight.var_interval(float(lo_s), float(hi_s))
    except ValueError as exc:
        raise ValueError(f"bad metric descriptor {text!r}: {exc}") from exc
    raise ValueError(
        f"bad metric descriptor {text!r}: expected mean, var:B, cvar:B or interval:A,B"
    )


def evaluate_qbrm(bound: StepCdfLowerBound, weight: QbrmWeight) -> float:
    """Risk of the step bound under the weight, in closed form.

    The quantile function of the bound takes value breakpoints[i] on the
    level interval (levels[i-1], levels[i]] and x_max above the last level;
    atoms read it pointwise and each flat piece contributes density times
    the overlap length with each level interval. Weight mass above the last
    level with no finite x_max makes the risk +inf (a value, not an error).
    """
    levels = bound.levels
    breakpoints = bound.breakpoints
    top = float(levels[-1])
    total = 0.0
    for loc, mass in weight.atoms:
        q = bound.quantile(loc)
        if math.isinf(q):
            return math.inf
        total += mass * q
    inner_edges = np.concatenate(([0.0], levels))
    for lo, hi, density in weight.pieces:
        tail_len = hi - max(lo, top)
        if tail_len > 0.0:
            if bound.x_max is None:
                return math.inf
            total += density * tail_len * bound.x_max
        seg = np.minimum(inner_edges[1:], hi) - np.maximum(inner_edges[:-1], lo)
        np.clip(seg, 0.0, None, out=seg)
        total += density * float(seg @ breakpoints)
    return total
