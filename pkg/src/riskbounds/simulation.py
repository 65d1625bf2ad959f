"""Synthetic-ground-truth harness for checking the guarantees empirically.

Each synthetic distribution knows its CDF, quantile function and exact risk
values in closed form (Beta quantile integrals fall back to adaptive
quadrature at 1e-11 tolerance), so coverage experiments compare the bounds
against truth with no estimation error on the truth side. On purpose these
evaluators route through scipy rather than this package's own special
functions: the harness should not validate the code with the code.

Randomness is PCG64 (numpy's default 128-bit generator), seeded explicitly;
trials run sequentially so a seed pins the full experiment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .bounds import GofStatistic, cdf_lower_bound
from .qbrm import QbrmWeight, evaluate_qbrm

__all__ = [
    "Uniform01",
    "BetaDist",
    "Discrete",
    "PointMass",
    "true_qbrm",
    "ViolationStats",
    "run_coverage_experiment",
    "McNoncrossing",
    "mc_noncrossing",
    "balanced_accuracy_loss",
    "weighted_accuracy_loss",
]


@dataclass(frozen=True)
class Uniform01:
    """Uniform(0, 1) losses: CDF and quantile are the identity."""

    support_max: float = 1.0

    def cdf(self, x):
        return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)

    def quantile(self, p):
        return np.asarray(p, dtype=float)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.random(size)

    def quantile_integral(self, lo: float, hi: float) -> float:
        return 0.5 * (hi * hi - lo * lo)


@dataclass(frozen=True)
class BetaDist:
    """Beta(a, b) losses on [0, 1]."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0.0 and self.b > 0.0):
            raise ValueError(f"shape parameters must be positive, got ({self.a}, {self.b})")

    @property
    def support_max(self) -> float:
        return 1.0

    def cdf(self, x):
        return special.betainc(self.a, self.b, np.clip(np.asarray(x, dtype=float), 0.0, 1.0))

    def quantile(self, p):
        return special.betaincinv(self.a, self.b, np.asarray(p, dtype=float))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.beta(self.a, self.b, size)

    def quantile_integral(self, lo: float, hi: float) -> float:
        val, err = integrate.quad(
            lambda p: float(special.betaincinv(self.a, self.b, p)),
            lo,
            hi,
            epsabs=1e-11,
            epsrel=1e-11,
            limit=200,
        )
        if err > 1e-9:
            raise ArithmeticError(
                f"Beta quantile integral on [{lo}, {hi}] only reached error {err:g}"
            )
        return val


@dataclass(frozen=True)
class Discrete:
    """Finitely supported losses; values strictly increasing, probs sum to 1."""

    values: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        probs = tuple(float(p) for p in self.probs)
        if len(values) == 0 or len(values) != len(probs):
            raise ValueError("values and probs must be matching non-empty tuples")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("values must be strictly increasing")
        if any(p <= 0.0 for p in probs) or abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError("probs must be positive and sum to 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)

    @property
    def support_max(self) -> float:
        return self.values[-1]

    def _cum(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def cdf(self, x):
        idx = np.searchsorted(self.values, np.asarray(x, dtype=float), side="right")
        return np.concatenate(([0.0], self._cum()))[idx]

    def quantile(self, p):
        idx = np.searchsorted(self._cum(), np.asarray(p, dtype=float), side="left")
        return np.asarray(self.values)[np.minimum(idx, len(self.values) - 1)]

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(np.asarray(self.values), size=size, p=self.probs)

    def quantile_integral(self, lo: float, hi: float) -> float:
        edges = np.concatenate(([0.0], self._cum()))
        seg = np.minimum(edges[1:], hi) - np.maximum(edges[:-1], lo)
        np.clip(seg, 0.0, None, out=seg)
        return float(seg @ np.asarray(self.values))


@dataclass(frozen=True)
class PointMass:
    """All the loss mass at a single value."""

    value: float

    @property
    def support_max(self) -> float:
        return self.value

    def cdf(self, x):
        return (np.asarray(x, dtype=float) >= self.value).astype(float)

    def quantile(self, p):
        return np.full_like(np.asarray(p, dtype=float), self.value)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, self.value)

    def quantile_integral(self, lo: float, hi: float) -> float:
        return self.value * (hi - lo)


def true_qbrm(dist, weight: QbrmWeight) -> float:
    """Exact risk of a synthetic distribution under the weight."""
    total = 0.0
    for loc, mass in weight.atoms:
        total += mass * float(dist.quantile(loc))
    for lo, hi, density in weight.pieces:
        total += density * dist.quantile_integral(lo, hi)
    return total


@dataclass(frozen=True)
class ViolationStats:
    """Tallies from a coverage experiment.

    A CDF violation means the true CDF dipped below the step bound at some
    breakpoint; a metric violation means the true risk exceeded the reported
    risk bound. Any metric violation forces a CDF violation in the same
    trial, so implication_breaches should always be zero; it is recorded
    rather than assumed.
    """

    trials: int
    lcb_violations: int
    metric_violations: dict[str, int]
    implication_breaches: int

    @property
    def lcb_rate(self) -> float:
        return self.lcb_violations / self.trials

    def metric_rate(self, name: str) -> float:
        return self.metric_violations[name] / self.trials


def run_coverage_experiment(
    dist,
    spec: GofStatistic,
    delta: float,
    metrics: tuple[QbrmWeight, ...],
    trials: int,
    seed: int,
) -> ViolationStats:
    """Repeatedly bound sampled losses and score violations against truth.

    The loss upper limit handed to the bound is the distribution's own
    support maximum, so the premise "the CDF reaches one at x_max" holds
    exactly. The true CDF is evaluated at the bound's breakpoints: a
    right-continuous step bound can only cross the CDF at one of them.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    truth = {w.name: true_qbrm(dist, w) for w in metrics}
    lcb_violations = 0
    metric_violations = {w.name: 0 for w in metrics}
    implication_breaches = 0
    for _ in range(trials):
        sample = dist.sample(rng, spec.n)
        bound = cdf_lower_bound(sample, spec, delta, dist.support_max)
        lcb_bad = bool(np.any(dist.cdf(bound.breakpoints) < bound.levels))
        lcb_violations += lcb_bad
        metric_bad = False
        for w in metrics:
            if truth[w.name] > evaluate_qbrm(bound, w):
                metric_violations[w.name] += 1
                metric_bad = True
        if metric_bad and not lcb_bad:
            implication_breaches += 1
    return ViolationStats(trials, lcb_violations, metric_violations, implication_breaches)


@dataclass(frozen=True)
class McNoncrossing:
    estimate: float
    stderr: float
    trials: int


def mc_noncrossing(bounds, trials: int, seed: int, chunk: int = 1 << 17) -> McNoncrossing:
    """Monte Carlo estimate of the boundary non-crossing probability.

    Independent check on the exact dynamic program: sorts uniform samples and
    counts how often all order statistics clear the boundary. The standard
    error is the usual binomial one.
    """
    b = np.asarray(bounds, dtype=float)
    if b.ndim != 1 or b.size == 0:
        raise ValueError("boundary must be a non-empty 1-D array")
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    hits = 0
    remaining = trials
    while remaining > 0:
        rows = min(chunk, remaining)
        u = rng.random((rows, b.size))
        u.sort(axis=1)
        hits += int(np.count_nonzero(np.all(u >= b, axis=1)))
        remaining -= rows
    p = hits / trials
    return McNoncrossing(p, math.sqrt(p * (1.0 - p) / trials), trials)


def _check_class_set(candidate, num_classes: int, what: str) -> frozenset:
    out = frozenset(int(c) for c in candidate)
    if any(not 1 <= c <= num_classes for c in out):
        raise ValueError(f"{what} must be a subset of {{1..{num_classes}}}")
    return out


def balanced_accuracy_loss(prediction, truth, num_classes: int) -> float:
    """One minus the mean of multilabel sensitivity and specificity.

    Sensitivity is the fraction of true classes the prediction set caught;
    specificity is the fraction of non-true classes it correctly left out.
    Empty and all-class prediction sets both score 0.5.
    """
    if num_classes < 2:
        raise ValueError("need at least two classes")
    pred = _check_class_set(prediction, num_classes, "prediction set")
    true = _check_class_set(truth, num_classes, "truth set")
    if not true or len(true) >= num_classes:
        raise ValueError("truth must be a non-empty strict subset of the classes")
    sensitivity = len(pred & true) / len(true)
    specificity = (num_classes - len(true) - len(pred - true)) / (num_classes - len(true))
    return 1.0 - 0.5 * (sensitivity + specificity)


def weighted_accuracy_loss(prediction, truth, class_weights) -> float:
    """Convex mix of miss and false-alarm rates, weighted per truth class.

    class_weights[k-1] is the weight on sensitivity when the true class is k;
    the remainder goes on specificity. Heavier classes make missing them
    costlier.
    """
    weights = [float(w) for w in class_weights]
    num_classes = len(weights)
    if num_classes < 2:
        raise ValueError("need at least two classes")
    if any(not 0.0 <= w <= 1.0 for w in weights):
        raise ValueError("class weights must lie in [0, 1]")
    truth = int(truth)
    if not 1 <= truth <= num_classes:
        raise ValueError(
            f"no weight for truth class {truth}: weights cover 1..{num_classes}"
        )
    pred = _check_class_set(prediction, num_classes, "prediction set")
    sensitivity = 1.0 if truth in pred else 0.0
    specificity = (num_classes - 1 - len(pred - {truth})) / (num_classes - 1)
    mu = weights[truth - 1]
    return (1.0 - mu) * (1.0 - specificity) + mu * (1.0 - sensitivity)
