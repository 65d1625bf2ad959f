"""Pick the predictor whose certified risk bound is smallest.

Each of m candidate predictors contributes one column-aligned row of losses
on a shared evaluation set. Splitting delta evenly across predictors makes
every per-predictor CDF bound hold simultaneously with probability at least
1 - delta, so the winning bound - and any other risk measure read off the
winner's bound afterwards - is valid despite the data-dependent choice.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .bounds import GofStatistic, cdf_lower_bound
from .qbrm import QbrmWeight, evaluate_qbrm

__all__ = ["LossMatrix", "SelectionReport", "select_predictor", "groupwise_select"]


@dataclass(frozen=True)
class LossMatrix:
    """Loss values for m predictors (rows) on n shared samples (columns)."""

    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        labels = tuple(str(lbl) for lbl in self.labels)
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.size == 0:
            raise ValueError("values must form a non-empty 2-D array")
        if len(labels) != values.shape[0]:
            raise ValueError(
                f"{len(labels)} labels for {values.shape[0]} predictor rows"
            )
        if len(set(labels)) != len(labels) or any(not lbl for lbl in labels):
            raise ValueError("predictor labels must be non-empty and unique")
        if not np.all(np.isfinite(values)):
            raise ValueError("loss values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", values)

    @property
    def num_predictors(self) -> int:
        return self.values.shape[0]

    @property
    def num_samples(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_threshold_grid(cls, scores, truths, thresholds, loss_fn) -> "LossMatrix":
        """Build rows from per-class scores swept over a threshold grid.

        scores: (n_samples, n_classes) array; sample j's prediction set at
        threshold t is the 1-based set {k : scores[j, k-1] >= t}. loss_fn maps
        (prediction_set, truths[j]) to a loss; each threshold becomes one
        predictor row labeled with the threshold value.
        """
        scores = np.asarray(scores, dtype=float)
        if scores.ndim != 2 or scores.size == 0:
            raise ValueError("scores must form a non-empty 2-D array")
        if len(truths) != scores.shape[0]:
            raise ValueError("one truth per scored sample is required")
        thresholds = [float(t) for t in thresholds]
        rows = np.empty((len(thresholds), scores.shape[0]))
        for i, t in enumerate(thresholds):
            hits = scores >= t
            for j in range(scores.shape[0]):
                pred = frozenset(np.flatnonzero(hits[j]) + 1)
                rows[i, j] = loss_fn(pred, truths[j])
        return cls(tuple(f"t={t:g}" for t in thresholds), rows)


@dataclass(frozen=True)
class SelectionReport:
    """Outcome of one selection run, with everything needed to audit it."""

    chosen: str
    target_name: str
    labels: tuple[str, ...]
    target_bounds: tuple[float, ...]
    metric_bounds: dict[str, float]
    delta: float
    delta_per_predictor: float
    statistic: GofStatistic
    x_max: float | None

    @property
    def chosen_target_bound(self) -> float:
        return self.target_bounds[self.labels.index(self.chosen)]


def select_predictor(
    losses: LossMatrix,
    spec: GofStatistic,
    delta: float,
    target: QbrmWeight,
    report_metrics: tuple[QbrmWeight, ...] = (),
    x_max: float | None = None,
) -> SelectionReport:
    """Certified-bound minimizer over predictor rows.

    Bonferroni-splits delta across the m rows, bounds each row's CDF with the
    shared boundary (cached per (spec, delta/m)), evaluates the target risk on
    each bound and picks the smallest; ties break to the earliest row. All
    report metrics are evaluated on the winner's bound and stay valid
    post hoc under the same simultaneous guarantee.
    """
    if losses.num_samples != spec.n:
        raise ValueError(
            f"statistic is calibrated for n={spec.n}, loss matrix has "
            f"{losses.num_samples} columns"
        )
    delta_each = float(delta) / losses.num_predictors
    row_bounds = [
        cdf_lower_bound(row, spec, delta_each, x_max) for row in losses.values
    ]
    target_vals = [evaluate_qbrm(b, target) for b in row_bounds]
    idx = int(np.argmin(target_vals))
    metrics = {target.name: target_vals[idx]}
    for weight in report_metrics:
        if weight.name not in metrics:
            metrics[weight.name] = evaluate_qbrm(row_bounds[idx], weight)
    return SelectionReport(
        chosen=losses.labels[idx],
        target_name=target.name,
        labels=losses.labels,
        target_bounds=tuple(target_vals),
        metric_bounds=metrics,
        delta=float(delta),
        delta_per_predictor=delta_each,
        statistic=spec,
        x_max=None if x_max is None else float(x_max),
    )


def groupwise_select(
    losses: LossMatrix,
    groups,
    spec: GofStatistic,
    delta: float,
    target: QbrmWeight,
    report_metrics: tuple[QbrmWeight, ...] = (),
    x_max: float | None = None,
    bonferroni_across_groups: bool = False,
) -> dict[str, SelectionReport]:
    """Independent selection inside each sample group.

    groups holds one label per column; each group's columns are selected over
    separately at confidence delta, giving a marginal guarantee per group.
    Pass bonferroni_across_groups=True to split delta across groups so all
    group reports hold simultaneously.
    """
    group_arr = np.asarray([str(g) for g in groups])
    if group_arr.shape != (losses.num_samples,):
        raise ValueError("need exactly one group label per sample column")
    unique = list(dict.fromkeys(group_arr.tolist()))
    delta_each = float(delta) / (len(unique) if bonferroni_across_groups else 1)
    out = {}
    for name in unique:
        cols = group_arr == name
        size = int(cols.sum())
        if size == spec.n:
            group_spec = spec
        elif spec.first == 1 and spec.last == spec.n:
            group_spec = dataclasses.replace(spec, n=size, last=size)
        else:
            raise ValueError(
                f"truncation window ({spec.first}, {spec.last}) was tuned for "
                f"n={spec.n} and cannot transfer to group {name!r} of size "
                f"{size}; build a per-group statistic instead"
            )
        sub = LossMatrix(losses.labels, losses.values[:, cols])
        out[name] = select_predictor(
            sub, group_spec, delta_each, target, report_metrics, x_max
        )
    return out
