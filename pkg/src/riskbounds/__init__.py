"""Distribution-free lower confidence bounds on a loss CDF and the
quantile-based risk metrics (mean, VaR, CVaR, interval VaR) they certify.

The workflow: pick a goodness-of-fit statistic (`GofStatistic`), calibrate it
(`critical_value` / `boundary_from_statistic`), turn held-out losses into a
simultaneous step lower bound on the loss CDF (`cdf_lower_bound`), then read
off certified risk bounds (`evaluate_qbrm`) or run model selection on them
(`select_predictor`). `simulation` provides synthetic ground truth for
coverage experiments; the `riskbounds` console script fronts all of it.
"""
__version__ = "0.1.0"

from .betainc import reg_inc_beta, reg_inc_beta_inv
from .bounds import (
    GofStatistic,
    InfeasibleError,
    StepCdfLowerBound,
    boundary_from_statistic,
    cdf_lower_bound,
    critical_value,
    dkw_quantile_index,
    hoeffding_mean_ucb,
    order_stats_quantile_index,
    pointwise_bound_grid,
    truncation_index_one_sided,
    truncation_indices_two_sided,
)
from .crossing import noncrossing_prob
from .qbrm import QbrmWeight, evaluate_qbrm, parse_metric
from .selection import (
    LossMatrix,
    SelectionReport,
    groupwise_select,
    select_predictor,
)
from .simulation import (
    BetaDist,
    Discrete,
    McNoncrossing,
    PointMass,
    Uniform01,
    ViolationStats,
    balanced_accuracy_loss,
    mc_noncrossing,
    run_coverage_experiment,
    true_qbrm,
    weighted_accuracy_loss,
)

__all__ = [
    "__version__",
    "reg_inc_beta",
    "reg_inc_beta_inv",
    "GofStatistic",
    "InfeasibleError",
    "StepCdfLowerBound",
    "boundary_from_statistic",
    "cdf_lower_bound",
    "critical_value",
    "dkw_quantile_index",
    "hoeffding_mean_ucb",
    "order_stats_quantile_index",
    "pointwise_bound_grid",
    "truncation_index_one_sided",
    "truncation_indices_two_sided",
    "noncrossing_prob",
    "QbrmWeight",
    "evaluate_qbrm",
    "parse_metric",
    "LossMatrix",
    "SelectionReport",
    "groupwise_select",
    "select_predictor",
    "BetaDist",
    "Discrete",
    "McNoncrossing",
    "PointMass",
    "Uniform01",
    "ViolationStats",
    "balanced_accuracy_loss",
    "mc_noncrossing",
    "run_coverage_experiment",
    "true_qbrm",
    "weighted_accuracy_loss",
]
