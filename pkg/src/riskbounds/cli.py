"""Command-line front end: bound, select, simulate, critical.

Reports are JSON with enough provenance to reproduce the run (method, n,
delta and its per-predictor split, a checksum of the calibrated boundary);
step bounds can additionally be exported as (breakpoint, level) CSV for
plotting. Writes are atomic (temp file + rename). Exit codes: 0 success,
2 infeasible configuration, 1 any other error. Relative output paths land in
$RISKBOUNDS_OUTPUT_DIR when that is set.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .bounds import (
    GofStatistic,
    InfeasibleError,
    StepCdfLowerBound,
    boundary_from_statistic,
    cdf_lower_bound,
    critical_value,
    pointwise_bound_grid,
    truncation_index_one_sided,
    truncation_indices_two_sided,
)
from .qbrm import QbrmWeight, evaluate_qbrm, parse_metric
from .selection import LossMatrix, groupwise_select, select_predictor
from .simulation import (
    BetaDist,
    Discrete,
    PointMass,
    Uniform01,
    run_coverage_experiment,
)

__all__ = ["main", "console"]

_GOF_METHODS = ("ks", "bj", "bj-one-sided", "bj-two-sided")
_POINTWISE_METHODS = ("dkw", "order-stats")
_ENV_OUTPUT_DIR = "RISKBOUNDS_OUTPUT_DIR"


class CliError(Exception):
    """Bad invocation or bad input file; maps to exit status 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors, which would collide with
    # this tool's "2 = infeasible" contract; route them through CliError.
    def error(self, message):
        raise CliError(message)


def _resolve_out(path: str) -> str:
    if os.path.isabs(path):
        return path
    return os.path.join(os.environ.get(_ENV_OUTPUT_DIR, ""), path)


def _atomic_write(path: str, text: str) -> None:
    path = _resolve_out(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".riskbounds-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(obj):
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _write_json(path: str, payload: dict) -> None:
    _atomic_write(path, json.dumps(_jsonable(payload), indent=2, allow_nan=False) + "\n")


def _write_csv(path: str, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(_jsonable(cell)) for cell in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _checksum(*arrays) -> str:
    digest = hashlib.sha256()
    for arr in arrays:
        digest.update(np.ascontiguousarray(arr, dtype=float).tobytes())
    return digest.hexdigest()


def _read_loss_csv(path: str, group_column: str | None = None):
    try:
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise CliError(f"{path}: empty CSV") from None
            header = [h.strip() for h in header]
            rows = [row for row in reader if row]
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise CliError(f"{path}: no data rows")
    group_idx = None
    if group_column is not None:
        if group_column not in header:
            raise CliError(f"{path}: no column named {group_column!r}")
        group_idx = header.index(group_column)
    labels, columns, groups = [], [], []
    for j, name in enumerate(header):
        if j == group_idx:
            continue
        labels.append(name)
        col = []
        for i, row in enumerate(rows):
            if len(row) != len(header):
                raise CliError(f"{path}: row {i + 2} has {len(row)} cells, expected {len(header)}")
            try:
                col.append(float(row[j]))
            except ValueError:
                raise CliError(
                    f"{path}: row {i + 2}, column {name!r}: {row[j]!r} is not a number"
                ) from None
        columns.append(col)
    if group_idx is not None:
        groups = [row[group_idx].strip() for row in rows]
    return labels, np.asarray(columns, dtype=float), (groups or None)


def _parse_metrics(text: str) -> tuple[QbrmWeight, ...]:
    names = [part for part in text.split(",") if part.strip()]
    # interval:A,B contains a comma; re-join the halves it was split into
    merged: list[str] = []
    for part in names:
        if merged and merged[-1].strip().lower().startswith("interval:") and "," not in merged[-1]:
            merged[-1] = merged[-1] + "," + part
        else:
            merged.append(part)
    if not merged:
        raise CliError("no metrics given")
    return tuple(parse_metric(part) for part in merged)


def _build_statistic(method: str, n: int, delta: float, beta_min, beta_max) -> GofStatistic:
    if method == "ks":
        return GofStatistic.ks(n)
    if method == "bj":
        return GofStatistic.berk_jones(n)
    if method == "bj-one-sided":
        if beta_min is None:
            raise CliError("--beta-min is required for bj-one-sided")
        return GofStatistic.truncated_one_sided(
            n, truncation_index_one_sided(n, delta, beta_min)
        )
    if method == "bj-two-sided":
        if beta_min is None or beta_max is None:
            raise CliError("--beta-min and --beta-max are required for bj-two-sided")
        k, l = truncation_indices_two_sided(n, delta, beta_min, beta_max)
        return GofStatistic.truncated_two_sided(n, k, l)
    raise CliError(f"method {method!r} is not a simultaneous-bound method")


def _statistic_provenance(spec: GofStatistic) -> dict:
    return {"kind": spec.kind, "n": spec.n, "first": spec.first, "last": spec.last}


def _parse_grid(text: str | None, metrics: tuple[QbrmWeight, ...]) -> np.ndarray:
    if text:
        if ":" in text:
            lo_s, hi_s, count_s = text.split(":")
            lo, hi, count = float(lo_s), float(hi_s), int(count_s)
            if count < 1:
                raise CliError("grid count must be positive")
            return np.linspace(lo, hi, count) if count > 1 else np.asarray([lo])
        return np.asarray([float(part) for part in text.split(",")])
    # Default grids follow the leading metric: a var target needs only its own
    # level, an interval gets 10 points across it, a cvar tail gets 50 points
    # below 1. A mean has weight across all of (0, 1) and needs an explicit grid.
    head = metrics[0]
    kind, _, args = head.name.partition(":")
    if kind == "var":
        return np.asarray([float(args)])
    if kind == "interval":
        lo_s, hi_s = args.split(",")
        return np.linspace(float(lo_s), float(hi_s), 10)
    if kind == "cvar":
        return np.linspace(float(args), 1.0, 50, endpoint=False)
    raise CliError(
        f"no default grid for metric {head.name!r} with a point-wise method; pass --grid"
    )


def _x_max_from_args(args) -> float | None:
    if args.bounded_unit_loss and args.x_max is not None:
        raise CliError("--x-max and --bounded-unit-loss are mutually exclusive")
    if args.bounded_unit_loss:
        return 1.0
    return args.x_max


def _metric_values(bound: StepCdfLowerBound, metrics) -> tuple[dict, list[str]]:
    values, warnings = {}, []
    for weight in metrics:
        value = evaluate_qbrm(bound, weight)
        values[weight.name] = value
        if math.isinf(value):
            warnings.append(
                f"metric {weight.name!r} has no finite bound: the loss has no "
                "declared upper limit (pass --x-max or --bounded-unit-loss)"
            )
    return values, warnings


def _bound_payload(bound: StepCdfLowerBound) -> dict:
    return {
        "breakpoints": bound.breakpoints.tolist(),
        "levels": bound.levels.tolist(),
        "x_max": bound.x_max,
    }


def _export_bound_csv(path: str, bound: StepCdfLowerBound) -> None:
    _write_csv(path, ["breakpoint", "level"], zip(bound.breakpoints, bound.levels))


def _cmd_bound(args) -> int:
    metrics = _parse_metrics(args.metrics) if args.metrics else ()
    x_max = _x_max_from_args(args)
    labels, values, _ = _read_loss_csv(args.input)
    if args.column is not None:
        if args.column not in labels:
            raise CliError(f"{args.input}: no column named {args.column!r}")
        samples = values[labels.index(args.column)]
    elif len(labels) == 1:
        samples = values[0]
    else:
        raise CliError(
            f"{args.input} has {len(labels)} columns; pick one with --column"
        )
    n = samples.size
    report: dict = {
        "command": "bound",
        "version": __version__,
        "method": args.method,
        "n": n,
        "delta": args.delta,
        "x_max": x_max,
    }
    if args.method in _POINTWISE_METHODS:
        if not metrics and not args.grid:
            raise CliError("point-wise methods need --metrics or --grid to choose levels")
        betas = _parse_grid(args.grid, metrics)
        bound = pointwise_bound_grid(
            samples, args.method.replace("-", "_"), args.delta, betas, x_max
        )
        report["grid"] = betas.tolist()
        report["delta_per_grid_point"] = args.delta / betas.size
        report["boundary_sha256"] = _checksum(betas, bound.levels)
    else:
        spec = _build_statistic(args.method, n, args.delta, args.beta_min, args.beta_max)
        boundary = boundary_from_statistic(spec, critical_value(spec, args.delta))
        bound = cdf_lower_bound(samples, spec, args.delta, x_max)
        report["statistic"] = _statistic_provenance(spec)
        report["critical_value"] = critical_value(spec, args.delta)
        report["boundary_sha256"] = _checksum(boundary)
    metric_values, warnings = _metric_values(bound, metrics)
    report["metrics"] = metric_values
    report["bound"] = _bound_payload(bound)
    report["warnings"] = warnings
    if args.export_csv:
        _export_bound_csv(args.export_csv, bound)
    if args.out:
        _write_json(args.out, report)
    else:
        print(json.dumps(_jsonable(report), indent=2, allow_nan=False))
    return 0


def _cmd_select(args) -> int:
    target = parse_metric(args.target)
    metrics = _parse_metrics(args.metrics) if args.metrics else ()
    x_max = _x_max_from_args(args)
    labels, values, groups = _read_loss_csv(args.input, args.group_column)
    losses = LossMatrix(tuple(labels), values)
    n = losses.num_samples
    if args.method in _POINTWISE_METHODS:
        raise CliError(
            "select needs a simultaneous bound per predictor; point-wise "
            "methods are only available through `bound`"
        )
    delta_each = args.delta / losses.num_predictors
    spec = _build_statistic(args.method, n, delta_each, args.beta_min, args.beta_max)
    report: dict = {
        "command": "select",
        "version": __version__,
        "method": args.method,
        "n": n,
        "delta": args.delta,
        "num_predictors": losses.num_predictors,
        "target": args.target,
        "x_max": x_max,
    }
    if groups is not None:
        results = groupwise_select(
            losses,
            groups,
            spec,
            args.delta,
            target,
            metrics,
            x_max,
            bonferroni_across_groups=args.across_group_bonferroni,
        )
        payload, warnings = {}, []
        for name, rep in results.items():
            payload[name] = {
                "chosen": rep.chosen,
                "target_bound": rep.chosen_target_bound,
                "per_predictor_target_bounds": dict(zip(rep.labels, rep.target_bounds)),
                "chosen_metric_bounds": rep.metric_bounds,
                "n": rep.statistic.n,
                "delta": rep.delta,
                "delta_per_predictor": rep.delta_per_predictor,
            }
            if any(math.isinf(v) for v in rep.metric_bounds.values()):
                warnings.append(
                    f"group {name!r}: some metric bounds are infinite (no x_max)"
                )
        report["groups"] = payload
        report["warnings"] = warnings
        report["across_group_bonferroni"] = args.across_group_bonferroni
        chosen_bound = None
    else:
        result = select_predictor(losses, spec, args.delta, target, metrics, x_max)
        boundary = boundary_from_statistic(spec, critical_value(spec, delta_each))
        report["delta_per_predictor"] = delta_each
        report["statistic"] = _statistic_provenance(spec)
        report["boundary_sha256"] = _checksum(boundary)
        report["chosen"] = result.chosen
        report["per_predictor_target_bounds"] = dict(
            zip(result.labels, result.target_bounds)
        )
        report["chosen_metric_bounds"] = result.metric_bounds
        warnings = [
            f"metric {name!r} has no finite bound: the loss has no declared "
            "upper limit (pass --x-max or --bounded-unit-loss)"
            for name, value in result.metric_bounds.items()
            if math.isinf(value)
        ]
        report["warnings"] = warnings
        chosen_row = losses.values[losses.labels.index(result.chosen)]
        chosen_bound = cdf_lower_bound(chosen_row, spec, delta_each, x_max)
        report["chosen_bound"] = _bound_payload(chosen_bound)
    if args.export_csv:
        if chosen_bound is None:
            raise CliError("--export-csv is not available with --group-column")
        _export_bound_csv(args.export_csv, chosen_bound)
    if args.out:
        _write_json(args.out, report)
    else:
        print(json.dumps(_jsonable(report), indent=2, allow_nan=False))
    return 0


def _parse_dist(text: str):
    body = text.strip().lower()
    if body == "uniform":
        return Uniform01()
    head, _, args = body.partition(":")
    try:
        if head == "beta":
            a_s, b_s = args.split(",")
            return BetaDist(float(a_s), float(b_s))
        if head == "point":
            return PointMass(float(args))
        if head == "discrete":
            values, probs = [], []
            for pair in args.split(","):
                v_s, p_s = pair.split(":")
                values.append(float(v_s))
                probs.append(float(p_s))
            return Discrete(tuple(values), tuple(probs))
    except ValueError as exc:
        raise CliError(f"bad distribution descriptor {text!r}: {exc}") from exc
    raise CliError(
        f"bad distribution descriptor {text!r}: expected uniform, beta:A,B, "
        "point:V or discrete:v1:p1,v2:p2,..."
    )


def _cmd_simulate(args) -> int:
    config = {}
    if args.config:
        try:
            with open(args.config) as handle:
                config = json.load(handle)
        except OSError as exc:
            raise CliError(f"cannot read {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise CliError(f"{args.config}: {exc}") from exc
        if not isinstance(config, dict):
            raise CliError(f"{args.config}: config must be a JSON object")

    def setting(name: str, fallback=None):
        flag = getattr(args, name)
        return flag if flag is not None else config.get(name, fallback)

    n = setting("n")
    if n is None:
        raise CliError("sample size is required (--n or config key 'n')")
    n = int(n)
    trials = int(setting("trials", 1000))
    delta = float(setting("delta", 0.05))
    seed = int(setting("seed", 0))
    dist = _parse_dist(str(setting("dist", "uniform")))
    metrics = _parse_metrics(str(setting("metrics", "mean")))
    methods = str(setting("methods", "bj"))
    beta_min = setting("beta_min")
    beta_max = setting("beta_max")
    beta_min = None if beta_min is None else float(beta_min)
    beta_max = None if beta_max is None else float(beta_max)
    rows = []
    for method in (part.strip() for part in methods.split(",")):
        if method not in _GOF_METHODS:
            raise CliError(
                f"simulate supports the simultaneous-bound methods "
                f"{', '.join(_GOF_METHODS)}; got {method!r}"
            )
        spec = _build_statistic(method, n, delta, beta_min, beta_max)
        stats = run_coverage_experiment(dist, spec, delta, metrics, trials, seed)
        rows.append(
            {
                "method": method,
                "lcb_violation_rate": stats.lcb_rate,
                "metric_violation_rates": {
                    name: count / stats.trials
                    for name, count in stats.metric_violations.items()
                },
                "implication_breaches": stats.implication_breaches,
            }
        )
    report = {
        "command": "simulate",
        "version": __version__,
        "dist": str(setting("dist", "uniform")),
        "n": n,
        "trials": trials,
        "delta": delta,
        "seed": seed,
        "prng": "PCG64",
        "metrics": [w.name for w in metrics],
        "rows": rows,
    }
    if args.export_csv:
        header = ["method", "lcb_violation_rate"] + [
            f"metric_violation_rate:{w.name}" for w in metrics
        ]
        _write_csv(
            args.export_csv,
            header,
            (
                [row["method"], row["lcb_violation_rate"]]
                + [row["metric_violation_rates"][w.name] for w in metrics]
                for row in rows
            ),
        )
    if args.out:
        _write_json(args.out, report)
    else:
        print(json.dumps(_jsonable(report), indent=2, allow_nan=False))
    return 0


def _cmd_critical(args) -> int:
    if args.method in _POINTWISE_METHODS:
        raise CliError("critical values exist only for the simultaneous-bound methods")
    spec = _build_statistic(args.method, args.n, args.delta, args.beta_min, args.beta_max)
    value = critical_value(spec, args.delta)
    boundary = boundary_from_statistic(spec, value)
    print(f"{value:.12g}")
    if args.out:
        _write_json(
            args.out,
            {
                "command": "critical",
                "version": __version__,
                "method": args.method,
                "statistic": _statistic_provenance(spec),
                "delta": args.delta,
                "critical_value": value,
                "boundary": boundary.tolist(),
                "boundary_sha256": _checksum(boundary),
            },
        )
    if args.export_csv:
        _write_csv(
            args.export_csv,
            ["index", "level"],
            zip(range(1, spec.n + 1), boundary),
        )
    return 0


def _add_common(sub, pointwise_ok=True):
    methods = _GOF_METHODS + (_POINTWISE_METHODS if pointwise_ok else ())
    sub.add_argument("--method", required=True, choices=methods)
    sub.add_argument("--delta", type=float, required=True, help="failure budget in (0, 1)")
    sub.add_argument("--beta-min", type=float, help="lowest quantile level of interest (truncated methods)")
    sub.add_argument("--beta-max", type=float, help="highest quantile level of interest (bj-two-sided)")
    sub.add_argument("--out", help="write the JSON report here (default: stdout)")
    sub.add_argument("--export-csv", help="write a plottable CSV next to the report")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="riskbounds", description=__doc__)
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    p_bound = subparsers.add_parser("bound", help="bound one predictor's loss CDF and risk")
    _add_common(p_bound)
    p_bound.add_argument("--input", required=True, help="CSV of losses, one column per predictor")
    p_bound.add_argument("--column", help="which column to bound (default: the only one)")
    p_bound.add_argument("--metrics", help="comma list: mean,var:0.9,cvar:0.9,interval:0.85,0.95")
    p_bound.add_argument("--grid", help="point-wise grid: comma list of levels or lo:hi:count")
    p_bound.add_argument("--x-max", type=float, help="a-priori upper limit of the loss")
    p_bound.add_argument("--bounded-unit-loss", action="store_true", help="losses live in [0, 1]")
    p_bound.set_defaults(func=_cmd_bound)

    p_select = subparsers.add_parser("select", help="pick the predictor with the best certified risk")
    _add_common(p_select, pointwise_ok=False)
    p_select.add_argument("--input", required=True, help="CSV of losses, one column per predictor")
    p_select.add_argument("--target", required=True, help="metric to minimize, e.g. mean or cvar:0.9")
    p_select.add_argument("--metrics", help="extra metrics reported for the winner")
    p_select.add_argument("--group-column", help="CSV column holding per-sample group labels")
    p_select.add_argument(
        "--across-group-bonferroni",
        action="store_true",
        help="split delta across groups for simultaneous group-level validity",
    )
    p_select.add_argument("--x-max", type=float, help="a-priori upper limit of the loss")
    p_select.add_argument("--bounded-unit-loss", action="store_true", help="losses live in [0, 1]")
    p_select.set_defaults(func=_cmd_select)

    p_sim = subparsers.add_parser("simulate", help="coverage experiment against synthetic truth")
    p_sim.add_argument("--config", help="JSON file of settings; flags override")
    p_sim.add_argument("--method", dest="methods", help="comma list of methods to compare")
    p_sim.add_argument("--dist", help="uniform | beta:A,B | point:V | discrete:v1:p1,...")
    p_sim.add_argument("--n", type=int, help="samples per trial")
    p_sim.add_argument("--trials", type=int, help="number of trials")
    p_sim.add_argument("--delta", type=float, help="failure budget in (0, 1)")
    p_sim.add_argument("--metrics", help="comma list of metrics to score")
    p_sim.add_argument("--seed", type=int, help="PRNG seed (PCG64)")
    p_sim.add_argument("--beta-min", type=float, help="for truncated methods")
    p_sim.add_argument("--beta-max", type=float, help="for bj-two-sided")
    p_sim.add_argument("--out", help="write the JSON table here (default: stdout)")
    p_sim.add_argument("--export-csv", help="write the violation-rate table as CSV")
    p_sim.set_defaults(func=_cmd_simulate)

    p_crit = subparsers.add_parser("critical", help="critical value and boundary for a statistic")
    _add_common(p_crit, pointwise_ok=False)
    p_crit.add_argument("--n", type=int, required=True, help="sample size the statistic is calibrated for")
    p_crit.set_defaults(func=_cmd_critical)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console()
