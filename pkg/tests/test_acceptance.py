"""Acceptance gate: eight end-to-end criteria with pinned tolerances.

Each test prints one ACCEPTANCE line (visible under pytest -s) and then
asserts, so the suite doubles as a human-readable scorecard. Tolerances and
time budgets are fixed; loosening them is not an option.
"""
import json
import math
import subprocess
import sys
import time

import numpy as np
import scipy.optimize

from riskbounds.bounds import (
    GofStatistic,
    InfeasibleError,
    StepCdfLowerBound,
    boundary_from_statistic,
    cdf_lower_bound,
    critical_value,
    dkw_quantile_index,
    order_stats_quantile_index,
    truncation_index_one_sided,
)
from riskbounds.crossing import noncrossing_prob
from riskbounds.qbrm import QbrmWeight, evaluate_qbrm
from riskbounds.selection import LossMatrix, select_predictor
from riskbounds.simulation import Uniform01, mc_noncrossing, run_coverage_experiment

CANONICAL_METRICS = (
    QbrmWeight.mean(),
    QbrmWeight.value_at_risk(0.9),
    QbrmWeight.cvar(0.9),
    QbrmWeight.var_interval(0.85, 0.95),
)


def _verdict(number: int, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"acceptance criterion {number}: {detail}"


def test_criterion_1_crossing_probability_exactness():
    t0 = time.monotonic()
    rng = np.random.default_rng(201)
    worst_closed = 0.0
    for _ in range(100):
        b1 = float(rng.uniform())
        worst_closed = max(worst_closed, abs(noncrossing_prob([b1]) - (1.0 - b1)))
    for _ in range(100):
        lo, hi = np.sort(rng.uniform(size=2))
        expected = (1.0 - hi) * (1.0 + hi - 2.0 * lo)
        worst_closed = max(worst_closed, abs(noncrossing_prob([lo, hi]) - expected))
    closed_ok = worst_closed <= 1e-12

    worst_sigma = 0.0
    trials = 1_000_000
    sizes = [3, 5, 10] * 7
    for i, n in enumerate(sizes[:20]):
        b = np.sort(rng.uniform(0.0, 0.9, size=n))
        exact = noncrossing_prob(b)
        mc = mc_noncrossing(b, trials=trials, seed=300 + i)
        se = math.sqrt(max(exact * (1.0 - exact), 1e-12) / trials)
        worst_sigma = max(worst_sigma, abs(mc.estimate - exact) / se)
    mc_ok = worst_sigma <= 4.0

    elapsed = time.monotonic() - t0
    ok = closed_ok and mc_ok and elapsed < 60.0
    _verdict(
        1,
        ok,
        f"closed-form worst {worst_closed:.2e} <= 1e-12; MC worst {worst_sigma:.2f} "
        f"sigma <= 4 over 20 boundaries at 1e6 trials; {elapsed:.1f}s < 60s",
    )


def test_criterion_2_critical_value_correctness():
    t0 = time.monotonic()
    worst_n1 = max(
        abs(critical_value(GofStatistic.berk_jones(1), d) - d) for d in (0.01, 0.05, 0.1)
    )

    def coverage_gap(r):
        lo = 1.0 - math.sqrt(1.0 - r)
        hi = math.sqrt(r)
        return (1.0 - hi) * (1.0 + hi - 2.0 * lo) - 0.95

    oracle = scipy.optimize.brentq(coverage_gap, 1e-12, 0.2, xtol=1e-14)
    ours_n2 = critical_value(GofStatistic.berk_jones(2), 0.05)
    ks_err = abs(critical_value(GofStatistic.ks(1), 0.1) - (-0.9))
    elapsed = time.monotonic() - t0
    ok = (
        worst_n1 <= 1e-9
        and abs(ours_n2 - 0.0272) <= 5e-4
        and abs(ours_n2 - oracle) <= 1e-9
        and ks_err <= 1e-9
        and elapsed < 30.0
    )
    _verdict(
        2,
        ok,
        f"single-sample worst {worst_n1:.1e} <= 1e-9; two-sample {ours_n2:.6f} vs "
        f"root-solve {oracle:.6f} and pin 0.0272+-5e-4; ks {ks_err:.1e} <= 1e-9; "
        f"{elapsed:.1f}s",
    )


def test_criterion_3_coverage_calibration():
    t0 = time.monotonic()
    seed, trials, delta = 2, 2000, 0.05
    bj = run_coverage_experiment(
        Uniform01(), GofStatistic.berk_jones(100), delta, CANONICAL_METRICS, trials, seed
    )
    ks = run_coverage_experiment(
        Uniform01(), GofStatistic.ks(100), delta, CANONICAL_METRICS, trials, seed
    )
    bj_ok = abs(bj.lcb_rate - delta) <= 0.0146
    ks_ok = ks.lcb_rate <= delta
    implication_ok = bj.implication_breaches == 0 and ks.implication_breaches == 0
    elapsed = time.monotonic() - t0
    ok = bj_ok and ks_ok and implication_ok and elapsed < 300.0
    _verdict(
        3,
        ok,
        f"bj rate {bj.lcb_rate:.4f} in 0.05+-0.0146; ks rate {ks.lcb_rate:.4f} <= 0.05; "
        f"metric=>lcb implication breaches {bj.implication_breaches + ks.implication_breaches}; "
        f"{elapsed:.1f}s < 300s",
    )


def test_criterion_4_pointwise_quantile_indices():
    t0 = time.monotonic()
    dkw_val = dkw_quantile_index(500, 0.9, 0.05)
    os_val = order_stats_quantile_index(10, 0.5, 0.05)
    raises = []
    for fn, args in (
        (dkw_quantile_index, (100, 0.9, 0.05)),
        (order_stats_quantile_index, (10, 0.99, 0.05)),
    ):
        try:
            fn(*args)
            raises.append(False)
        except InfeasibleError:
            raises.append(True)
    elapsed = time.monotonic() - t0
    ok = dkw_val == 478 and os_val == 9 and all(raises) and elapsed < 10.0
    _verdict(
        4,
        ok,
        f"dkw(500,0.9,0.05)={dkw_val} (want 478); order-stats(10,0.5,0.05)={os_val} "
        f"(want 9); infeasible cases raised={raises}; {elapsed:.2f}s",
    )


def test_criterion_5_risk_evaluation_grid_oracle():
    t0 = time.monotonic()
    rng = np.random.default_rng(17)
    grid_n = 1_000_000
    worst_rel = 0.0
    var_exact = True
    for _ in range(100):
        size = int(rng.integers(1, 12))
        # levels on a 1e-3 lattice make every quantile jump land on a grid-cell
        # edge, so the midpoint sum is exact and the tolerance is meaningful
        lv = np.unique(rng.integers(1, 1000, size=size)) / 1000.0
        bp = np.sort(rng.uniform(0.0, 10.0, size=lv.size))
        x_max = float(bp[-1] + rng.uniform(0.1, 3.0))
        bound = StepCdfLowerBound(bp, lv, x_max=x_max)
        edges = np.append(bound.breakpoints, x_max)
        for weight, lo, hi in (
            (CANONICAL_METRICS[0], 0.0, 1.0),
            (CANONICAL_METRICS[2], 0.9, 1.0),
            (CANONICAL_METRICS[3], 0.85, 0.95),
        ):
            mids = lo + (np.arange(grid_n) + 0.5) * (hi - lo) / grid_n
            oracle = edges[np.searchsorted(bound.levels, mids, side="left")].mean()
            rel = abs(evaluate_qbrm(bound, weight) - oracle) / abs(oracle)
            worst_rel = max(worst_rel, rel)
        for beta in (0.25, 0.5, 0.9):
            atom = QbrmWeight.value_at_risk(beta)
            var_exact = var_exact and evaluate_qbrm(bound, atom) == bound.quantile(beta)
    elapsed = time.monotonic() - t0
    ok = worst_rel <= 1e-6 and var_exact and elapsed < 120.0
    _verdict(
        5,
        ok,
        f"worst relative error {worst_rel:.2e} <= 1e-6 over 100 bounds x "
        f"{{mean, cvar:0.9, interval:0.85,0.95}} at 1e6 grid points; var atoms exact: "
        f"{var_exact}; {elapsed:.1f}s < 120s",
    )


def test_criterion_6_truncation_dominance():
    t0 = time.monotonic()
    details = []
    ok = True
    for n in (50, 100):
        k = truncation_index_one_sided(n, 0.05, 0.9)
        full = GofStatistic.berk_jones(n)
        trunc = GofStatistic.truncated_one_sided(n, k)
        b_full = boundary_from_statistic(full, critical_value(full, 0.05))
        b_trunc = boundary_from_statistic(trunc, critical_value(trunc, 0.05))
        dominates = bool(np.all(b_trunc[k - 1 :] >= b_full[k - 1 :]))
        strict = bool(b_trunc[k - 1] > b_full[k - 1])
        samples = np.random.default_rng(23).uniform(size=n)
        cvar_trunc = evaluate_qbrm(
            cdf_lower_bound(samples, trunc, 0.05, 1.0), QbrmWeight.cvar(0.9)
        )
        cvar_full = evaluate_qbrm(
            cdf_lower_bound(samples, full, 0.05, 1.0), QbrmWeight.cvar(0.9)
        )
        tighter = cvar_trunc <= cvar_full
        ok = ok and dominates and strict and tighter
        details.append(
            f"n={n}: k*={k}, tail dominated={dominates}, strict at k*={strict}, "
            f"cvar {cvar_trunc:.4f} <= {cvar_full:.4f}"
        )
    elapsed = time.monotonic() - t0
    ok = ok and elapsed < 60.0
    _verdict(6, ok, "; ".join(details) + f"; {elapsed:.1f}s < 60s")


def test_criterion_7_selection_validity():
    t0 = time.monotonic()
    m, n, delta, trials, seed = 10, 500, 0.05, 1000, 0
    spec = GofStatistic.berk_jones(n)
    true_risk = {"mean": 0.5, "var:0.9": 0.9, "cvar:0.9": 0.95, "interval:0.85,0.95": 0.9}
    labels = tuple(f"p{i}" for i in range(m))
    boundary = boundary_from_statistic(spec, critical_value(spec, delta / m))
    rng = np.random.default_rng(seed)
    sim_violations = 0
    metric_counts = dict.fromkeys(true_risk, 0)
    breaches = 0
    for _ in range(trials):
        base = rng.uniform(size=n)
        # shifted copies keep each row marginally uniform while sharing data
        rows = np.stack([(base + i / m) % 1.0 for i in range(m)])
        crossed = np.sort(rows, axis=1) < boundary  # uniform CDF is the identity
        any_cross = bool(crossed.any())
        sim_violations += any_cross
        report = select_predictor(
            LossMatrix(labels, rows),
            spec,
            delta,
            CANONICAL_METRICS[0],
            CANONICAL_METRICS[1:],
            x_max=1.0,
        )
        winner_crossed = bool(crossed[labels.index(report.chosen)].any())
        for name, bound_value in report.metric_bounds.items():
            bad = true_risk[name] > bound_value
            metric_counts[name] += bad
            if bad and not winner_crossed:
                breaches += 1
    sigma = math.sqrt(delta * (1.0 - delta) / trials)
    sim_rate = sim_violations / trials
    sim_ok = sim_rate <= delta + 3.0 * sigma
    rates_ok = all(count / trials <= delta for count in metric_counts.values())
    counts_ok = all(count <= sim_violations for count in metric_counts.values())
    elapsed = time.monotonic() - t0
    ok = sim_ok and rates_ok and counts_ok and breaches == 0 and elapsed < 600.0
    _verdict(
        7,
        ok,
        f"simultaneous rate {sim_rate:.4f} <= {delta + 3 * sigma:.4f}; post-hoc metric "
        f"counts {metric_counts} all <= {sim_violations} lcb violations and rates <= 0.05; "
        f"implication breaches {breaches}; {elapsed:.0f}s < 600s",
    )


def test_criterion_8_cli_toy_reproduction(tmp_path):
    t0 = time.monotonic()
    data = tmp_path / "toy.csv"
    data.write_text("A,B\n0.2,0.5\n0.7,0.6\n")
    proc = subprocess.run(
        [
            sys.executable,
            "-m",
            "riskbounds.cli",
            "select",
            "--method",
            "bj",
            "--delta",
            "0.1",
            "--input",
            str(data),
            "--target",
            "mean",
            "--bounded-unit-loss",
        ],
        capture_output=True,
        text=True,
    )
    report = json.loads(proc.stdout) if proc.returncode == 0 else {}
    chosen = report.get("chosen")
    bound = report.get("per_predictor_target_bounds", {}).get("B", math.nan)
    elapsed = time.monotonic() - t0
    ok = (
        proc.returncode == 0
        and chosen == "B"
        and abs(bound - 0.93266) <= 1e-4
        and elapsed < 60.0
    )
    _verdict(
        8,
        ok,
        f"cli exit {proc.returncode}; chose {chosen!r} with mean bound {bound:.5f} "
        f"(pin 0.93266+-1e-4); {elapsed:.1f}s",
    )
