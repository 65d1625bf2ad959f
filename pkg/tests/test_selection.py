import numpy as np
import pytest

from riskbounds.bounds import GofStatistic, cdf_lower_bound
from riskbounds.qbrm import QbrmWeight, evaluate_qbrm
from riskbounds.selection import (
    LossMatrix,
    groupwise_select,
    select_predictor,
)


def toy_losses():
    return LossMatrix(("A", "B"), np.array([[0.2, 0.7], [0.5, 0.6]]))


class TestLossMatrix:
    def test_shape_properties(self):
        losses = toy_losses()
        assert losses.num_predictors == 2
        assert losses.num_samples == 2

    @pytest.mark.parametrize(
        "labels,values",
        [
            (("A",), np.array([0.1, 0.2])),
            (("A", "A"), np.zeros((2, 3))),
            (("A", "B"), np.array([[0.1, np.nan], [0.2, 0.3]])),
            (("A", "B", "C"), np.zeros((2, 3))),
            ((), np.zeros((0, 3))),
        ],
    )
    def test_rejects_malformed(self, labels, values):
        with pytest.raises(ValueError):
            LossMatrix(labels, values)

    def test_values_read_only(self):
        losses = toy_losses()
        with pytest.raises(ValueError):
            losses.values[0, 0] = 9.9

    def test_from_threshold_grid(self):
        scores = np.array([[0.9, 0.1], [0.4, 0.8]])
        truths = np.array([1, 2])
        losses = LossMatrix.from_threshold_grid(
            scores,
            truths,
            (0.5,),
            lambda pred, truth: 0.0 if int(truth) in pred else 1.0,
        )
        assert losses.labels == ("t=0.5",)
        # both samples score their true class above 0.5
        assert np.allclose(losses.values, [[0.0, 0.0]])


class TestSelectPredictor:
    def test_worked_example_chooses_b(self):
        report = select_predictor(
            toy_losses(),
            GofStatistic.berk_jones(2),
            0.1,
            QbrmWeight.mean(),
            x_max=1.0,
        )
        assert report.chosen == "B"
        assert report.delta_per_predictor == pytest.approx(0.05)
        assert report.target_bounds[0] == pytest.approx(0.943722, abs=1e-6)
        assert report.target_bounds[1] == pytest.approx(0.932712, abs=1e-6)
        assert report.chosen_target_bound == report.target_bounds[1]

    def test_single_predictor_matches_direct_bound(self):
        samples = np.random.default_rng(31).uniform(size=25)
        losses = LossMatrix(("only",), samples[None, :])
        spec = GofStatistic.berk_jones(25)
        report = select_predictor(losses, spec, 0.05, QbrmWeight.cvar(0.8), x_max=1.0)
        direct = evaluate_qbrm(
            cdf_lower_bound(samples, spec, 0.05, x_max=1.0), QbrmWeight.cvar(0.8)
        )
        assert report.chosen == "only"
        assert report.chosen_target_bound == pytest.approx(direct, abs=1e-12)

    def test_tie_goes_to_first_label(self):
        losses = LossMatrix(("x", "y"), np.array([[0.3, 0.4], [0.3, 0.4]]))
        report = select_predictor(
            losses, GofStatistic.berk_jones(2), 0.1, QbrmWeight.mean(), x_max=1.0
        )
        assert report.chosen == "x"

    def test_reported_metrics_cover_target_and_extras(self):
        report = select_predictor(
            toy_losses(),
            GofStatistic.berk_jones(2),
            0.1,
            QbrmWeight.mean(),
            report_metrics=(QbrmWeight.value_at_risk(0.5),),
            x_max=1.0,
        )
        assert set(report.metric_bounds) == {"mean", "var:0.5"}
        assert report.metric_bounds["mean"] == report.chosen_target_bound

    def test_looser_delta_gives_smaller_bound(self):
        rng = np.random.default_rng(32)
        losses = LossMatrix(("A", "B"), rng.uniform(size=(2, 60)))
        spec = GofStatistic.berk_jones(60)
        tight = select_predictor(losses, spec, 0.01, QbrmWeight.mean(), x_max=1.0)
        loose = select_predictor(losses, spec, 0.2, QbrmWeight.mean(), x_max=1.0)
        assert loose.chosen_target_bound <= tight.chosen_target_bound + 1e-15

    def test_sample_count_must_match_spec(self):
        with pytest.raises(ValueError):
            select_predictor(
                toy_losses(), GofStatistic.berk_jones(3), 0.1, QbrmWeight.mean()
            )

    def test_unbounded_loss_gives_infinite_mean_bound(self):
        report = select_predictor(
            toy_losses(), GofStatistic.berk_jones(2), 0.1, QbrmWeight.value_at_risk(0.1)
        )
        assert np.isfinite(report.chosen_target_bound)


class TestGroupwise:
    def rig(self):
        rng = np.random.default_rng(33)
        losses = LossMatrix(("A", "B"), rng.uniform(size=(2, 30)))
        groups = ["g1"] * 18 + ["g2"] * 12
        return losses, groups

    def test_matches_manual_partition(self):
        losses, groups = self.rig()
        spec = GofStatistic.berk_jones(30)
        results = groupwise_select(
            losses, groups, spec, 0.1, QbrmWeight.mean(), x_max=1.0
        )
        assert set(results) == {"g1", "g2"}
        mask = np.asarray(groups) == "g1"
        sub = LossMatrix(("A", "B"), losses.values[:, mask])
        manual = select_predictor(
            sub, GofStatistic.berk_jones(18), 0.1, QbrmWeight.mean(), x_max=1.0
        )
        assert results["g1"].chosen == manual.chosen
        assert results["g1"].chosen_target_bound == pytest.approx(
            manual.chosen_target_bound, abs=1e-12
        )

    def test_bonferroni_across_groups_splits_budget(self):
        losses, groups = self.rig()
        spec = GofStatistic.berk_jones(30)
        per_group = groupwise_select(
            losses, groups, spec, 0.1, QbrmWeight.mean(), x_max=1.0
        )
        split = groupwise_select(
            losses,
            groups,
            spec,
            0.1,
            QbrmWeight.mean(),
            x_max=1.0,
            bonferroni_across_groups=True,
        )
        for name in ("g1", "g2"):
            assert split[name].delta == pytest.approx(per_group[name].delta / 2)
            assert (
                split[name].chosen_target_bound
                >= per_group[name].chosen_target_bound - 1e-15
            )

    def test_group_list_length_must_match(self):
        losses, _ = self.rig()
        with pytest.raises(ValueError):
            groupwise_select(
                losses, ["g1"] * 7, GofStatistic.berk_jones(30), 0.1, QbrmWeight.mean()
            )

    def test_truncated_window_requires_matching_size(self):
        losses, groups = self.rig()
        spec = GofStatistic.truncated_one_sided(30, 25)
        with pytest.raises(ValueError):
            groupwise_select(losses, groups, spec, 0.1, QbrmWeight.mean(), x_max=1.0)
