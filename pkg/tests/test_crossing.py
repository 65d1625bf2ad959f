import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from riskbounds.betainc import reg_inc_beta
from riskbounds.crossing import noncrossing_prob


def test_single_constraint():
    assert noncrossing_prob([0.3]) == pytest.approx(0.7, abs=1e-15)


def test_two_constraints():
    # P(U_(1) >= 0.2, U_(2) >= 0.5) = (1 - b2)(1 + b2 - 2 b1)
    assert noncrossing_prob([0.2, 0.5]) == pytest.approx(0.55, abs=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3, 10, 50])
def test_zero_boundary_never_crosses(n):
    assert noncrossing_prob(np.zeros(n)) == 1.0


@pytest.mark.parametrize("n", [1, 2, 5])
def test_unit_boundary_always_crosses(n):
    assert noncrossing_prob(np.ones(n)) == 0.0


def test_closed_form_n1():
    rng = np.random.default_rng(101)
    for b in rng.uniform(0.0, 1.0, size=100):
        assert noncrossing_prob([b]) == pytest.approx(1.0 - b, abs=1e-12)


def test_closed_form_n2():
    rng = np.random.default_rng(102)
    for _ in range(100):
        b1, b2 = np.sort(rng.uniform(0.0, 1.0, size=2))
        expected = (1.0 - b2) * (1.0 + b2 - 2.0 * b1)
        assert noncrossing_prob([b1, b2]) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("n,k,level", [(5, 1, 0.3), (5, 3, 0.4), (8, 8, 0.7), (12, 4, 0.15)])
def test_flat_tail_matches_single_order_statistic(n, k, level):
    # constraints b_i = level for i >= k bind only through U_(k), so the
    # probability is the beta upper tail of the k-th order statistic
    b = np.zeros(n)
    b[k - 1 :] = level
    expected = 1.0 - reg_inc_beta(k, n - k + 1, level)
    assert noncrossing_prob(b) == pytest.approx(expected, abs=1e-12)


def test_leading_zeros_are_inert():
    rng = np.random.default_rng(103)
    tail = np.sort(rng.uniform(0.1, 0.9, size=3))
    padded = np.concatenate([np.zeros(2), tail])
    plain = np.concatenate([np.full(2, 1e-300), tail])
    assert noncrossing_prob(padded) == pytest.approx(noncrossing_prob(plain), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    b=hnp.arrays(
        float,
        st.integers(min_value=1, max_value=12),
        elements=st.floats(min_value=0.0, max_value=0.99),
    ),
    bump=st.integers(min_value=0, max_value=11),
    shrink=st.floats(min_value=0.1, max_value=1.0),
)
def test_lowering_a_level_cannot_hurt(b, bump, shrink):
    b = np.sort(b)
    idx = bump % b.size
    lowered = b.copy()
    lowered[: idx + 1] = np.minimum(lowered[: idx + 1], lowered[idx] * shrink)
    assert noncrossing_prob(lowered) >= noncrossing_prob(b) - 1e-12


def test_monte_carlo_agreement():
    rng = np.random.default_rng(104)
    n, trials = 4, 200_000
    b = np.sort(rng.uniform(0.0, 0.8, size=n))
    exact = noncrossing_prob(b)
    u = np.sort(rng.uniform(size=(trials, n)), axis=1)
    hits = np.all(u >= b, axis=1).mean()
    se = np.sqrt(exact * (1.0 - exact) / trials)
    assert abs(hits - exact) <= 4.0 * se + 1e-9


@pytest.mark.parametrize(
    "bad",
    [
        [],
        [0.5, 0.2],
        [-0.1, 0.5],
        [0.2, 1.5],
        [np.nan, 0.5],
        [[0.1, 0.2]],
    ],
)
def test_rejects_malformed_boundaries(bad):
    with pytest.raises(ValueError):
        noncrossing_prob(bad)


def test_probability_stays_in_unit_interval():
    rng = np.random.default_rng(105)
    for n in (1, 3, 7, 20):
        for _ in range(20):
            b = np.sort(rng.uniform(0.0, 1.0, size=n))
            p = noncrossing_prob(b)
            assert 0.0 <= p <= 1.0
