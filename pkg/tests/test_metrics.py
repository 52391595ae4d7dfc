import logging
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from risbeam.beamforming import SinrReport
from risbeam.metrics import (
    RateReport,
    alpha_fair_throughput,
    alpha_utility,
    improvement_percent,
    per_user_rates,
    rate_report,
    sum_rate,
)

rates_st = st.lists(st.floats(1.0, 1e9), min_size=1, max_size=8)


def test_rate_examples():
    assert per_user_rates(np.array([1.0]), 1.0)[0] == 1.0
    assert per_user_rates(np.array([0.0]), 1.0)[0] == 0.0
    assert per_user_rates(np.array([1.0]), 400e6)[0] == pytest.approx(400e6)
    with pytest.raises(ValueError):
        per_user_rates(np.array([1.0]), 0.0)


def test_rates_skip_uplink_streams():
    rep = SinrReport(np.array([100.0, 1.0, 3.0]), np.zeros(3), np.zeros(3), 1.0)
    np.testing.assert_allclose(per_user_rates(rep, 1.0, k_sat=1), [1.0, 2.0])
    assert sum_rate(rep, 2.0, k_sat=1) == pytest.approx(6.0)


@given(st.lists(st.floats(0.0, 1e6), min_size=1, max_size=6), st.floats(0.0, 1e6))
def test_rates_monotone(gammas, bump):
    g = np.array(gammas)
    higher = g.copy()
    higher[0] += bump
    assert np.all(per_user_rates(higher, 10.0) >= per_user_rates(g, 10.0))


def test_fair_throughput_alpha_zero_is_sum():
    r = np.array([1e7, 3e7, 5e6])
    assert alpha_fair_throughput(r, 0.0)[1] == pytest.approx(r.sum())
    assert alpha_fair_throughput(r, 0.0)[0] == pytest.approx(r.sum())


@given(st.floats(1.0, 1e9), st.integers(1, 6), st.floats(0.0, 5.0))
def test_equal_rates_give_sum_for_every_alpha(r, k, alpha):
    assert alpha_fair_throughput([r] * k, alpha)[1] == pytest.approx(k * r, rel=1e-9)


def test_known_means():
    r = [1e7, 4e7]
    assert alpha_fair_throughput(r, 1.0)[1] == pytest.approx(2 * 2e7)
    assert alpha_fair_throughput(r, 2.0)[1] == pytest.approx(2 * 1.6e7)
    assert alpha_fair_throughput(r, 1.0)[0] == pytest.approx(math.log(1e7) + math.log(4e7))


@given(rates_st, st.floats(0.0, 3.0), st.floats(0.01, 2.0))
def test_fairness_penalises_spread(rates, a1, extra):
    lo = alpha_fair_throughput(rates, a1)[1]
    hi = alpha_fair_throughput(rates, a1 + extra)[1]
    assert hi <= lo * (1 + 1e-9)
    assert lo <= sum(rates) * (1 + 1e-9)


@given(st.lists(st.floats(1.0, 1e6), min_size=2, max_size=2),
       st.lists(st.floats(1.0, 1e6), min_size=2, max_size=2), st.floats(0.1, 4.0))
def test_utility_midpoint_concave(x, y, alpha):
    x, y = np.array(x), np.array(y)
    if np.max(np.abs(x - y)) < 1e-3 * np.max(np.abs(x)):
        return
    mid = alpha_utility((x + y) / 2, alpha)
    chord = (alpha_utility(x, alpha) + alpha_utility(y, alpha)) / 2
    assert mid >= chord - 1e-12 * max(1.0, abs(chord))
    assert mid > chord or math.isclose(mid, chord, rel_tol=1e-9)


def test_zero_rate_floor_warns(caplog):
    with caplog.at_level(logging.WARNING):
        u, tp = alpha_fair_throughput([0.0, 4.0], 1.0)
    assert "flooring" in caplog.text
    assert u == pytest.approx(math.log(4.0))
    assert tp == pytest.approx(2 * 2.0)


def test_negative_alpha_rejected():
    with pytest.raises(ValueError):
        alpha_fair_throughput([1.0], -0.5)


def test_improvement_examples():
    assert improvement_percent(3.0, 3.0) == 0.0
    assert improvement_percent(4.293, 3.856) == pytest.approx(11.33, abs=0.01)
    assert improvement_percent(4.048, 3.647) == pytest.approx(11.0, abs=0.01)
    with pytest.raises(ValueError):
        improvement_percent(1.0, 0.0)


@given(st.floats(1e-3, 1e12))
def test_improvement_self_is_zero(a):
    assert improvement_percent(a, a) == 0.0


def test_rate_report_invariants():
    rep = rate_report(np.array([1.0, 3.0]), 1.0, 1.0)
    assert rep.sum_rate == pytest.approx(3.0)
    with pytest.raises(ValueError):
        RateReport(np.array([1.0, 2.0]), 4.0, 1.0, 3.0)
    with pytest.raises(ValueError):
        RateReport(np.array([-1.0]), -1.0, 1.0, 0.0)
