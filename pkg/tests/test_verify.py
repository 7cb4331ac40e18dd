from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from sinairg import laws, verify
from sinairg.errors import EmptySample


def uniform(v):
    return np.clip(v, 0.0, 1.0)


def test_ks_single_point_at_median():
    assert verify.ks_distance([0.5], uniform) == 0.5


def test_ks_two_points():
    assert verify.ks_distance([0.25, 0.75], uniform) == pytest.approx(0.25)


def test_ks_empty():
    with pytest.raises(EmptySample):
        verify.ks_distance([], uniform)


@settings(max_examples=50)
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=60))
def test_ks_matches_scipy(xs):
    cdf = stats.norm(0, 5).cdf
    assert verify.ks_distance(xs, cdf) == pytest.approx(stats.kstest(xs, cdf).statistic, abs=1e-12)


@settings(max_examples=50)
@given(st.lists(st.floats(0.01, 20), min_size=1, max_size=60))
def test_ks_reparameterization_invariant(xs):
    d1 = verify.ks_distance(xs, laws.exp_cdf)
    d2 = verify.ks_distance(np.log(xs), lambda y: laws.exp_cdf(np.exp(y)))
    assert d1 == pytest.approx(d2, abs=1e-12)


def test_ks_rejection_rate():
    rng = np.random.default_rng(0)
    n, trials = 100_000, 100
    bad = sum(verify.ks_distance(rng.random(n), uniform) >= verify.ks_critical(n) for _ in range(trials))
    # about 1 rejection expected; 6 or more has probability below 1e-3
    assert bad <= 5


def test_genfun_estimate_trivial_cases():
    e = verify.estimate_genfun(np.zeros(10, dtype=int), 0.3)
    assert (e.value, e.stderr, e.n) == (1.0, 0.0, 10)
    e = verify.estimate_genfun([0, 3, 5], 1.0)
    assert (e.value, e.stderr) == (1.0, 0.0)
    with pytest.raises(EmptySample):
        verify.estimate_genfun([], 0.5)
    with pytest.raises(ValueError):
        verify.estimate_genfun([1], 1.5)


@given(st.lists(st.integers(0, 6), min_size=2, max_size=50))
def test_genfun_at_zero_is_zero_frequency(k):
    assert verify.estimate_genfun(k, 0.0).value == pytest.approx(np.mean(np.array(k) == 0))
    assert verify.survival_estimate(k).value == pytest.approx(np.mean(np.array(k) == 0))


def test_mean_estimate_stderr():
    e = verify.mean_estimate([1.0, 2.0, 3.0, 4.0])
    assert e.stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert e.within(2.5, 0.0)


@given(st.floats(-3, 3), st.floats(0.1, 10))
def test_loglog_slope_exact_power_law(s, c):
    x = np.array([1.0, 3.0, 10.0, 40.0])
    assert verify.loglog_slope(np.column_stack((x, c * x**s))) == pytest.approx(s, abs=1e-9)


def test_loglog_slope_on_survival_law():
    x = np.geomspace(100, 1e4, 9)
    slope = verify.loglog_slope(np.column_stack((x, laws.genfun(x, 0.0))))
    assert abs(slope - laws.LAM1) < 0.005


def test_loglog_slope_errors():
    with pytest.raises(ValueError):
        verify.loglog_slope([(5.0, 0.1), (5.0, 0.2)])
    with pytest.raises(ValueError):
        verify.loglog_slope([(5.0, 0.1)])
    with pytest.raises(ValueError):
        verify.loglog_slope([(5.0, 0.0), (6.0, 0.2)])


def test_correlation():
    a = np.arange(10.0)
    assert verify.correlation(a, 2 * a) == pytest.approx(1.0)
    with pytest.raises(EmptySample):
        verify.correlation([1.0], [2.0])
