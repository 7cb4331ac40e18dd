from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize

from sinairg import laws, streams
from sinairg.errors import DomainError, TruncationNotConverged

admissible_z = st.floats(-1.2, 3.0, allow_nan=False)


def test_exponents_at_zero():
    e = laws.exponents(0.0)
    assert e.lambda1 == pytest.approx((-3 + math.sqrt(5)) / 2, abs=1e-15)
    assert e.lambda1 == pytest.approx(-0.3819660, abs=1e-7)
    assert e.lambda2 == pytest.approx(-2.6180340, abs=1e-7)
    assert e.c1 == pytest.approx(0.5 + 7 * math.sqrt(5) / 30, abs=1e-15)


def test_exponents_at_one():
    e = laws.exponents(1.0)
    assert (e.lambda1, e.lambda2, e.c1, e.c2) == (0.0, -3.0, 1.0, 0.0)


@given(admissible_z)
def test_root_identities(z):
    e = laws.exponents(z)
    assert e.c1 + e.c2 == pytest.approx(1.0, abs=1e-12)
    assert e.lambda1 + e.lambda2 == pytest.approx(-3.0, abs=1e-12)
    # the two roots of l^2 + 3l + (1 - z) = 0
    assert e.lambda1 * e.lambda2 == pytest.approx(1.0 - z, abs=1e-12)


def test_complex_and_cut():
    e = laws.exponents(0.3 + 0.4j)
    assert e.c1 + e.c2 == pytest.approx(1.0)
    for z in (-1.25, -2.0, complex(-3.0, 0.0)):
        with pytest.raises(DomainError):
            laws.exponents(z)


@given(admissible_z)
def test_genfun_at_one(z):
    assert laws.genfun(1.0, z) == pytest.approx(1.0, abs=1e-12)


def test_genfun_values():
    assert laws.genfun(math.e, 0.0) == pytest.approx(0.6958, abs=5e-5)
    assert laws.genfun(100.0, 0.0) == pytest.approx(0.175959, abs=1e-6)
    assert np.allclose(laws.genfun(np.array([1.0, 7.0, 1e4]), 1.0), 1.0)
    with pytest.raises(DomainError):
        laws.genfun(0.5, 0.0)
    with pytest.raises(DomainError):
        laws.b_coeff(2.0, 1.0)


@settings(max_examples=50)
@given(st.floats(0.0, 0.99), st.floats(1.0, 1e4), st.floats(1.0, 1e4))
def test_genfun_nonincreasing(z, x1, x2):
    lo, hi = sorted((x1, x2))
    assert laws.genfun(hi, z) <= laws.genfun(lo, z) + 1e-13


def test_mean_count_grows_like_a_third_log():
    # d/dz a(x, z) at z = 1 is E k(x)
    h = 1e-6
    def mean_k(x):
        return (laws.genfun(x, 1 + h) - laws.genfun(x, 1 - h)) / (2 * h)
    slope = (mean_k(1e12) - mean_k(1e8)) / (math.log(1e12) - math.log(1e8))
    assert slope == pytest.approx(1.0 / 3.0, abs=1e-4)


def test_count_pmf_sums_and_matches_survival():
    p = laws.count_pmf(100.0, 60)
    assert p.sum() == pytest.approx(1.0, abs=1e-10)
    assert p[0] == pytest.approx(laws.genfun(100.0, 0.0), abs=1e-12)
    assert np.all(p > -1e-12)


# ------------------------------------------------------------ ratio law


def test_ratio_cdf_limits():
    assert laws.ratio_cdf(1.0) == 0.0
    assert laws.ratio_cdf(1e300) == pytest.approx(1.0)
    r = np.geomspace(1, 1e6, 200)
    assert np.all(np.diff(laws.ratio_cdf(r)) >= 0)


def test_ratio_density_integrates_to_cdf():
    for r in (2.0, 30.0, 1e3):
        q = integrate.quad(laws.ratio_density, 1.0, r, limit=200)[0]
        assert q == pytest.approx(laws.ratio_cdf(r), abs=1e-10)


def test_hypoexponential_identity():
    # rates -l1, -l2 whose product is 1
    m1, m2 = -laws.LAM1, -laws.LAM2
    assert m1 * m2 == pytest.approx(1.0, abs=1e-15)
    y = np.linspace(0.0, 40.0, 401)
    hypo = m1 * m2 / (m2 - m1) * (np.exp(-m1 * y) - np.exp(-m2 * y))
    assert np.max(np.abs(hypo - laws.ratio_density(np.exp(y)) * np.exp(y))) < 1e-12
    assert np.max(np.abs(laws.log_ratio_density(y) - hypo)) < 1e-12


def test_log_ratio_quantile_inverts_cdf():
    p = np.linspace(0.0, 0.999999, 101)
    assert np.allclose(laws.log_ratio_cdf(laws.log_ratio_quantile(p)), p, atol=1e-12)


def test_transition_density():
    for x in (1.0, 3.0):
        q = integrate.quad(lambda y: laws.transition_density(y, x), x, np.inf, limit=200)[0]
        assert q == pytest.approx(1.0, abs=1e-8)
    assert laws.transition_density(2.0 * (1 + 1e-12), 2.0) == pytest.approx(0.0, abs=1e-9)
    # h(y) dy with y = r x equals f(r) dr
    assert laws.transition_density(6.0, 2.0) * 2.0 == pytest.approx(laws.ratio_density(3.0))


def test_samplers_are_stream_functions():
    a = laws.sample_ratio(streams.rng_for(1, streams.SAMPLER, 0), 5)
    b = laws.sample_ratio(streams.rng_for(1, streams.SAMPLER, 0), 5)
    assert np.array_equal(a, b)
    assert np.all(a >= 1)


def test_ratio_sampler_matches_cdf():
    from sinairg import verify

    r = laws.sample_ratio(streams.rng_for(2, streams.SAMPLER, 0), 100_000)
    assert verify.ks_distance(r, laws.ratio_cdf) < verify.ks_critical(r.size)
    assert np.log(r).mean() == pytest.approx(3.0, abs=0.05)


# ------------------------------------------------------------ central excess


def test_central_excess_density():
    y = np.linspace(0, 20, 201)
    assert laws.central_excess_density(0.0) == pytest.approx(1.0 / 3.0)
    mix = np.exp(-y) / 3 + 2 * y * np.exp(-y) / 3
    assert np.max(np.abs(mix - laws.central_excess_density(y))) < 1e-15
    mean = integrate.quad(lambda t: t * laws.central_excess_density(t), 0, np.inf)[0]
    assert mean == pytest.approx(5.0 / 3.0, abs=1e-10)


def test_central_excess_sampler_mean():
    s = laws.sample_central_excess(streams.rng_for(4, streams.SAMPLER, 0), 400_000)
    assert s.mean() == pytest.approx(5.0 / 3.0, abs=3 * math.sqrt(17 / 9) / math.sqrt(s.size) + 1e-3)


# ------------------------------------------------------------ slope lengths


def test_length_density_integrals():
    def quad(g):
        return integrate.quad(lambda t: g(t) * laws.slope_length_density(t), 0.01, np.inf,
                              epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    assert quad(lambda t: 1.0) == pytest.approx(1.0, abs=1e-8)
    assert quad(lambda t: t) == pytest.approx(1.0, abs=1e-8)
    assert quad(lambda t: math.exp(-t / 2)) == pytest.approx(1.0 / math.cosh(1.0), abs=1e-8)
    # size-biased law: mass E l = 1, mean E l^2 = 5/3
    assert quad(lambda t: t * t) == pytest.approx(5.0 / 3.0, abs=1e-6)


def test_second_moment_from_laplace_transform():
    h = 1e-3
    d2 = (laws.length_laplace(2 * h) - 2 * laws.length_laplace(h) + 1.0) / (h * h)
    assert d2 == pytest.approx(5.0 / 3.0, abs=1e-2)


def test_length_density_nonnegative():
    t = np.geomspace(0.05, 50, 500)
    assert np.all(laws.slope_length_density(t) >= 0)


def test_length_density_budget():
    with pytest.raises(TruncationNotConverged):
        laws.slope_length_density(1e-9)


# ------------------------------------------------------------ phi, psi


def test_phi_psi_values():
    phi, psi = laws.phi_psi(0.5)
    assert phi == pytest.approx(1 / math.tanh(1) - 1, abs=1e-7)
    assert psi == pytest.approx(1 / math.sinh(1), abs=1e-7)
    phi0, psi0 = laws.phi_psi(1e-12)
    assert phi0 == pytest.approx(0.0, abs=1e-11) and psi0 == pytest.approx(1.0, abs=1e-11)


@pytest.mark.parametrize("x", [0.0, 1.0, 2.0])
def test_phi_psi_derivative(x):
    def g(s):
        phi, psi = laws.phi_psi(s)
        return psi * math.exp(-x * phi)
    h = 1e-4
    d = (g(h) - 1.0) / h
    assert d == pytest.approx(-(2 * x + 1) / 3, abs=1e-3)


def test_phi_psi_branches_agree():
    s = laws._SMALL_S
    lo = np.array(laws.phi_psi(s * (1 - 1e-9)))
    hi = np.array(laws.phi_psi(s * (1 + 1e-9)))
    assert np.allclose(lo, hi, atol=1e-12)


# ------------------------------------------------------------ rate function


def test_rate_function_values():
    assert laws.rate_function(0.0) == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-15)
    assert laws.rate_function(0.0) == pytest.approx(-laws.LAM1, abs=1e-15)
    assert laws.rate_function(1.0) == pytest.approx(math.log(5) - 1, abs=1e-14)
    assert laws.rate_function(-0.1) == math.inf
    res = optimize.minimize_scalar(laws.rate_function, bounds=(0, 3), method="bounded",
                                   options=dict(xatol=1e-10))
    assert res.x == pytest.approx(1.0 / 3.0, abs=1e-6)
    assert laws.rate_function(1.0 / 3.0) == pytest.approx(0.0, abs=1e-14)


def test_rate_function_convex_and_nonnegative():
    a = np.linspace(0.0, 5.0, 2001)
    v = laws.rate_function(a)
    assert np.all(v >= -1e-15)
    assert np.all(np.diff(v, 2) >= -1e-12)


def test_rate_function_is_legendre_transform():
    th = np.linspace(-5, 3, 40001)
    for a in (0.2, 1.0, 2.0):
        assert np.max(a * th - laws.scaled_cgf(th)) == pytest.approx(laws.rate_function(a), abs=1e-6)


# ------------------------------------------------------------ first flip


def test_first_flip_cdf_and_median():
    assert laws.first_flip_cdf(1.0) == pytest.approx(0.0, abs=1e-15)
    med = optimize.brentq(lambda x: laws.genfun(x, 0.0) - 0.5, 1.0, 100.0, xtol=1e-14)
    assert laws.first_flip_quantile(0.5) == pytest.approx(med, rel=1e-10)
    assert med == pytest.approx(6.49, abs=0.005)


@settings(max_examples=100)
@given(st.floats(1e-300, 1.0, exclude_min=True))
def test_first_flip_quantile_roundtrip(u):
    s = laws.first_flip_log_quantile(u)
    a = laws.C1 * math.exp(laws.LAM1 * s) + laws.C2 * math.exp(laws.LAM2 * s)
    assert a == pytest.approx(u, rel=1e-10)


def test_first_flip_sample_median():
    x = laws.sample_first_flip(streams.rng_for(5, streams.SAMPLER, 0), 200_000)
    assert np.all(x >= 1.0)
    assert np.median(x) == pytest.approx(laws.first_flip_quantile(0.5), abs=0.1)


# ------------------------------------------------------------ residuals


@pytest.mark.parametrize("x", [1.5, 2.0, 5.0, 10.0])
@pytest.mark.parametrize("z", [-0.5, 0.0, 0.5])
def test_ode_residual(x, z):
    ra, rb = laws.ode_residual(x, z)
    assert abs(ra) < 1e-9 and abs(rb) < 1e-9


@pytest.mark.parametrize("y", [0.0, 1.0, 3.0])
@pytest.mark.parametrize("z", [-0.5, 0.0, 0.5])
def test_initial_condition(y, z):
    assert laws.central_excess_genfun(1.0, y, z) == pytest.approx((2 * y / 3 + 1) * math.exp(-y), abs=1e-12)


def test_pde_residual():
    assert abs(laws.pde_residual(2.0, 0.7, 0.3, 1e-4)) < 1e-5


def test_pde_residual_detects_a_wrong_solution(monkeypatch):
    monkeypatch.setattr(laws, "b_coeff", lambda x, z: 0.0 * x)
    assert abs(laws.pde_residual(2.0, 0.7, 0.3, 1e-4)) > 1e-3
