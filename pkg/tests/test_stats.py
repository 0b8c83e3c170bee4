import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from annulus_rmt.errors import AccuracyError, DomainError
from annulus_rmt.kernel import KernelEvaluator, density_rho1
from annulus_rmt.params import MatrixDims, ModelParams
from annulus_rmt.stats import (
    CATALOG,
    FluctuationReport,
    RadialStatistic,
    char_fn_exact,
    constant_statistic,
    gaussian_limit_char_fn,
    mean_exact,
    mean_limit_per_particle,
    monte_carlo_fluctuations,
    numerical_derivative,
    polynomial_statistic,
    variance_functional_exact,
    variance_limit,
)

S = CATALOG["s"]
SFRAC = CATALOG["s_over_1_plus_s"]
LOG1P = CATALOG["log1p_s"]
ONE = constant_statistic(1.0)


def ev_for(N, Q, q):
    return KernelEvaluator(ModelParams(N, Q, q))


def beta_prime_sum_variance(N, Q, q):
    # |z_j|^2 are independent beta-prime(a_j, b_j); Var = a(a+b-1)/((b-2)(b-1)^2)
    p = ModelParams(N, Q, q)
    a = p.QN + np.arange(1, N + 1)
    b = p.L + 1 - a
    return float(np.sum(a * (a + b - 1) / ((b - 2) * (b - 1) ** 2)))


# ---------------------------------------------------------------- statistics


def test_catalog_derivatives_match_finite_differences():
    for stat in CATALOG.values():
        for s in (0.3, 1.0, 2.5):
            assert stat.derivative(s) == pytest.approx(numerical_derivative(stat.alpha, s), rel=1e-7, abs=1e-10)


def test_statistic_without_derivative_uses_richardson():
    stat = RadialStatistic(alpha=lambda s: np.sin(s), description="sin")
    assert stat.derivative(0.7) == pytest.approx(math.cos(0.7), rel=1e-9)


def test_numerical_derivative_rejects_rough_function():
    with pytest.raises(AccuracyError):
        numerical_derivative(lambda s: abs(s - 1.0) ** 0.5, 1.0 + 1e-9)


def test_polynomial_statistic():
    stat = polynomial_statistic([1.0, -2.0, 3.0])  # 1 - 2s + 3s^2
    assert stat.alpha(2.0) == pytest.approx(9.0)
    assert stat.derivative(2.0) == pytest.approx(10.0)
    assert stat.growth == 2


# ---------------------------------------------------------------- means


@pytest.mark.parametrize("N, Q, q", [(5, 0, 0), (10, 1, 1), (20, 0.5, 2)])
def test_mean_of_one_is_N(N, Q, q):
    assert mean_exact(ONE, ev_for(N, Q, q)) == pytest.approx(N, rel=1e-12)


@pytest.mark.parametrize("N", [3, 10, 40])
def test_mean_spherical_closed_form(N):
    assert mean_exact(SFRAC, ev_for(N, 0, 0)) == pytest.approx(N / 2, rel=1e-10)


@pytest.mark.parametrize("N, Q, q", [(10, 1, 1), (8, 0.5, 2), (12, 2, 0.5)])
@pytest.mark.parametrize("name", ["s_over_1_plus_s", "log1p_s"])
def test_mean_matches_density_quadrature(N, Q, q, name):
    ev, stat = ev_for(N, Q, q), CATALOG[name]
    p = ev.params
    f = lambda r: 2 * math.pi * stat.alpha(r * r) * density_rho1(r, ev) * r
    pts = [p.r_Q, p.r_q]
    total = sum(integrate.quad(f, lo, hi, epsabs=0, epsrel=1e-11, limit=200)[0]
                for lo, hi in [(0, pts[0]), (pts[0], pts[1]), (pts[1], np.inf)])
    assert mean_exact(stat, ev) == pytest.approx(total, rel=1e-8)


def test_mean_of_s_matches_beta_prime_means():
    N, Q, q = 15, 1, 1
    p = ModelParams(N, Q, q)
    a = p.QN + np.arange(1, N + 1)
    b = p.L + 1 - a
    assert mean_exact(S, ev_for(N, Q, q)) == pytest.approx(float(np.sum(a / (b - 1))), rel=1e-10)


def test_divergent_mean_reported():
    # q = 0 leaves the last radial law with tail s^{-2}: E s diverges
    with pytest.raises(DomainError, match="j = 6"):
        mean_exact(S, ev_for(6, 1, 0))


def test_mean_limit_examples():
    assert mean_limit_per_particle(ONE, ModelParams(10, 1, 1)) == pytest.approx(1.0, rel=1e-12)
    # 3 int_{1/2}^{2} s/(1+s)^2 ds with antiderivative log(1+s) + 1/(1+s);
    # the prefactor 1 + Q + q = 3 is the one that makes alpha = 1 give 1
    F = lambda s: math.log1p(s) + 1 / (1 + s)
    assert mean_limit_per_particle(S, ModelParams(10, 1, 1)) == pytest.approx(3 * (F(2) - F(0.5)), rel=1e-12)
    # Q = q = 0 is the whole sphere
    assert mean_limit_per_particle(SFRAC, ModelParams(10, 0, 0)) == pytest.approx(0.5, rel=1e-12)


def test_mean_limit_agrees_with_exact_at_N200():
    ev = ev_for(200, 1, 1)
    for stat in (S, SFRAC, LOG1P):
        assert mean_exact(stat, ev) / 200 == pytest.approx(mean_limit_per_particle(stat, ev.params), rel=1e-2)


def test_mean_offset_bounded_in_N():
    offsets = [mean_exact(LOG1P, ev_for(N, 1, 1)) - N * mean_limit_per_particle(LOG1P, ModelParams(N, 1, 1))
               for N in (20, 40, 80, 160)]
    assert max(abs(o) for o in offsets) < 1.0
    assert abs(offsets[-1] - offsets[-2]) < abs(offsets[1] - offsets[0])


# ---------------------------------------------------------------- variances


@pytest.mark.parametrize("N, Q, q", [(5, 1, 1), (20, 1, 1), (30, 0.5, 2), (12, 2, 1.5)])
def test_variance_of_s_matches_beta_prime(N, Q, q):
    assert variance_functional_exact(S, ev_for(N, Q, q)) == pytest.approx(beta_prime_sum_variance(N, Q, q), rel=1e-9)


def test_variance_of_constant_is_exactly_zero():
    assert variance_functional_exact(constant_statistic(3.7), ev_for(20, 1, 1)) == 0.0


def test_variance_of_s_over_1_plus_s_closed_form():
    # s/(1+s) is Beta(a_j, b_j) distributed
    N, Q, q = 25, 0.4, 1.2
    p = ModelParams(N, Q, q)
    a = p.QN + np.arange(1, N + 1)
    b = p.L + 1 - a
    ref = float(np.sum(a * b / ((a + b) ** 2 * (a + b + 1))))
    assert variance_functional_exact(SFRAC, ev_for(N, Q, q)) == pytest.approx(ref, rel=1e-9)


def test_divergent_variance_reported():
    # second moment of s needs b_j > 2; b_N = qN + 1 = 2 here
    with pytest.raises(DomainError, match="divergent"):
        variance_functional_exact(S, ev_for(4, 1, 0.25))


def test_variance_bounded_and_converging():
    vals = [variance_functional_exact(SFRAC, ev_for(N, 1, 1)) for N in (20, 50, 100, 200)]
    lim = variance_limit(SFRAC, ModelParams(200, 1, 1))
    errs = [abs(v - lim) for v in vals]
    assert all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))
    assert max(vals) < 2 * lim


@settings(max_examples=25, deadline=None)
@given(c=st.lists(st.floats(-3, 3), min_size=1, max_size=3), N=st.integers(4, 30))
def test_variance_nonnegative(c, N):
    stat = polynomial_statistic(c)
    v = variance_functional_exact(stat, ev_for(N, 1, 1))
    assert v >= -1e-10 * max(1.0, mean_exact(polynomial_statistic(np.square(c)), ev_for(N, 1, 1)))


# ---------------------------------------------------------------- variance limit


def test_variance_limit_printed_form_hand_value():
    assert variance_limit(S, ModelParams(10, 1, 1), form="printed") == pytest.approx(1.5, rel=1e-12)


def test_variance_limit_gradient_form_value():
    # int_{1/2}^{2} s ds = 15/8
    assert variance_limit(S, ModelParams(10, 1, 1)) == pytest.approx(15 / 8, rel=1e-12)


def test_variance_limit_constant_is_zero():
    for form in ("gradient", "printed", "laplacian"):
        assert variance_limit(constant_statistic(2.0), ModelParams(10, 1, 1), form=form) == 0.0


@pytest.mark.parametrize("name", ["s", "s_over_1_plus_s", "log1p_s"])
def test_gradient_form_is_the_limit(name):
    stat = CATALOG[name]
    lim = variance_limit(stat, ModelParams(10, 1, 1))
    v100 = variance_functional_exact(stat, ev_for(100, 1, 1))
    v400 = variance_functional_exact(stat, ev_for(400, 1, 1))
    assert abs(v400 - lim) < abs(v100 - lim)
    assert v400 == pytest.approx(lim, rel=1e-2)


def test_printed_form_is_not_the_limit():
    # the O(1/N) approach to the true limit leaves no room for 3/2
    v = variance_functional_exact(S, ev_for(400, 1, 1))
    assert abs(v - 1.5) > 0.3


def test_gradient_form_equals_planar_dirichlet_integral():
    # (1/4 pi) int over the annulus of |grad a|^2 with a(r) = alpha(r^2)
    p = ModelParams(10, 1, 1)
    for stat in (S, SFRAC, LOG1P):
        f = lambda r: 2 * math.pi * r * (2 * r * stat.derivative(r * r)) ** 2
        ref = integrate.quad(f, p.r_Q, p.r_q, epsrel=1e-12)[0] / (4 * math.pi)
        assert variance_limit(stat, p) == pytest.approx(ref, rel=1e-10)


def test_laplacian_form_is_a_boundary_term():
    # (1/4 pi) int Laplacian a = [s alpha'(s)] between the edges
    p = ModelParams(10, 1, 1)
    assert variance_limit(S, p, form="laplacian") == pytest.approx(1.5, rel=1e-10)
    assert variance_limit(SFRAC, p, form="laplacian") == pytest.approx(0.0, abs=1e-12)
    assert variance_limit(SFRAC, p, form="printed") == pytest.approx(7 / 81, rel=1e-10)


def test_variance_limit_unknown_form():
    with pytest.raises(ValueError):
        variance_limit(S, ModelParams(10, 1, 1), form="other")


# ---------------------------------------------------------------- characteristic functions


def test_char_fn_trivial_values():
    ev = ev_for(10, 1, 1)
    assert char_fn_exact(SFRAC, 0.0, ev) == 1
    c, k = 0.8, 1.3
    assert char_fn_exact(constant_statistic(c), k, ev) == pytest.approx(cmath.exp(1j * k * 10 * c), abs=1e-12)


def test_char_fn_modulus_bounded_and_decreasing_near_zero():
    ev = ev_for(20, 1, 1)
    mods = [abs(char_fn_exact(LOG1P, k, ev)) for k in np.linspace(0, 0.5, 11)]
    assert all(m <= 1 + 1e-12 for m in mods)
    assert all(b <= a + 1e-12 for a, b in zip(mods, mods[1:]))


@pytest.mark.parametrize("N, Q, q, k", [(6, 0, 0, 0.9), (12, 1, 1, -1.7), (9, 0.5, 2, 3.0)])
def test_char_fn_matches_confluent_hypergeometric_product(N, Q, q, k):
    # s/(1+s) ~ Beta(a, b) has characteristic function 1F1(a; a + b; i k)
    p = ModelParams(N, Q, q)
    ref = complex(1)
    for j in range(1, N + 1):
        a = p.QN + j
        ref *= complex(mpmath.hyp1f1(a, p.L + 1, 1j * k))
    assert char_fn_exact(SFRAC, k, ev_for(N, Q, q)) == pytest.approx(ref, abs=1e-10)


def test_char_fn_gaussian_regime_onset():
    ev, k = ev_for(50, 1, 1), 0.7
    gauss = cmath.exp(1j * k * mean_exact(SFRAC, ev) - k * k / 2 * variance_functional_exact(SFRAC, ev))
    assert abs(char_fn_exact(SFRAC, k, ev) - gauss) <= 0.05


def test_char_fn_converges_to_gaussian_limit():
    ev = ev_for(200, 1, 1)
    for k in np.linspace(-1, 1, 9):
        diff = abs(char_fn_exact(SFRAC, k, ev) - gaussian_limit_char_fn(SFRAC, k, ev.params))
        assert diff <= 0.02


def test_gaussian_limit_modulus():
    p = ModelParams(30, 1, 1)
    assert gaussian_limit_char_fn(SFRAC, 0.0, p) == 1
    k = 0.6
    assert abs(gaussian_limit_char_fn(SFRAC, k, p)) == pytest.approx(math.exp(-k * k * variance_limit(SFRAC, p) / 2))


# ---------------------------------------------------------------- Monte Carlo


def test_monte_carlo_constant_statistic():
    r = monte_carlo_fluctuations(ONE, MatrixDims(5, 10, 10), 100, seed=1)
    assert r.mc_mean == 5.0 and r.mc_variance == 0.0
    assert r.variance_exact == 0.0


def test_monte_carlo_requires_replicas():
    with pytest.raises(DomainError):
        monte_carlo_fluctuations(SFRAC, MatrixDims(5, 10, 10), 50, seed=1)


def test_monte_carlo_deterministic():
    a = monte_carlo_fluctuations(SFRAC, MatrixDims(4, 8, 8), 100, seed=9)
    b = monte_carlo_fluctuations(SFRAC, MatrixDims(4, 8, 8), 100, seed=9, workers=3)
    assert a == b


@pytest.mark.slow
def test_monte_carlo_matches_exact_fig1_parameters():
    r = monte_carlo_fluctuations(SFRAC, MatrixDims(10, 20, 20), 2000, seed=11)
    assert isinstance(r, FluctuationReport)
    assert abs(r.mc_mean - r.mean_exact) < 3 * r.mc_mean_stderr
    assert abs(r.mc_variance - r.variance_exact) < 3 * r.mc_variance_stderr
    assert r.mc_mean_stderr > 0 and r.mc_variance_stderr > 0


@pytest.mark.slow
def test_monte_carlo_normality_M50():
    r = monte_carlo_fluctuations(SFRAC, MatrixDims(50, 100, 100), 2000, seed=12)
    assert r.normality_p > 0.01
    assert abs(r.mc_variance - r.variance_exact) < 3 * r.mc_variance_stderr
