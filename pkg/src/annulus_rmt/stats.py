"""Rotationally invariant linear statistics A = sum_l alpha(|z_l|^2).

For a rotationally invariant statistic the determinantal structure makes
the squared moduli s_j = |z_j|^2 independent, with s_j / (1 + s_j)
distributed as Beta(a_j, b_j), a_j = QN + j, b_j = L + 1 - a_j.  Exact
finite-N means, variances and characteristic functions are therefore sums
(or products) of one-dimensional expectations, each computed by adaptive
quadrature in u = s / (1 + s) against the log-space beta density.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import betaln, xlog1py, xlogy
from statsmodels.stats.diagnostic import normal_ad

from .ensemble import params_from_dims, sample_eigenvalues
from .errors import AccuracyError, ConvergenceError, DomainError
from .kernel import KernelEvaluator
from .params import MatrixDims, ModelParams

__all__ = [
    "CATALOG",
    "FluctuationReport",
    "RadialStatistic",
    "char_fn_exact",
    "constant_statistic",
    "gaussian_limit_char_fn",
    "mean_exact",
    "mean_limit_per_particle",
    "monte_carlo_fluctuations",
    "numerical_derivative",
    "polynomial_statistic",
    "variance_functional_exact",
    "variance_limit",
]

_QUAD_RTOL = 1e-11
_SPREAD = 40.0


def numerical_derivative(f: Callable[[float], float], s: float, h: float | None = None) -> float:
    """Central difference with one Richardson step, validated by repeating
    at half the step: the two estimates must agree to 1e-6."""

    def richardson(h):
        d1 = (f(s + h) - f(s - h)) / (2 * h)
        d2 = (f(s + h / 2) - f(s - h / 2)) / h
        return (4 * d2 - d1) / 3

    if h is None:
        h = 1e-2 * max(abs(s), 1e-3)
        if s > 0:
            h = min(h, s / 2)
    coarse, fine = richardson(h), richardson(h / 2)
    if abs(coarse - fine) > 1e-6 * max(1.0, abs(fine)):
        raise AccuracyError(f"finite-difference derivative at s = {s} did not settle ({coarse} vs {fine})")
    return float(fine)


@dataclass(frozen=True)
class RadialStatistic:
    """a(z) = alpha(|z|^2).

    ``alpha`` must accept floats and numpy arrays.  ``growth`` is an
    exponent with |alpha(s)| = O(s^growth) as s -> infinity, used to
    report divergent moments instead of returning quadrature noise.
    Without ``alpha_prime`` the derivative is taken by validated
    Richardson-extrapolated central differences.
    """

    alpha: Callable
    alpha_prime: Callable | None = None
    description: str = ""
    growth: float = 0.0

    def derivative(self, s: float) -> float:
        if self.alpha_prime is not None:
            return float(self.alpha_prime(s))
        return numerical_derivative(self.alpha, s)


def constant_statistic(c: float) -> RadialStatistic:
    return RadialStatistic(
        alpha=lambda s: c + 0.0 * np.asarray(s, dtype=float),
        alpha_prime=lambda s: 0.0 * np.asarray(s, dtype=float),
        description=f"constant {c}",
    )


def polynomial_statistic(coefficients) -> RadialStatistic:
    """alpha(s) = sum_k c_k s^k with coefficients in increasing degree."""
    poly = np.polynomial.Polynomial(np.asarray(coefficients, dtype=float))
    deriv = poly.deriv()
    return RadialStatistic(
        alpha=lambda s: poly(s),
        alpha_prime=lambda s: deriv(s),
        description=f"polynomial {list(poly.coef)}",
        growth=float(poly.degree()),
    )


CATALOG: dict[str, RadialStatistic] = {
    "s": RadialStatistic(alpha=lambda s: s, alpha_prime=lambda s: 1.0 + 0.0 * np.asarray(s), description="s", growth=1.0),
    "s_over_1_plus_s": RadialStatistic(
        alpha=lambda s: s / (1 + s), alpha_prime=lambda s: 1 / (1 + s) ** 2, description="s/(1+s)"
    ),
    "log1p_s": RadialStatistic(alpha=lambda s: np.log1p(s), alpha_prime=lambda s: 1 / (1 + s), description="log(1+s)"),
}


# ---------------------------------------------------------------- per-j expectations


def _shape_parameters(p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    a = p.QN + np.arange(1, p.N + 1, dtype=float)
    return a, p.L + 1 - a


def _is_constant(stat: RadialStatistic) -> bool:
    u = np.linspace(0.01, 0.99, 33)
    v = np.asarray(stat.alpha(u / (1 - u)), dtype=float)
    return bool(np.all(v == v[0]))


def _check_moment(stat: RadialStatistic, b: np.ndarray, power: int, what: str):
    # E[s^{power * growth}] under beta-prime(a, b) needs b > power * growth
    bad = np.nonzero(b <= power * stat.growth)[0]
    if bad.size:
        j = int(bad[0]) + 1
        raise DomainError(f"divergent statistic: {what} needs b_j > {power * stat.growth:g}, but j = {j} has b_j = {b[bad[0]]:g}")


def _expect(g: Callable[[float], complex], a: float, b: float, j: int, *, complex_func: bool = False) -> complex:
    """E g(s) with s/(1+s) ~ Beta(a, b), by quadrature in u in three pieces
    around the bulk of the beta density."""
    log_b = betaln(a, b)

    def integrand(u):
        if u <= 0.0 or u >= 1.0:
            return 0.0
        return g(u / (1 - u)) * math.exp(xlogy(a - 1, u) + xlog1py(b - 1, -u) - log_b)

    mean = a / (a + b)
    sd = math.sqrt(a * b / ((a + b) ** 2 * (a + b + 1)))
    cuts = [0.0, max(0.0, mean - _SPREAD * sd), min(1.0, mean + _SPREAD * sd), 1.0]
    total, err = 0.0, 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        if hi <= lo:
            continue
        with warnings.catch_warnings():
            # the error estimate is checked below
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            v, e = integrate.quad(
                integrand, lo, hi, points=[mean] if lo < mean < hi else None,
                epsabs=0.0, epsrel=_QUAD_RTOL, limit=200, complex_func=complex_func,
            )
        if complex_func:
            e = math.hypot(*e) if isinstance(e, tuple) else abs(e)
        total, err = total + v, err + e
    if not np.isfinite(total) or err > 1e-8 * max(1.0, abs(total)):
        raise ConvergenceError(f"quadrature for radial law j = {j} failed (value {total}, error {err})")
    return total


def _per_j_means(stat: RadialStatistic, p: ModelParams) -> np.ndarray:
    a, b = _shape_parameters(p)
    _check_moment(stat, b, 1, "the mean")
    f = lambda s: float(stat.alpha(s))
    return np.array([_expect(f, aj, bj, j) for j, (aj, bj) in enumerate(zip(a, b), start=1)])


def mean_exact(stat: RadialStatistic, ev: KernelEvaluator) -> float:
    """<A> = 2 pi int alpha(r^2) rho_1(r) r dr, evaluated as the sum over j
    of the expectations of alpha under the independent radial laws."""
    if _is_constant(stat):
        return float(stat.alpha(1.0)) * ev.N
    return float(np.sum(_per_j_means(stat, ev.params)))


def _limits(p: ModelParams) -> tuple[float, float]:
    lo = p.Q / (1 + p.q)
    hi = (1 + p.Q) / p.q if p.q > 0 else math.inf
    return lo, hi


def mean_limit_per_particle(stat: RadialStatistic, p: ModelParams) -> float:
    """lim <A>/N = (1 + Q + q) int_{Q/(1+q)}^{(1+Q)/q} alpha(s) / (1+s)^2 ds,
    integrated in u = s/(1+s) where the limiting density is flat."""
    lo, hi = _limits(p)
    u_lo, u_hi = lo / (1 + lo), (1.0 if math.isinf(hi) else hi / (1 + hi))
    f = lambda u: float(stat.alpha(u / (1 - u))) if u < 1 else 0.0
    v, _ = integrate.quad(f, u_lo, u_hi, epsabs=0.0, epsrel=1e-12, limit=200)
    return (1 + p.Q + p.q) * v


def variance_functional_exact(stat: RadialStatistic, ev: KernelEvaluator) -> float:
    """Var A = sum_j Var_j alpha(s_j), each term computed as the centred
    second moment so that the result is nonnegative."""
    if _is_constant(stat):
        return 0.0
    p = ev.params
    a, b = _shape_parameters(p)
    _check_moment(stat, b, 2, "the variance")
    means = _per_j_means(stat, p)
    total = 0.0
    for j, (aj, bj, m) in enumerate(zip(a, b, means), start=1):
        total += _expect(lambda s: (float(stat.alpha(s)) - m) ** 2, aj, bj, j)
    return float(total)


def variance_limit(stat: RadialStatistic, p: ModelParams, *, form: str = "gradient") -> float:
    """Large-N variance of A.

    ``form="gradient"`` (the limit): int s alpha'(s)^2 ds over
    [Q/(1+q), (1+Q)/q], i.e. (1/4 pi) times the Dirichlet integral of a
    over the annulus.
    ``form="printed"``: int alpha'(s)^2 ds over the same interval.
    ``form="laplacian"``: (1/4 pi) times the integral of the Laplacian of a
    over the annulus, which reduces to [s alpha'(s)] at the edges.
    """
    lo, hi = _limits(p)
    if form == "gradient":
        f = lambda s: s * stat.derivative(s) ** 2
    elif form == "printed":
        f = lambda s: stat.derivative(s) ** 2
    elif form == "laplacian":
        edge = lambda s: 0.0 if (math.isinf(s) or s == 0) else s * stat.derivative(s)
        return float(edge(hi) - edge(lo))
    else:
        raise ValueError(f"unknown form {form!r}")
    if _is_constant(stat):
        return 0.0
    v, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)
    return float(v)


def char_fn_exact(stat: RadialStatistic, k: float, ev: KernelEvaluator) -> complex:
    """<exp(i k A)> = prod_j E_j exp(i k alpha(s)), accumulated in log space."""
    if k == 0:
        return complex(1.0)
    if _is_constant(stat):
        return cmath.exp(1j * k * ev.N * float(stat.alpha(1.0)))
    a, b = _shape_parameters(ev.params)
    log_total = 0.0 + 0.0j
    for j, (aj, bj) in enumerate(zip(a, b), start=1):
        e = _expect(lambda s: cmath.exp(1j * k * float(stat.alpha(s))), aj, bj, j, complex_func=True)
        if e == 0:
            return 0j
        log_total += cmath.log(e)
    return cmath.exp(log_total)


def gaussian_limit_char_fn(stat: RadialStatistic, k: float, p: ModelParams) -> complex:
    """exp(i k N lim <A>/N - k^2/2 lim Var A)."""
    if k == 0:
        return complex(1.0)
    mean = p.N * mean_limit_per_particle(stat, p)
    return cmath.exp(1j * k * mean - 0.5 * k * k * variance_limit(stat, p))


# ---------------------------------------------------------------- Monte Carlo


@dataclass(frozen=True)
class FluctuationReport:
    """Exact, limiting and sampled moments of a linear statistic.

    A statistic that is constant on every replica has zero spread, so its
    standard errors are 0 and its normality p-value is NaN.
    """

    mean_exact: float
    mean_limit_per_particle: float
    variance_exact: float
    variance_limit: float
    mc_mean: float
    mc_mean_stderr: float
    mc_variance: float
    mc_variance_stderr: float
    normality_p: float
    replicas: int
    seed: int


def _variance_stderr(x: np.ndarray) -> float:
    # large-sample standard error of the unbiased variance estimator
    n = x.size
    c = x - x.mean()
    m2, m4 = np.mean(c**2), np.mean(c**4)
    v = (m4 - (n - 3) / (n - 1) * m2 * m2) / n
    return float(math.sqrt(max(v, 0.0)))


def monte_carlo_fluctuations(
    stat: RadialStatistic, d: MatrixDims, replicas: int, seed: int, *, workers: int = 1
) -> FluctuationReport:
    """Sample A over independent replicas of the matrix model and compare
    with the exact and limiting theory."""
    if replicas < 100:
        raise DomainError("monte_carlo_fluctuations needs at least 100 replicas")
    samples = sample_eigenvalues(d, replicas, seed, workers=workers)
    A = np.array([float(np.sum(stat.alpha(np.abs(s.points) ** 2))) for s in samples])
    p = params_from_dims(d)
    ev = KernelEvaluator(p)
    var = float(A.var(ddof=1))
    if var > 0:
        mean_se, var_se = float(math.sqrt(var / replicas)), _variance_stderr(A)
        normality_p = float(normal_ad(A)[1])
    else:
        mean_se, var_se, normality_p = 0.0, 0.0, math.nan
    return FluctuationReport(
        mean_exact=mean_exact(stat, ev),
        mean_limit_per_particle=mean_limit_per_particle(stat, p),
        variance_exact=variance_functional_exact(stat, ev),
        variance_limit=variance_limit(stat, p),
        mc_mean=float(A.mean()),
        mc_mean_stderr=mean_se,
        mc_variance=var,
        mc_variance_stderr=var_se,
        normality_p=normality_p,
        replicas=replicas,
        seed=seed,
    )
