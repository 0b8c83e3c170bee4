"""Scalar special functions: log-gamma, log-beta, the incomplete beta
function J(a, b; z) on real and complex arguments, Barnes G and the complex
error function.

Throughout, ``J`` is the regularized incomplete beta integral written over
the half line,

    J(a, b; z) = (1 / B(a, b)) * int_0^z t**(a-1) * (1 + t)**(-a-b) dt,

which for real ``x >= 0`` equals ``I_{x/(1+x)}(a, b)``.  Large parameters
(``a + b`` of order ``10**4``) are common, so all values are carried in log
form.  A value ``v`` is represented by the complex number ``log(v)`` whose
real part is ``log|v|`` and whose imaginary part is a phase; zero is
``-inf + 0j``.
"""

from __future__ import annotations

import math
import warnings
from typing import NamedTuple

import numpy as np
from scipy import special
from scipy.integrate import IntegrationWarning, quad_vec

from .errors import AccuracyError, ConvergenceError, DomainError

__all__ = [
    "ZETA_PRIME_MINUS_ONE",
    "JParts",
    "crossover_profile",
    "erf_complex",
    "incomplete_beta_J",
    "incomplete_beta_J_complement",
    "incomplete_beta_J_parts",
    "incomplete_beta_limit_indicator",
    "log_barnes_g",
    "log_beta",
    "log_gamma",
    "log_sub",
]

#: zeta'(-1) = 1/12 - log(A) with A the Glaisher-Kinkelin constant.
ZETA_PRIME_MINUS_ONE = -0.16542114370045092

LOG_ZERO = complex(-math.inf, 0.0)
_EPS = np.finfo(float).eps


def log_gamma(x):
    """Natural log of the gamma function for ``x > 0`` (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    out = special.gammaln(arr)
    return float(out) if out.ndim == 0 else out


def log_beta(a, b):
    """log B(a, b) = log Gamma(a) + log Gamma(b) - log Gamma(a + b)."""
    a_arr, b_arr = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if np.any(~(a_arr > 0)) or np.any(~(b_arr > 0)):
        raise DomainError(f"log_beta requires a, b > 0, got a={a!r}, b={b!r}")
    out = special.betaln(a_arr, b_arr)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# log-space helpers


def log_sub(lx: complex, ly: complex) -> complex:
    """Return ``log(exp(lx) - exp(ly))`` for complex logs.

    The result is accurate in the relative sense unless the two values
    nearly cancel, in which case the rounding error of the inputs dominates.
    """
    if ly.real == -math.inf:
        return lx
    if lx.real == -math.inf:
        return ly + 1j * math.pi
    if lx.real >= ly.real:
        d = np.exp(complex(ly - lx))
        if d == 1:
            return LOG_ZERO
        return lx + complex(np.log1p(-d))
    d = np.exp(complex(lx - ly))
    if d == 1:
        return LOG_ZERO
    return ly + complex(np.log1p(-d)) + 1j * math.pi


def _log_one_minus(lv: complex) -> complex:
    """``log(1 - exp(lv))``."""
    return log_sub(0j, lv)


# ---------------------------------------------------------------------------
# incomplete beta: result container


class JParts(NamedTuple):
    """J(a, b; z) together with its complement, both in log form.

    ``log_abs_error`` bounds the absolute error of either quantity (they
    share it, since the complement is ``1 - J``).
    """

    log_value: complex
    log_complement: complex
    log_abs_error: float

    @property
    def value(self) -> complex:
        return complex(np.exp(self.log_value))

    @property
    def complement(self) -> complex:
        return complex(np.exp(self.log_complement))

    def rel_error_value(self) -> float:
        return math.exp(self.log_abs_error - self.log_value.real)

    def rel_error_complement(self) -> float:
        return math.exp(self.log_abs_error - self.log_complement.real)


def _from_value(lv: complex, log_err: float) -> JParts:
    lc = _log_one_minus(lv)
    # forming 1 - v costs one rounding relative to max(1, |v|)
    rounding = math.log(_EPS) + max(0.0, lv.real)
    return JParts(lv, lc, float(np.logaddexp(log_err, rounding)))


def _from_complement(lc: complex, log_err: float) -> JParts:
    lv = _log_one_minus(lc)
    rounding = math.log(_EPS) + max(0.0, lc.real)
    return JParts(lv, lc, float(np.logaddexp(log_err, rounding)))


def _degenerate(a: float, b: float) -> JParts | None:
    if a == 0 and b == 0:
        raise DomainError("J(a, b; z) needs a > 0 or b > 0")
    if a == 0:
        return JParts(0j, LOG_ZERO, -math.inf)
    if b == 0:
        return JParts(LOG_ZERO, 0j, -math.inf)
    return None


# ---------------------------------------------------------------------------
# real argument


def _log_betacf(a: float, b: float, u: float, v: float) -> float:
    """log I_u(a, b) by the modified Lentz continued fraction.

    ``v`` must equal ``1 - u`` (passed separately to keep its precision).
    Convergent and accurate for ``u < (a + 1) / (a + b + 2)``.
    """
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * u / qap
    d = tiny if abs(d) < tiny else d
    d = 1.0 / d
    h = d
    max_iter = 20000
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * u / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * u / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    else:
        raise ConvergenceError(f"incomplete beta continued fraction did not converge (a={a}, b={b})")
    return a * math.log(u) + b * math.log(v) - math.log(a) - log_beta(a, b) + math.log(h)


def _real_parts_cf(a: float, b: float, x: float) -> JParts:
    if x == 0:
        return JParts(LOG_ZERO, 0j, -math.inf)
    u, v = x / (1.0 + x), 1.0 / (1.0 + x)
    err = math.log(1e3 * _EPS)
    if u < (a + 1.0) / (a + b + 2.0):
        lv = _log_betacf(a, b, u, v)
        return _from_value(complex(lv), err + lv)
    lc = _log_betacf(b, a, v, u)
    return _from_complement(complex(lc), err + lc)


def _real_parts_fast(a: float, b: float, x: float) -> JParts:
    """scipy's betainc/betaincc, falling back on the log continued fraction
    when either value underflows."""
    if x == 0:
        return JParts(LOG_ZERO, 0j, -math.inf)
    u = x / (1.0 + x)
    val = float(special.betainc(a, b, u))
    comp = float(special.betaincc(a, b, u))
    if min(val, comp) < 1e-280:
        return _real_parts_cf(a, b, x)
    err = math.log(64 * _EPS) + math.log(min(val, comp))
    return JParts(complex(math.log(val)), complex(math.log(comp)), err)


# ---------------------------------------------------------------------------
# complex argument: adaptive quadrature along a ray


def _peak_position(a: float, b: float, z: complex) -> float | None:
    """Location s* (as a fraction of z) of the maximum of
    |t**(a-1) (1+t)**(-a-b)| along the ray t = s z, for a > 1."""
    if a <= 1:
        return None
    x, rho2 = z.real, abs(z) ** 2
    A, B, C = (b + 1.0) * rho2, -(a - b - 2.0) * x, -(a - 1.0)
    disc = math.sqrt(B * B - 4 * A * C)
    # positive root, written to avoid cancellation
    return (-B + disc) / (2 * A) if B <= 0 else (2 * C) / (-B - disc)


def _ray_integral(a: float, b: float, z: complex, rtol: float) -> tuple[complex, float]:
    """log of B(a, b) * J(a, b; z) by quadrature along s -> t = s z.

    Returns ``(log_integral, log_abs_error)``.
    """
    lz = complex(np.log(z))
    if a >= 1:
        def logf(s):
            lead = (a - 1.0) * (lz + math.log(s)) if a != 1 else 0j
            return lead - (a + b) * complex(np.log1p(z * s)) + lz

        s_peak = _peak_position(a, b, z)
        probe = [1.0] if s_peak is None or s_peak >= 1 else [1.0, s_peak]
        to_var = float
    else:
        # w = s**a removes the endpoint singularity of t**(a-1)
        def logf(w):
            return a * lz - math.log(a) - (a + b) * complex(np.log1p(z * w ** (1.0 / a)))

        probe = [1.0]
        to_var = lambda s: s**a  # noqa: E731
    probe.append(0.0 if a <= 1 else 1.0)
    if z.real < 0:
        # |1 + t| is smallest at t = s z with s = -Re z / |z|**2
        s_min = -z.real / abs(z) ** 2
        if s_min < 1:
            probe.append(to_var(s_min))
    shift = max(logf(s).real for s in probe)

    def f(s):
        if s <= 0.0 and a > 1:
            return np.array([0j, 0j])
        v = np.exp(logf(s) - shift)
        return np.array([v, abs(v)])

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        res, err, info = quad_vec(
            f, 0.0, 1.0, epsabs=0.0, epsrel=rtol, norm="max", limit=4000, full_output=True
        )
    integral, l1 = complex(res[0]), float(res[1].real)
    if not np.isfinite(integral) or l1 <= 0:
        raise AccuracyError(f"quadrature for J({a}, {b}; {z}) produced a non-finite value")
    abs_err = max(float(err), 32 * _EPS * l1)
    if integral == 0:
        return LOG_ZERO, math.log(abs_err) + shift
    return complex(np.log(integral)) + shift, math.log(abs_err) + shift


def _complex_parts_direct(a, b, z, rtol) -> JParts:
    li, le = _ray_integral(a, b, z, rtol)
    lb = log_beta(a, b)
    return _from_value(li - lb, le - lb)


def _complex_parts_via_complement(a, b, z, rtol) -> JParts:
    # 1 - J(a, b; z) = J(b, a; 1/z)
    li, le = _ray_integral(b, a, 1.0 / z, rtol)
    lb = log_beta(a, b)
    return _from_complement(li - lb, le - lb)


def _better(p1: JParts, p2: JParts) -> JParts:
    e1 = min(p1.rel_error_value(), p1.rel_error_complement())
    e2 = min(p2.rel_error_value(), p2.rel_error_complement())
    return p1 if e1 <= e2 else p2


def _check_branch(z: complex) -> None:
    if z.imag == 0 and z.real <= -1:
        raise DomainError(f"z = {z} lies on the branch cut (-inf, -1] of J")
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise DomainError(f"z = {z} is not finite")


def _complex_parts(a: float, b: float, z: complex, rtol: float) -> JParts:
    _check_branch(z)
    if z == 0:
        return JParts(LOG_ZERO, 0j, -math.inf)
    s_peak = _peak_position(a, b, z)
    if s_peak is None:
        # no unique interior peak: try both paths
        return _better(_complex_parts_direct(a, b, z, rtol), _complex_parts_via_complement(a, b, z, rtol))
    first = _complex_parts_direct if s_peak >= 1 else _complex_parts_via_complement
    second = _complex_parts_via_complement if s_peak >= 1 else _complex_parts_direct
    p = first(a, b, z, rtol)
    if min(p.rel_error_value(), p.rel_error_complement()) > 1e-11:
        p = _better(p, second(a, b, z, rtol))
    return p


def incomplete_beta_J_parts(a: float, b: float, z, *, method: str = "auto", rtol: float = 1e-13) -> JParts:
    """J(a, b; z) and 1 - J(a, b; z) in log form with an error estimate.

    Parameters
    ----------
    a, b : float
        Nonnegative exponents, not both zero.  ``a == 0`` gives ``J = 1`` and
        ``b == 0`` gives ``J = 0`` (the one-sided limits).
    z : real or complex
        Upper end of the straight integration segment from 0.  Must avoid
        the cut ``(-inf, -1]``.
    method : {"auto", "betainc", "cf", "quadrature"}
        For real ``z >= 0``: scipy's ``betainc`` with a log continued-fraction
        fallback on underflow ("auto"/"betainc"), the continued fraction only
        ("cf"), or adaptive quadrature ("quadrature").  Complex ``z`` always
        uses quadrature.
    """
    a, b = float(a), float(b)
    if a < 0 or b < 0 or not (np.isfinite(a) and np.isfinite(b)):
        raise DomainError(f"J requires a, b >= 0, got a={a}, b={b}")
    deg = _degenerate(a, b)
    if deg is not None:
        _check_branch(complex(z))
        return deg
    zc = complex(z)
    real_nonneg = zc.imag == 0 and zc.real >= 0
    if real_nonneg and zc.real == math.inf:
        return JParts(0j, LOG_ZERO, -math.inf)
    if method == "quadrature" or not real_nonneg:
        if method in ("cf", "betainc"):
            raise DomainError(f"method {method!r} needs a real nonnegative argument")
        return _complex_parts(a, b, zc, rtol)
    if method in ("auto", "betainc"):
        return _real_parts_fast(a, b, zc.real)
    if method == "cf":
        return _real_parts_cf(a, b, zc.real)
    raise ValueError(f"unknown method {method!r}")


def incomplete_beta_J(a: float, b: float, z, *, method: str = "auto"):
    """Regularized incomplete beta J(a, b; z) along the segment from 0 to z.

    Returns a float for real ``z >= 0`` and a complex number otherwise.

    >>> round(incomplete_beta_J(1, 1, 3.0), 12)
    0.75
    """
    p = incomplete_beta_J_parts(a, b, z, method=method)
    v = p.value
    if isinstance(z, (complex, np.complexfloating)) or complex(z).imag != 0 or complex(z).real < 0:
        return v
    return v.real


def incomplete_beta_J_complement(a: float, b: float, z, *, method: str = "auto"):
    """1 - J(a, b; z), computed without cancellation."""
    p = incomplete_beta_J_parts(a, b, z, method=method)
    c = p.complement
    if isinstance(z, (complex, np.complexfloating)) or complex(z).imag != 0 or complex(z).real < 0:
        return c
    return c.real


def incomplete_beta_limit_indicator(alpha: float, beta: float, x: float) -> int:
    """Large-N limit of J(alpha N, beta N; x): a step at x = alpha / beta."""
    if alpha <= 0 or beta <= 0 or x <= 0:
        raise DomainError("alpha, beta and x must be positive")
    t0 = alpha / beta
    if x == t0:
        raise DomainError(f"x = {x} sits exactly on the step at alpha/beta")
    return 1 if x > t0 else 0


def crossover_profile(X):
    """Edge crossover 1/2 + erf(X / sqrt 2) / 2 (the standard normal CDF)."""
    out = special.ndtr(np.asarray(X, dtype=float))
    return float(out) if out.ndim == 0 else out


def erf_complex(z):
    """Error function of a complex argument, for ``|Im z| <= 10``.

    Delegates to scipy's Faddeeva-based ``erf``.  Outside the strip the
    function grows like ``exp(|Im z|**2)`` and relative accuracy is not
    guaranteed, so such arguments are rejected.
    """
    arr = np.asarray(z, dtype=complex)
    if np.any(np.abs(arr.imag) > 10):
        raise AccuracyError("erf_complex is only certified for |Im z| <= 10")
    out = special.erf(arr)
    return complex(out) if out.ndim == 0 else out


def log_barnes_g(x: float, mode: str = "exact") -> float:
    """log G(x) for the Barnes G-function.

    ``mode="exact"`` requires ``x - 1`` to be a nonnegative integer and sums
    ``log Gamma`` values: ``log G(n + 1) = sum_{k=1}^{n-1} log Gamma(k + 1)``.
    ``mode="asymptotic"`` (``x >= 10``) evaluates the large-argument expansion
    of ``log G(y + 1)`` at ``y = x - 1``, truncated after the constant term.
    ``mode="shifted"`` accepts any ``x > 0``: it moves the argument above 20
    with ``G(x + 1) = Gamma(x) G(x)`` and keeps four Bernoulli corrections
    of the expansion, which is accurate to about 1e-13.
    """
    if mode == "exact":
        n = x - 1
        if n < 0 or abs(n - round(n)) > 1e-12:
            raise DomainError(f"exact Barnes G needs x - 1 a nonnegative integer, got x={x}")
        n = int(round(n))
        if n <= 1:
            return 0.0
        return float(np.sum(special.gammaln(np.arange(2, n + 1, dtype=float))))
    if mode == "asymptotic":
        if x < 10:
            raise DomainError(f"asymptotic Barnes G needs x >= 10, got x={x}")
        y = x - 1.0
        ly = math.log(y)
        return (
            0.5 * y * y * ly
            - 0.75 * y * y
            + 0.5 * y * math.log(2 * math.pi)
            - ly / 12.0
            + ZETA_PRIME_MINUS_ONE
        )
    if mode == "shifted":
        if not x > 0:
            raise DomainError(f"Barnes G needs x > 0, got x={x}")
        k = max(0, math.ceil(_BARNES_SHIFT - x))
        shift = float(np.sum(special.gammaln(x + np.arange(k)))) if k else 0.0
        y = x + k - 1.0
        correction = sum(c / y ** (2 * i + 2) for i, c in enumerate(_BARNES_CORRECTIONS))
        return log_barnes_g(x + k, mode="asymptotic") + correction - shift
    raise ValueError(f"unknown mode {mode!r}")


_BARNES_SHIFT = 20.0
# B_{2k+2} / (4 k (k + 1)) for k = 1..4
_BARNES_CORRECTIONS = (-1.0 / 240.0, 1.0 / 1008.0, -1.0 / 1440.0, 1.0 / 1056.0)
