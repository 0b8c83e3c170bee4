"""Finite-N determinantal structure of the eigenvalues in the plane.

With weight h(r) = r^{2QN} / (1 + r^2)^{L+1}, L = (1 + Q + q) N, the
k-point correlations are det[K(r_mu, r_gamma)] with

    K(r1, r2) = (1/pi) sqrt(h(r1) h(r2)) H(r1 r2 e^{i(theta1 - theta2)}),
    H(z) = (1/2) sum_{j=1}^N z^{j-1} / int_0^inf h(r) r^{2j-1} dr.

Equivalently (the "J gauge") K uses h~(r) = (1 + r^2)^{-L-1} and

    H~(z) = z^{QN} H(z) = L (1 + z)^{L-1} (J(QN, (q+1)N; z) - J((Q+1)N, qN; z)),

which differs from the "sum gauge" by a diagonal similarity and so gives
the same determinants.  Planar coordinates are z / 2R (dimensionless).

Local scaling uses the unit length 1 / sqrt(pi rho_b), the mean spacing at
background density rho_b, both in the bulk and at the edges.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.special import betainc, betaln, xlogy

from .errors import AccuracyError, DomainError
from .params import ModelParams
from .specialfn import LOG_ZERO, erf_complex, incomplete_beta_J_parts, log_sub

__all__ = [
    "KernelEvaluator",
    "PlanarPoint",
    "bulk_limit_kernel",
    "bulk_scaled_point",
    "density_limit",
    "density_rho1",
    "edge_limit_kernel",
    "edge_scaled_point",
    "edge_two_point_finite",
    "edge_two_point_limit",
    "kernel_H_sum",
    "kernel_H_tilde",
    "kernel_K",
    "kernel_matrix",
    "local_unit",
    "log_H_sum",
    "log_H_tilde",
    "log_weight_h",
    "log_weight_h_tilde",
    "radial_cdf",
    "rho2_truncated",
    "rho_k",
]

# Sum-gauge evaluations whose cancellation factor sum|t| / |sum t| exceeds
# this are redone in extended precision.
_COND_LIMIT = 1e5
_CUT_NUDGE = 1e-8
_BRANCH_POINT_GAP = 1e-8


@dataclass(frozen=True)
class PlanarPoint:
    """Point of the plane in polar form (r, theta)."""

    r: float
    theta: float = 0.0

    def __post_init__(self):
        if not (self.r >= 0 and math.isfinite(self.r)):
            raise DomainError(f"r must be finite and nonnegative, got {self.r}")
        object.__setattr__(self, "theta", float(self.theta) % (2 * math.pi))

    @classmethod
    def from_complex(cls, z: complex) -> "PlanarPoint":
        z = complex(z)
        return cls(abs(z), cmath.phase(z))

    @classmethod
    def from_xy(cls, x: float, y: float) -> "PlanarPoint":
        return cls.from_complex(complex(x, y))

    @property
    def z(self) -> complex:
        return cmath.rect(self.r, self.theta)


def _as_point(p) -> PlanarPoint:
    return p if isinstance(p, PlanarPoint) else PlanarPoint.from_complex(p)


@dataclass(frozen=True)
class KernelEvaluator:
    """Precomputed normalizations for one parameter set.

    ``log_norms[j-1] = log int_0^inf h(r) r^{2j-1} dr
                     = log(1/2) + log B(QN + j, (q+1)N - j + 1)``.
    Immutable and safe to share between threads.
    """

    params: ModelParams
    log_norms: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p = self.params
        j = np.arange(1, p.N + 1, dtype=float)
        norms = math.log(0.5) + betaln(p.QN + j, p.L + 1 - p.QN - j)
        norms.setflags(write=False)
        object.__setattr__(self, "log_norms", norms)

    @property
    def N(self) -> int:
        return self.params.N


# ---------------------------------------------------------------- weights


def log_weight_h(r, p: ModelParams):
    """log h(r) = 2QN log r - (L + 1) log(1 + r^2); -inf at r = 0 when Q > 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("r must be nonnegative")
    with np.errstate(divide="ignore"):
        out = xlogy(2 * p.QN, r) - (p.L + 1) * np.log1p(r * r)
    return float(out) if out.ndim == 0 else out


def log_weight_h_tilde(r, p: ModelParams):
    """log h~(r) = -(L + 1) log(1 + r^2)."""
    r = np.asarray(r, dtype=float)
    out = -(p.L + 1) * np.log1p(r * r)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------- H, sum gauge


def _log_H_sum_mp(z: complex, ev: KernelEvaluator, cond: float) -> complex:
    p = ev.params
    dps = 30 + int(math.log10(max(cond, 10.0)))
    while True:
        with mpmath.workdps(dps):
            zm = mpmath.mpc(z)
            QN, L = mpmath.mpf(p.QN), mpmath.mpf(p.L)
            total = mpmath.mpc(0)
            size = mpmath.mpf(0)
            power = mpmath.mpc(1)
            for j in range(1, p.N + 1):
                a = QN + j
                log_b = mpmath.loggamma(a) + mpmath.loggamma(L + 1 - a) - mpmath.loggamma(L + 1)
                t = power * mpmath.exp(-log_b)
                total += t
                size += abs(t)
                power *= zm
            if total == 0:
                return LOG_ZERO
            lost = float(mpmath.log10(size / abs(total)))
            if lost < dps - 25:
                return complex(mpmath.log(total))
        dps = int(lost) + 40


def log_H_sum(z, ev: KernelEvaluator, *, precision: str = "auto") -> complex:
    """log H(z) from the finite sum, as log|H| + i arg H.

    Terms are summed relative to the largest one.  With ``precision="auto"``
    a sum that loses more than five digits to cancellation (z near the
    negative real axis) is recomputed with mpmath at a working precision
    chosen from the observed cancellation; ``precision="double"`` skips
    this.
    """
    if precision not in ("auto", "double"):
        raise ValueError(f"unknown precision {precision!r}")
    z = complex(z)
    lc = math.log(0.5) - ev.log_norms
    if z == 0:
        return complex(lc[0])
    j = np.arange(ev.N)
    lt = lc + j * complex(np.log(z))
    m = float(np.max(lt.real))
    t = np.exp(lt - m)
    total = complex(np.sum(t))
    size = float(np.sum(np.abs(t)))
    cond = size / abs(total) if total != 0 else math.inf
    if precision == "auto" and cond > _COND_LIMIT:
        return _log_H_sum_mp(z, ev, cond)
    if total == 0:
        return LOG_ZERO
    return m + complex(np.log(total))


def kernel_H_sum(z, ev: KernelEvaluator, **kw) -> complex:
    return complex(np.exp(log_H_sum(z, ev, **kw)))


# ---------------------------------------------------------------- H~, J gauge


def _off_cut(z: complex) -> complex:
    # On (-inf, -1] move to the upper side, continuous with arg z -> pi from below.
    if z.imag == 0 and z.real <= -1:
        return complex(z.real, _CUT_NUDGE * abs(z))
    return z


def _log_J_difference(p1, p2) -> complex:
    """log(J1 - J2) choosing whichever of J1 - J2 and (1 - J2) - (1 - J1)
    cancels less."""
    direct = log_sub(p1.log_value, p2.log_value)
    comp = log_sub(p2.log_complement, p1.log_complement)
    loss_direct = max(p1.log_value.real, p2.log_value.real) - direct.real
    loss_comp = max(p1.log_complement.real, p2.log_complement.real) - comp.real
    return direct if loss_direct <= loss_comp else comp


def log_H_tilde(z, ev: KernelEvaluator) -> complex:
    """log H~(z) = log[L (1+z)^{L-1} (J(QN,(q+1)N;z) - J((Q+1)N,qN;z))].

    Arguments on the cut (-inf, -1] are evaluated just above it (relative
    offset 1e-8), where accuracy is correspondingly reduced.  At the branch
    point z = -1 both incomplete beta values diverge while (1+z)^{L-1}
    vanishes; arguments with |1 + z| < 1e-8 raise :class:`AccuracyError`.
    """
    p = ev.params
    z = complex(z)
    if abs(1 + z) < _BRANCH_POINT_GAP:
        raise AccuracyError(f"z = {z} is at the branch point -1 of the incomplete beta form")
    z = _off_cut(z)
    if z == 0:
        return LOG_ZERO if p.QN > 0 else complex(math.log(p.L))
    arg = z if (z.imag != 0 or z.real < 0) else z.real
    j1 = incomplete_beta_J_parts(p.QN, (p.q + 1) * p.N, arg)
    j2 = incomplete_beta_J_parts((p.Q + 1) * p.N, p.qN, arg)
    return math.log(p.L) + (p.L - 1) * complex(np.log1p(z)) + _log_J_difference(j1, j2)


def kernel_H_tilde(z, ev: KernelEvaluator):
    """H~(z); a float for real z >= 0, complex otherwise."""
    v = complex(np.exp(log_H_tilde(z, ev)))
    zc = complex(z)
    if zc.imag == 0 and zc.real >= 0 and not isinstance(z, complex):
        return v.real
    return v


# ---------------------------------------------------------------- kernel and correlations


def _log_K(p1: PlanarPoint, p2: PlanarPoint, ev: KernelEvaluator, gauge: str) -> complex:
    z = p1.r * p2.r * cmath.exp(1j * (p1.theta - p2.theta))
    if gauge == "sum":
        lw = 0.5 * (log_weight_h(p1.r, ev.params) + log_weight_h(p2.r, ev.params))
        if lw == -math.inf:
            return LOG_ZERO
        return lw + log_H_sum(z, ev) - math.log(math.pi)
    if gauge == "J":
        lw = 0.5 * (log_weight_h_tilde(p1.r, ev.params) + log_weight_h_tilde(p2.r, ev.params))
        # H~ carries z^{QN} on the principal branch; restore the unwrapped
        # angle so that the two gauges differ by a diagonal similarity even
        # for non-integer QN.
        delta = p1.theta - p2.theta
        wrap = delta - cmath.phase(z) if z != 0 else 0.0
        return lw + log_H_tilde(z, ev) - math.log(math.pi) + 1j * ev.params.QN * wrap
    raise ValueError(f"unknown gauge {gauge!r}")


def kernel_K(p1, p2, ev: KernelEvaluator, *, gauge: str = "sum") -> complex:
    """Correlation kernel K(p1, p2) in the chosen gauge ("sum" or "J").

    Points may be :class:`PlanarPoint` or complex numbers.
    """
    return complex(np.exp(_log_K(_as_point(p1), _as_point(p2), ev, gauge)))


def kernel_matrix(points, ev: KernelEvaluator, *, gauge: str = "sum") -> np.ndarray:
    """Hermitian matrix [K(p_mu, p_gamma)]."""
    pts = [_as_point(p) for p in points]
    k = len(pts)
    out = np.empty((k, k), dtype=complex)
    for a in range(k):
        out[a, a] = kernel_K(pts[a], pts[a], ev, gauge=gauge).real
        for b in range(a + 1, k):
            out[a, b] = kernel_K(pts[a], pts[b], ev, gauge=gauge)
            out[b, a] = out[a, b].conjugate()
    return out


def rho_k(points, ev: KernelEvaluator, *, gauge: str = "sum") -> float:
    """k-point correlation det[K(p_mu, p_gamma)], k <= N."""
    if len(points) > ev.N:
        raise DomainError(f"k = {len(points)} exceeds N = {ev.N}")
    if len(points) == 0:
        return 1.0
    return float(np.linalg.det(kernel_matrix(points, ev, gauge=gauge)).real)


def rho2_truncated(p1, p2, ev: KernelEvaluator) -> float:
    """rho_2(p1, p2) - rho_1(p1) rho_1(p2) = -(1/pi^2) h1 h2 |H|^2 <= 0."""
    lk = _log_K(_as_point(p1), _as_point(p2), ev, "sum")
    return -math.exp(2 * lk.real)


def _rho1_scalar(r: float, ev: KernelEvaluator) -> float:
    p = ev.params
    if r < 0:
        raise DomainError("r must be nonnegative")
    x = r * r
    if x == 0:
        return p.L / math.pi if p.QN == 0 else 0.0
    j1 = incomplete_beta_J_parts(p.QN, (p.q + 1) * p.N, x)
    j2 = incomplete_beta_J_parts((p.Q + 1) * p.N, p.qN, x)
    ld = _log_J_difference(j1, j2)
    return math.exp(math.log(p.L / math.pi) - 2 * math.log1p(x) + ld.real)


def density_rho1(r, ev: KernelEvaluator):
    """One-point density L / (pi (1+r^2)^2) (J(QN,(q+1)N;r^2) - J((Q+1)N,qN;r^2))."""
    arr = np.asarray(r, dtype=float)
    out = np.array([_rho1_scalar(float(v), ev) for v in arr.ravel()]).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def density_limit(r, p: ModelParams):
    """Large-N density: rho_b(r) = L / (pi (1+r^2)^2) inside (r_Q, r_q), 0 outside."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr == p.r_Q) or np.any(arr == p.r_q):
        raise DomainError("the limiting density is discontinuous at the annulus edges")
    inside = (arr > p.r_Q) & (arr < p.r_q)
    out = np.where(inside, p.L / (math.pi * (1 + arr * arr) ** 2), 0.0)
    return float(out) if out.ndim == 0 else out


def radial_cdf(r, ev: KernelEvaluator):
    """Exact finite-N distribution function of the modulus of a randomly
    chosen point: |z_j|^2 are independent with J(QN + j, L + 1 - QN - j; .)
    laws, so F(r) = (1/N) sum_j J(QN + j, L + 1 - QN - j; r^2)."""
    p = ev.params
    arr = np.asarray(r, dtype=float)
    x = arr.ravel() ** 2
    a = p.QN + np.arange(1, ev.N + 1, dtype=float)
    b = p.L + 1 - a
    out = np.mean(betainc(a[:, None], b[:, None], (x / (1 + x))[None, :]), axis=0).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------- scaling limits


def local_unit(X: float, p: ModelParams) -> float:
    """Mean interparticle spacing 1 / sqrt(pi rho_b(X)) at radius X."""
    return 1.0 / math.sqrt(p.L / (1 + X * X) ** 2)


def bulk_scaled_point(X: float, x: float, y: float, p: ModelParams) -> PlanarPoint:
    """r = X + x u, theta = y u / X with u = local_unit(X)."""
    if not p.r_Q < X < p.r_q:
        raise DomainError(f"X = {X} is not inside the annulus ({p.r_Q}, {p.r_q})")
    u = local_unit(X, p)
    return PlanarPoint(X + x * u, y * u / X)


def edge_scaled_point(X: float, Y: float, p: ModelParams, *, edge: str = "inner") -> PlanarPoint:
    """z = r_edge + (X + iY) u at the inner edge, r_q - (X - iY) u at the
    outer one; X > 0 points into the annulus."""
    if edge == "inner":
        u = local_unit(p.r_Q, p)
        return PlanarPoint.from_complex(p.r_Q + complex(X, Y) * u)
    if edge == "outer":
        if not math.isfinite(p.r_q):
            raise DomainError("there is no outer edge when q = 0")
        u = local_unit(p.r_q, p)
        return PlanarPoint.from_complex(p.r_q - complex(X, -Y) * u)
    raise ValueError(f"unknown edge {edge!r}")


def bulk_limit_kernel(c1, c2) -> complex:
    """Ginibre bulk kernel exp(-|c1 - c2|^2/2 + i(x2 y1 - x1 y2))."""
    (x1, y1), (x2, y2) = c1, c2
    return cmath.exp(-0.5 * (x1 - x2) ** 2 - 0.5 * (y1 - y2) ** 2 + 1j * (x2 * y1 - x1 * y2))


def edge_limit_kernel(c1, c2) -> complex:
    """Edge kernel: the bulk kernel times 1/2 + erf((X1 + X2 + i(Y1 - Y2))/sqrt 2)/2."""
    (X1, Y1), (X2, Y2) = c1, c2
    w = complex(X1 + X2, Y1 - Y2) / math.sqrt(2)
    return bulk_limit_kernel(c1, c2) * (0.5 + 0.5 * erf_complex(w))


def edge_two_point_limit(s1: float, s2: float, dtheta: float | None = None) -> float:
    """g(s1, s2) = (2/pi) exp(-2 s1^2 - 2 s2^2); with ``dtheta`` the full
    limit -g / (4 pi^2 |1 - e^{i dtheta}|^2) of the scaled truncated
    two-point function at the edge."""
    g = 2 / math.pi * math.exp(-2 * s1 * s1 - 2 * s2 * s2)
    if dtheta is None:
        return g
    chord = abs(1 - cmath.exp(1j * dtheta))
    if chord < 1e-12:
        raise DomainError("the assembled edge form needs distinct angles")
    return -g / (4 * math.pi**2 * chord**2)


def edge_two_point_finite(s1: float, s2: float, dtheta: float, ev: KernelEvaluator) -> float:
    """Finite-N counterpart of :func:`edge_two_point_limit` at the inner
    edge: (r_Q^2 / (pi rho_b)) rho_2^T at radii r_Q + s u and angle
    separation dtheta, with u = local_unit(r_Q)."""
    p = ev.params
    if p.Q <= 0:
        raise DomainError("the inner edge needs Q > 0")
    u = local_unit(p.r_Q, p)
    rho_b = p.L / (math.pi * (1 + p.r_Q**2) ** 2)
    a = PlanarPoint(p.r_Q + s1 * u, 0.0)
    b = PlanarPoint(p.r_Q + s2 * u, dtheta)
    return p.r_Q**2 / (math.pi * rho_b) * rho2_truncated(a, b, ev)
