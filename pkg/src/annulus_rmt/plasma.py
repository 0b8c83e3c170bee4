"""Plasma-side quantities on the sphere: geometry, potentials, energies and
the beta = 2 partition function.

Points on the sphere of radius R use the azimuthal angle theta (0 at the
north pole) and the polar angle phi.  The background charge density is
rho_b = N (1 + Q + q) / (4 pi R^2) inside the annulus theta_Q < theta <
pi - theta_q; under stereographic projection z = 2R e^{i phi} tan(theta/2)
the annulus maps to r_Q < |z| / 2R < r_q.

Throughout, the 2R inside the logarithmic pair potential is dropped from
the energies; by charge neutrality it only contributes the explicit
factor (1/2R)^{N beta/2} to the Boltzmann factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate
from scipy.special import gammaln, xlogy

from .errors import ConvergenceError, DomainError
from .params import ModelParams
from .specialfn import log_barnes_g

__all__ = [
    "AnnulusGeometry",
    "PotentialPieces",
    "SphericalPoint",
    "background_background_energy",
    "background_density",
    "boltzmann_constant_K",
    "configuration_independent_energy",
    "free_energy_asymptotic",
    "geometry",
    "log_partition_barnes",
    "log_partition_exact",
    "log_partition_quadrature",
    "pair_potential",
    "particle_background_potential",
    "planar_background_density",
    "potential_pieces",
]


# ---------------------------------------------------------------- geometry


@dataclass(frozen=True)
class AnnulusGeometry:
    """Spherical annulus and its planar image (radii in units of 2R).

    ``rho_b_coefficient`` is N (1 + Q + q) / pi, the background density in
    the planar coordinates z / 2R is ``rho_b_coefficient / (1 + r^2)^2``.
    """

    theta_Q: float
    theta_q: float
    r_Q: float
    r_q: float
    rho_b_coefficient: float


@dataclass(frozen=True)
class SphericalPoint:
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError(f"theta must lie in [0, pi], got {self.theta}")
        object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))

    def cayley_klein(self) -> tuple[complex, complex]:
        """(u, v) = (cos(theta/2) e^{i phi/2}, -i sin(theta/2) e^{-i phi/2})."""
        h = 0.5 * self.theta
        u = math.cos(h) * complex(math.cos(self.phi / 2), math.sin(self.phi / 2))
        v = -1j * math.sin(h) * complex(math.cos(self.phi / 2), -math.sin(self.phi / 2))
        return u, v

    @classmethod
    def from_planar(cls, z: complex, R: float = 0.5) -> "SphericalPoint":
        """Inverse of the stereographic projection z = 2R e^{i phi} tan(theta/2)."""
        z = complex(z)
        return cls(2.0 * math.atan(abs(z) / (2 * R)), math.atan2(z.imag, z.real))


def geometry(p: ModelParams) -> AnnulusGeometry:
    S = p.S
    # cos(theta_Q) = (1 + q - Q)/S; cos(theta_q) = (1 + Q - q)/S
    return AnnulusGeometry(
        theta_Q=math.acos((1 + p.q - p.Q) / S),
        theta_q=math.acos((1 + p.Q - p.q) / S),
        r_Q=p.r_Q,
        r_q=p.r_q,
        rho_b_coefficient=p.N * S / math.pi,
    )


def background_density(p: ModelParams) -> float:
    """rho_b = N (1 + Q + q) / (4 pi R^2) on the sphere."""
    return p.N * p.S / (4 * math.pi * p.R**2)


def planar_background_density(r, p: ModelParams):
    """Background density in the planar coordinates z / 2R: the pull-back
    of rho_b inside the annulus, zero outside."""
    r = np.asarray(r, dtype=float)
    inside = (r >= p.r_Q) & (r <= p.r_q)
    out = np.where(inside, p.N * p.S / (math.pi * (1 + r * r) ** 2), 0.0)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------- potentials


def pair_potential(p1: SphericalPoint, p2: SphericalPoint, R: float = 0.5, *, form: str = "angle") -> float:
    """Pair potential -log(2R sin(alpha/2)), alpha the angle between the points.

    ``form="cayley_klein"`` evaluates the equivalent -log(2R |u'v - uv'|).
    Coincident points give +inf.
    """
    if form == "angle":
        # 2 sin(alpha/2) is the chord length on the unit sphere
        a = np.array(_unit_vector(p1))
        b = np.array(_unit_vector(p2))
        chord = float(np.linalg.norm(a - b))
        half = 0.5 * chord
    elif form == "cayley_klein":
        u1, v1 = p1.cayley_klein()
        u2, v2 = p2.cayley_klein()
        half = abs(u2 * v1 - u1 * v2)
    else:
        raise ValueError(f"unknown form {form!r}")
    if half == 0.0:
        return math.inf
    return -math.log(2 * R * half)


def _unit_vector(pt: SphericalPoint) -> tuple[float, float, float]:
    st = math.sin(pt.theta)
    return st * math.cos(pt.phi), st * math.sin(pt.phi), math.cos(pt.theta)


def _constant_C(p: ModelParams) -> float:
    N, Q, q, S = p.N, p.Q, p.q, p.S
    return -N / 2 + N / 2 * (1 + q) * math.log((1 + q) / S) + N / 2 * (1 + Q) * math.log((1 + Q) / S)


def _pole_terms(theta, p: ModelParams):
    """-NQ log sin(theta/2) - Nq log cos(theta/2), with 0 log 0 = 0."""
    theta = np.asarray(theta, dtype=float)
    if (p.Q > 0 and np.any(theta <= 0)) or (p.q > 0 and np.any(theta >= math.pi)):
        raise DomainError("potential diverges at a pole carrying a nonzero charge")
    return -xlogy(p.N * p.Q, np.sin(theta / 2)) - xlogy(p.N * p.q, np.cos(theta / 2))


def particle_background_potential(theta, p: ModelParams):
    """Energy V(theta) of a unit charge at azimuthal angle theta with the
    background: C_N - NQ log sin(theta/2) - Nq log cos(theta/2)."""
    v = _constant_C(p) + _pole_terms(theta, p)
    return v if np.ndim(v) else float(v)


class PotentialPieces(NamedTuple):
    """Particle potential split as: background -rho_b over the whole sphere,
    plus +rho_b on the north cap, plus +rho_b on the south cap."""

    sphere: float
    north_cap: float
    south_cap: float

    @property
    def total(self) -> float:
        return self.sphere + self.north_cap + self.south_cap


def _quad(f, a, b, what: str) -> float:
    val, err = integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-13, limit=200)
    if not err <= 1e-10 * max(1.0, abs(val)):
        raise ConvergenceError(f"{what}: quadrature error {err:.3g}")
    return val


def potential_pieces(theta: float, p: ModelParams, *, method: str = "closed") -> PotentialPieces:
    """The three contributions to the particle-background potential.

    ``method="closed"`` uses the evaluated forms; ``method="quadrature"``
    integrates each piece over theta after the exact phi integration (the
    phi average of log|1 - w e^{i phi}| vanishes for |w| < 1).
    """
    g = geometry(p)
    if not g.theta_Q < theta < math.pi - g.theta_q:
        raise DomainError("theta must lie strictly inside the annulus")
    N, Q, q, S = p.N, p.Q, p.q, p.S
    if method == "closed":
        sphere = -N / 2 * S
        north = -float(xlogy(N * Q, math.sin(theta / 2))) + N / 2 * (Q + (1 + q) * math.log((1 + q) / S))
        south = -float(xlogy(N * q, math.cos(theta / 2))) + N / 2 * (q + (1 + Q) * math.log((1 + Q) / S))
        return PotentialPieces(sphere, north, south)
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    rho_area = background_density(p) * p.R**2 * 2 * math.pi  # rho_b R^2 int dphi
    sphere = rho_area * _quad(lambda t: math.sin(t) * math.log(math.sin(t / 2)), 0.0, math.pi, "sphere")
    north = south = 0.0
    if g.theta_Q > 0:
        ls = math.log(math.sin(theta / 2))
        north = -rho_area * _quad(
            lambda t: math.sin(t) * (math.log(math.cos(t / 2)) + ls), 0.0, g.theta_Q, "north cap"
        )
    if g.theta_q > 0:
        lc = math.log(math.cos(theta / 2))
        south = -rho_area * _quad(
            lambda t: math.sin(t) * (math.log(math.sin(t / 2)) + lc), math.pi - g.theta_q, math.pi, "south cap"
        )
    return PotentialPieces(sphere, north, south)


# ---------------------------------------------------------------- energies


def boltzmann_constant_K(p: ModelParams, *, form: str = "corrected") -> float:
    """Configuration-independent energy K_N of the beta = 2 Boltzmann factor.

    K_N = (N^2/4) ( -S + 2 S log(1/S) + (1+q)^2 log(1+q) + (1+Q)^2 log(1+Q)
                    - Q^2 log Q - q^2 log q ),   S = 1 + Q + q.

    ``form="printed"`` swaps the last two logarithms to -Q^2 log q - q^2 log Q;
    it agrees only when Q = q and is kept for comparison.
    """
    N, Q, q, S = p.N, p.Q, p.q, p.S
    if form == "corrected":
        tail = -xlogy(Q * Q, Q) - xlogy(q * q, q)
    elif form == "printed":
        if (Q > 0 and q == 0) or (q > 0 and Q == 0):
            return math.inf
        tail = -xlogy(Q * Q, q) - xlogy(q * q, Q)
    else:
        raise ValueError(f"unknown form {form!r}")
    logs = xlogy((1 + q) ** 2, 1 + q) + xlogy((1 + Q) ** 2, 1 + Q) + tail
    return float(N * N / 4 * (-S - 2 * S * math.log(S) + logs))


def background_background_energy(p: ModelParams) -> float:
    """Self-energy of the background, by adaptive quadrature of
    -(1/2) rho_b (2 pi R^2) int sin(theta) V(theta) dtheta over the annulus."""
    g = geometry(p)
    lo, hi = g.theta_Q, math.pi - g.theta_q
    pref = -0.5 * background_density(p) * 2 * math.pi * p.R**2
    val = _quad(lambda t: math.sin(t) * particle_background_potential(t, p), lo, hi, "background energy")
    return pref * val


def configuration_independent_energy(p: ModelParams) -> float:
    """N C_N plus the background self-energy, from quadrature.  Equals K_N."""
    return p.N * _constant_C(p) + background_background_energy(p)


# ---------------------------------------------------------------- partition function


def log_partition_exact(p: ModelParams, *, k_form: str = "corrected") -> float:
    """log Z_N(2) = N log(2 pi R) - 2 K_N
    + sum_{l<N} [log Gamma(l+NQ+1) + log Gamma(l+Nq+1) - log Gamma(NS+1)]."""
    N = p.N
    l = np.arange(N, dtype=float)
    gam = gammaln(l + p.QN + 1) + gammaln(l + p.qN + 1)
    return (
        N * math.log(2 * math.pi * p.R)
        - 2 * boltzmann_constant_K(p, form=k_form)
        + float(np.sum(gam))
        - N * float(gammaln(p.L + 1))
    )


def _log_g(x: float) -> float:
    n = x - 1
    if abs(n - round(n)) <= 1e-12 and n >= 0:
        return log_barnes_g(x, mode="exact")
    return log_barnes_g(x, mode="shifted")


def log_partition_barnes(p: ModelParams) -> float:
    """The same partition function through Barnes G ratios:
    prod_{l<N} Gamma(1 + l + a) = G(N + a + 1) / G(a + 1)."""
    N = p.N
    return (
        N * math.log(2 * math.pi * p.R)
        - 2 * boltzmann_constant_K(p)
        - N * float(gammaln(p.L + 1))
        + _log_g(N + p.QN + 1)
        - _log_g(p.QN + 1)
        + _log_g(N + p.qN + 1)
        - _log_g(p.qN + 1)
    )


def log_partition_quadrature(p: ModelParams, *, theta_nodes: int = 48, phi_nodes: int | None = None) -> float:
    """Brute-force log Z_N(2) from the defining 2N-dimensional integral

        Z = (1/N!) (1/2R)^N e^{-2K_N} int prod_l dS_l |v_l|^{2QN} |u_l|^{2qN}
            prod_{j<k} |u_k v_j - u_j v_k|^2,

    with dS = R^2 sin(theta) dtheta dphi.  Tensor Gauss-Legendre in each
    theta and the trapezoid rule (exact for trigonometric polynomials) in
    each phi.  Limited to N <= 2 (the grid has nodes^N points).
    """
    N = p.N
    if N > 2:
        raise DomainError("brute-force quadrature is limited to N <= 2")
    if phi_nodes is None:
        phi_nodes = 2 * N + 1
    x, w = leggauss(theta_nodes)
    th, wth = (x + 1) * math.pi / 2, w * math.pi / 2
    ph = np.arange(phi_nodes) * 2 * math.pi / phi_nodes
    wph = 2 * math.pi / phi_nodes
    # one-particle nodes, flattened over (theta, phi)
    T, P = np.meshgrid(th, ph, indexing="ij")
    T, P = T.ravel(), P.ravel()
    u = np.cos(T / 2) * np.exp(0.5j * P)
    v = -1j * np.sin(T / 2) * np.exp(-0.5j * P)
    single = (
        np.repeat(wth, phi_nodes) * wph * p.R**2 * np.sin(T)
        * np.abs(v) ** (2 * p.QN) * np.abs(u) ** (2 * p.qN)
    )
    grids = np.meshgrid(*([np.arange(T.size)] * N), indexing="ij")
    idx = [g.ravel() for g in grids]
    weight = np.prod([single[i] for i in idx], axis=0)
    for j in range(N):
        for k in range(j + 1, N):
            weight = weight * np.abs(u[idx[k]] * v[idx[j]] - u[idx[j]] * v[idx[k]]) ** 2
    total = float(np.sum(weight))
    return math.log(total) - math.lgamma(N + 1) - N * math.log(2 * p.R) - 2 * boltzmann_constant_K(p)


def free_energy_asymptotic(p: ModelParams, *, include_constant: bool = True) -> float:
    """Large-N form of log Z_N(2):

        -(N/2) log(rho_b / 2 pi^2) + (1/12) log(Q/(1+Q)) + (1/12) log(q/(1+q))
        - 1 / (12 (1 + Q + q)).

    The last constant is required for the remainder to be O(1/N);
    ``include_constant=False`` drops it, leaving a remainder that tends to
    -1/(12 (1+Q+q)).
    """
    if p.Q <= 0 or p.q <= 0:
        raise DomainError("free-energy asymptotics need Q > 0 and q > 0")
    rho_b = background_density(p)
    val = -p.N / 2 * math.log(rho_b / (2 * math.pi**2))
    val += math.log(p.Q / (1 + p.Q)) / 12 + math.log(p.q / (1 + p.q)) / 12
    if include_constant:
        val -= 1.0 / (12 * p.S)
    return val
