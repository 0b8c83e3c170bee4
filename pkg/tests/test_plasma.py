import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import gammaln

from annulus_rmt.errors import DomainError
from annulus_rmt.params import ModelParams
from annulus_rmt.plasma import (
    SphericalPoint,
    background_background_energy,
    background_density,
    boltzmann_constant_K,
    configuration_independent_energy,
    free_energy_asymptotic,
    geometry,
    log_partition_barnes,
    log_partition_exact,
    log_partition_quadrature,
    pair_potential,
    particle_background_potential,
    planar_background_density,
    potential_pieces,
)

charges = st.sampled_from([0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0])


# ---------------------------------------------------------------- geometry


def test_geometry_figure_parameters():
    g = geometry(ModelParams(10, 1, 1))
    assert g.r_Q**2 == pytest.approx(0.5)
    assert g.r_q**2 == pytest.approx(2.0)
    assert math.cos(g.theta_Q) == pytest.approx(1 / 3)
    assert g.rho_b_coefficient == pytest.approx(30 / math.pi)


def test_geometry_full_sphere():
    g = geometry(ModelParams(5))
    assert g.r_Q == 0 and g.r_q == math.inf
    assert g.theta_Q == pytest.approx(0) and g.theta_q == pytest.approx(0)


@given(Q=charges, q=charges)
def test_geometry_cap_areas(Q, q):
    g = geometry(ModelParams(3, Q, q))
    S = 1 + Q + q
    # cap area fraction (1 - cos theta)/2
    assert (1 - math.cos(g.theta_Q)) / 2 == pytest.approx(Q / S, abs=1e-14)
    assert (1 - math.cos(g.theta_q)) / 2 == pytest.approx(q / S, abs=1e-14)
    assert g.theta_Q < math.pi - g.theta_q
    # stereographic image of the cap boundary
    assert math.tan(g.theta_Q / 2) == pytest.approx(g.r_Q, abs=1e-12)
    if q > 0:
        assert math.tan((math.pi - g.theta_q) / 2) == pytest.approx(g.r_q, rel=1e-12)


@pytest.mark.parametrize("N, Q, q", [(10, 1, 1), (20, 0.5, 2), (7, 0, 1.5), (3, 2, 0)])
def test_charge_neutrality(N, Q, q):
    p = ModelParams(N, Q, q)
    val, _ = integrate.quad(
        lambda r: 2 * math.pi * r * planar_background_density(r, p), p.r_Q, p.r_q, epsabs=0, epsrel=1e-13, limit=200
    )
    assert val == pytest.approx(N, abs=1e-10)


def test_background_density_value():
    assert background_density(ModelParams(4, 1, 1, R=1.0)) == pytest.approx(12 / (4 * math.pi))


# ---------------------------------------------------------------- pair potential


def test_pair_potential_examples():
    north, south = SphericalPoint(0.0), SphericalPoint(math.pi)
    assert pair_potential(north, south, 0.5) == pytest.approx(0.0, abs=1e-15)
    a, b = SphericalPoint(0.3, 1.0), SphericalPoint(0.3 + math.pi / 3, 1.0)
    assert pair_potential(a, b, 0.5) == pytest.approx(math.log(2))
    assert pair_potential(a, a) == math.inf


angles = st.floats(0, math.pi)
phis = st.floats(0, 2 * math.pi)


@given(t1=angles, f1=phis, t2=angles, f2=phis, R=st.floats(0.1, 5))
def test_pair_potential_forms_agree(t1, f1, t2, f2, R):
    p1, p2 = SphericalPoint(t1, f1), SphericalPoint(t2, f2)
    a = pair_potential(p1, p2, R)
    b = pair_potential(p1, p2, R, form="cayley_klein")
    half_chord = math.exp(-a) / (2 * R)
    if half_chord < 1e-3:
        return  # nearly coincident: both forms lose digits to cancellation
    assert b == pytest.approx(a, abs=1e-12 * max(1, abs(a)))
    assert pair_potential(p2, p1, R) == a


def test_planar_lift_chord_identity():
    # 2R |u'v - uv'| = cos(theta/2) |z - z'| cos(theta'/2)
    R, z1, z2 = 0.7, 0.3 - 1.2j, 2.5 + 0.4j
    p1, p2 = SphericalPoint.from_planar(z1, R), SphericalPoint.from_planar(z2, R)
    lhs = math.exp(-pair_potential(p1, p2, R))
    rhs = math.cos(p1.theta / 2) * abs(z1 - z2) * math.cos(p2.theta / 2)
    assert lhs == pytest.approx(rhs, rel=1e-12)


# ---------------------------------------------------------------- particle-background potential


def test_potential_without_caps_is_constant():
    p = ModelParams(6)
    assert np.allclose(particle_background_potential(np.linspace(0.1, 3.0, 9), p), -3.0)


@given(theta=st.floats(0.05, math.pi - 0.05), Q=charges)
def test_potential_north_south_symmetry(theta, Q):
    p = ModelParams(5, Q, Q)
    assert particle_background_potential(theta, p) == pytest.approx(
        particle_background_potential(math.pi - theta, p), abs=1e-12
    )


def test_potential_pole_errors():
    with pytest.raises(DomainError):
        particle_background_potential(0.0, ModelParams(3, 1, 0))
    with pytest.raises(DomainError):
        particle_background_potential(math.pi, ModelParams(3, 0, 1))
    assert particle_background_potential(0.0, ModelParams(3, 0, 1)) == pytest.approx(
        particle_background_potential(1e-12, ModelParams(3, 0, 1))
    )


def _log_half_chord(t, f, tp):
    cos_a = math.cos(t) * math.cos(tp) + math.sin(t) * math.sin(tp) * math.cos(f)
    return 0.5 * math.log(max((1 - cos_a) / 2, 1e-300))


@pytest.mark.slow
def test_potential_matches_surface_quadrature():
    # -rho_b over the sphere, +rho_b over each cap, each a 2D integral of
    # -log(sin(alpha/2)) against the particle at (pi/2, 0).
    p, tp = ModelParams(4, 1, 2), math.pi / 2
    g, pref = geometry(p), background_density(p) * p.R**2

    def patch(lo, hi):
        v, _ = integrate.dblquad(
            lambda f, t: math.sin(t) * _log_half_chord(t, f, tp), lo, hi, 0, 2 * math.pi, epsabs=1e-12, epsrel=1e-12
        )
        return v

    V = pref * (patch(0, math.pi) - patch(0, g.theta_Q) - patch(math.pi - g.theta_q, math.pi))
    assert V == pytest.approx(particle_background_potential(tp, p), abs=1e-8)


@settings(deadline=None, max_examples=30)
@given(Q=charges, q=charges, N=st.integers(1, 50), frac=st.floats(0.02, 0.98))
def test_potential_decomposition(Q, q, N, frac):
    p = ModelParams(N, Q, q)
    g = geometry(p)
    theta = g.theta_Q + frac * (math.pi - g.theta_q - g.theta_Q)
    V = particle_background_potential(theta, p)
    closed = potential_pieces(theta, p)
    quad = potential_pieces(theta, p, method="quadrature")
    assert closed.total == pytest.approx(V, abs=1e-10 * max(1, abs(V)))
    assert quad.total == pytest.approx(V, abs=1e-10 * max(1, abs(V)))
    assert closed.sphere == pytest.approx(-N * p.S / 2)
    for a, b in zip(closed, quad):
        assert a == pytest.approx(b, abs=1e-10 * max(1, abs(a)))


# ---------------------------------------------------------------- energies


def test_K_without_caps():
    assert boltzmann_constant_K(ModelParams(3)) == pytest.approx(-9 / 4)


def test_K_direct_substitution():
    N = 2
    val = N**2 / 4 * (-3 + 6 * math.log(1 / 3) + 2 * 4 * math.log(2))
    assert boltzmann_constant_K(ModelParams(N, 1, 1)) == pytest.approx(val)
    assert boltzmann_constant_K(ModelParams(N, 1, 1), form="printed") == pytest.approx(val)


@pytest.mark.parametrize("N, Q, q", [(1, 1, 1), (2, 1, 2), (3, 0.5, 0.5), (2, 1, 0.5), (4, 2, 0), (5, 0, 0)])
def test_K_equals_quadrature_energy(N, Q, q):
    p = ModelParams(N, Q, q)
    assert boltzmann_constant_K(p) == pytest.approx(configuration_independent_energy(p), rel=1e-10)


def test_printed_K_fails_when_charges_differ():
    p = ModelParams(2, 1, 2)
    assert abs(boltzmann_constant_K(p, form="printed") - configuration_independent_energy(p)) > 1.0


def test_background_energy_constant_potential():
    # V = -N/2 everywhere and total background charge -N
    N = 5
    assert background_background_energy(ModelParams(N)) == pytest.approx(N * N / 4)


@given(Q=charges, q=charges)
@settings(deadline=None, max_examples=30)
def test_background_energy_exchange_symmetry(Q, q):
    a = background_background_energy(ModelParams(3, Q, q))
    b = background_background_energy(ModelParams(3, q, Q))
    assert a == pytest.approx(b, abs=1e-10 * max(1, abs(a)))


# ---------------------------------------------------------------- partition function


def test_log_partition_single_particle():
    assert log_partition_exact(ModelParams(1)) == pytest.approx(math.log(math.pi) + 0.5)


@pytest.mark.parametrize("N, Q, q", [(2, 0, 0), (2, 0.5, 0.5), (2, 1, 0.5), (1, 1, 2), (2, 2, 1)])
def test_log_partition_brute_force(N, Q, q):
    p = ModelParams(N, Q, q)
    assert log_partition_quadrature(p) == pytest.approx(log_partition_exact(p), rel=1e-6)


@pytest.mark.parametrize("R", [0.25, 0.5, 2.0])
def test_log_partition_brute_force_radius(R):
    p = ModelParams(2, 1, 1, R=R)
    assert log_partition_quadrature(p) == pytest.approx(log_partition_exact(p), rel=1e-6)


@pytest.mark.parametrize(
    "N, Q, q", [(1, 0, 0), (2, 0.5, 0.5), (3, 1, 2), (10, 1, 1), (12, 0.25, 1.5), (50, 1, 1), (7, 0.3, 0.1)]
)
def test_log_partition_barnes_identity(N, Q, q):
    p = ModelParams(N, Q, q)
    val = log_partition_barnes(p)
    assert math.isfinite(val)
    assert val == pytest.approx(log_partition_exact(p), abs=1e-9 * max(1, abs(val)))


@settings(deadline=None, max_examples=30)
@given(N=st.integers(1, 80), Q=charges, q=charges)
def test_log_partition_exchange_symmetry(N, Q, q):
    p = ModelParams(N, Q, q)
    a, b = log_partition_exact(p), log_partition_exact(p.swapped())
    assert a == pytest.approx(b, abs=1e-10 * max(1, abs(a)))


def test_log_partition_no_overflow():
    assert math.isfinite(log_partition_barnes(ModelParams(2000, 1, 1)))


# ---------------------------------------------------------------- free energy


def test_free_energy_constant_term():
    p = ModelParams(10, 1, 1)
    lead = -p.N / 2 * math.log(background_density(p) / (2 * math.pi**2))
    assert free_energy_asymptotic(p, include_constant=False) - lead == pytest.approx(-math.log(2) / 6)
    assert free_energy_asymptotic(p) - lead == pytest.approx(-math.log(2) / 6 - 1 / 36)


def test_free_energy_rejects_degenerate_caps():
    with pytest.raises(DomainError):
        free_energy_asymptotic(ModelParams(10, 0, 1))


@pytest.mark.parametrize("Q, q", [(1, 1), (1, 2), (0.5, 2), (3, 0.25)])
def test_free_energy_residual_decays(Q, q):
    res = [log_partition_exact(ModelParams(N, Q, q)) - free_energy_asymptotic(ModelParams(N, Q, q)) for N in (40, 80, 160, 320)]
    assert all(abs(b) < abs(a) for a, b in zip(res, res[1:]))
    # at least O(1/N): doubling N at least halves the remainder
    assert all(a / b > 1.9 for a, b in zip(res, res[1:]))


@pytest.mark.parametrize("Q, q", [(1, 1), (1, 2)])
def test_free_energy_printed_constant_gap(Q, q):
    p = ModelParams(400, Q, q)
    gap = log_partition_exact(p) - free_energy_asymptotic(p, include_constant=False)
    assert gap == pytest.approx(-1 / (12 * p.S), abs=1e-5)


def test_leading_term_has_no_linear_growth():
    vals = []
    for N in (25, 50, 100, 200):
        p = ModelParams(N, 1, 1)
        vals.append(log_partition_exact(p) + N / 2 * math.log(background_density(p) / (2 * math.pi**2)))
    assert max(vals) - min(vals) < 1e-3


def test_gamma_sum_reference():
    # direct product formula, independent of the module's arrangement
    N, Q, q = 4, 0.5, 1.5
    p = ModelParams(N, Q, q)
    l = np.arange(N)
    ref = (
        N * math.log(math.pi)
        - 2 * boltzmann_constant_K(p)
        + np.sum(gammaln(l + N * Q + 1) + gammaln(l + N * q + 1) - gammaln(N * (1 + Q + q) + 1))
    )
    assert log_partition_exact(p) == pytest.approx(ref, rel=1e-14)
