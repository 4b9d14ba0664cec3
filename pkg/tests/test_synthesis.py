import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dn_oracle, null_vector, speeds
from surfwave import dispersion as disp
from surfwave import flat
from surfwave import synthesis as syn
from surfwave.errors import OffCharacteristic, OutsideEllipticInterior, SourceNotExpired
from surfwave.materials import Bump, EllipticPoint, MaterialField, MaterialPair, MaterialPoint, constant_field

M = MaterialPoint(1.0, 1.0, 1.0)
C_R = disp.rayleigh_speed(M).c_R
PLUS, MINUS = MaterialPoint(5.0, 1.0, 5.0), MaterialPoint(1.0, 1.0, 1.0)
PAIR = MaterialPair(constant_field(PLUS), constant_field(MINUS))
C_ST = disp.stoneley_speed(PAIR).c_ST
materials = st.builds(MaterialPoint, st.floats(0.5, 4.0), st.floats(0.5, 3.0), st.floats(0.5, 3.0))


def profile_oracle(m, tau, xi, f_hat, depths):
    """Exact decaying Lame solution with boundary trace ``f_hat``."""
    xi = np.asarray(xi, float)
    n = np.linalg.norm(xi)
    cs, cp = speeds(m.rho, m.lam, m.mu)
    ks, kp = np.sqrt(n * n - tau**2 / cs**2), np.sqrt(n * n - tau**2 / cp**2)
    D = np.array([[-xi[1], xi[0] * 1j * ks, xi[0]], [xi[0], xi[1] * 1j * ks, xi[1]], [0, -n * n, 1j * kp]], complex)
    c = np.linalg.solve(D, f_hat)
    return np.array([D @ (c * np.exp(-np.array([ks, ks, kp]) * z)) for z in depths])


# --------------------------------------------------------------------------
# polarization
# --------------------------------------------------------------------------


@given(materials, st.floats(0, 2 * np.pi), st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_rayleigh_polarization_is_dn_null_vector(m, ang, a0):
    c = disp.rayleigh_speed(m).c_R
    xi = 1.7 * np.array([np.cos(ang), np.sin(ang)])
    smp = syn.rayleigh_polarization(EllipticPoint(0.0, (0, 0), c * 1.7, xi), a0, m)
    L = dn_oracle(m.rho, m.lam, m.mu, c * 1.7, xi)
    assert np.linalg.norm(L @ smp.p) < 1e-10 * np.linalg.norm(L) * np.linalg.norm(smp.p)
    for ph in np.linspace(0, 2 * np.pi, 5):
        q = smp.at_phase(ph)
        assert q.ellipsoid_residual("re") < 1e-10
        assert q.ellipsoid_residual("im") < 1e-10


def test_poisson_axis_ratio_matches_null_vector_oracle():
    v, ratio = null_vector(dn_oracle(1, 1, 1, 2 * C_R, (2.0, 0.0)))
    assert ratio < 1e-14
    ref = abs(v[2]) / abs(v[0])
    p = syn.rayleigh_polarization(EllipticPoint(0.0, (0, 0), 2 * C_R, (2.0, 0.0)), 1.0, M).p
    assert abs(p[2]) / abs(p[0]) == pytest.approx(ref, rel=1e-12)
    assert abs(p[2]) / abs(p[0]) == pytest.approx(1.4679, abs=1e-3)


def test_stoneley_polarization_is_jump_null_vector():
    xi = np.array([1.3, -0.4])
    tau = C_ST * np.hypot(*xi)
    smp = syn.stoneley_polarization(EllipticPoint(0.0, (0, 0), tau, xi), 0.8 - 0.3j, PAIR)
    J = dn_oracle(5, 1, 5, tau, xi, 1) + dn_oracle(1, 1, 1, tau, xi, -1)
    assert np.linalg.norm(J @ smp.p) < 1e-10 * np.linalg.norm(J) * np.linalg.norm(smp.p)
    assert smp.ellipsoid_residual("re") < 1e-10


def test_off_characteristic_rejected():
    with pytest.raises(OffCharacteristic):
        syn.rayleigh_polarization(EllipticPoint(0.0, (0, 0), 0.5, (1.0, 0.0)), 1.0, M)


def test_retrograde_and_conjugation_flip():
    p = syn.rayleigh_polarization(EllipticPoint(0.0, (0, 0), 2 * C_R, (2.0, 0.0)), 1.0, M)
    assert syn.retrograde_check(syn.polarization_series(p, 2 * C_R, 32)).retrograde
    flip = syn.retrograde_check(syn.polarization_series(p.conjugated(), 2 * C_R, 32))
    assert not flip.retrograde_re and not flip.retrograde_im
    xi = np.array([1.3, -0.4])
    st_ = syn.stoneley_polarization(EllipticPoint(0.0, (0, 0), C_ST * np.hypot(*xi), xi), 1.0, PAIR)
    assert syn.retrograde_check(syn.polarization_series(st_, C_ST * np.hypot(*xi), 32)).retrograde


def test_retrograde_needs_enough_samples():
    p = syn.rayleigh_polarization(EllipticPoint(0.0, (0, 0), 2 * C_R, (2.0, 0.0)), 1.0, M)
    with pytest.raises(ValueError):
        syn.retrograde_check(syn.polarization_series(p, 2 * C_R, 8))


# --------------------------------------------------------------------------
# field synthesis
# --------------------------------------------------------------------------


def test_packet_rejects_window_through_origin():
    with pytest.raises(OutsideEllipticInterior):
        syn.WavePacketData.gaussian((3.0, 0.0), 1.0)


def test_flat_cauchy_field_matches_spectral_solution():
    pk = syn.WavePacketData.gaussian((12.0, 5.0), 1.5, n=64)
    ax = (np.linspace(-3, 2, 14), np.linspace(-2, 2, 12))
    f = syn.cauchy_field(pk, 1.5, ax, M).f
    ref = flat.flat_h1_spectrum(flat.FlatModel(M), 1.5, packet=pk).field(ax)
    assert np.linalg.norm(f - ref) / np.linalg.norm(ref) < 1e-6


def test_cauchy_linearity_in_bump_model():
    fb = MaterialField(M, (Bump("mu", 0.2, (-1.0, 1.0), 2.0),))
    pk = syn.WavePacketData.gaussian((10.0, 5.0), 1.0, n=32)
    ax = (np.linspace(-1, 1, 6), np.linspace(-1, 1, 6))
    f1 = syn.cauchy_field(pk, 0.4, ax, fb, chart_n=8).f
    f2 = syn.cauchy_field(pk.scaled(2.0 - 1.0j), 0.4, ax, fb, chart_n=8).f
    assert np.max(np.abs(f2 - (2 - 1j) * f1)) < 1e-12 * np.max(np.abs(f1))


def test_source_must_have_expired():
    src = flat.example1_source(10.0, T=1.0, ds=0.1, xi_max=20.0, dxi=0.5)
    with pytest.raises(SourceNotExpired):
        syn.inhomogeneous_field(src, 0.5, (np.array([1.0]), np.array([0.0])), M)


def test_source_superposition():
    a = flat.example1_source(20.0, T=1.0, ds=0.05, xi_max=40.0, dxi=0.5)
    b = flat.example1_source(15.0, A3=0.3j, T=1.0, ds=0.05, xi_max=40.0, dxi=0.5)
    ax = (np.linspace(-2, 2, 7), np.array([0.0]))
    fa, fb = (syn.inhomogeneous_field(s, 1.0, ax, M).f for s in (a, b))
    fab = syn.inhomogeneous_field(a + b, 1.0, ax, M).f
    assert np.max(np.abs(fab - fa - fb)) < 1e-12 * np.max(np.abs(fab))


def test_stoneley_field_jump_shift():
    pk = syn.WavePacketData.gaussian((10.0, 0.0), 1.0, n=32)
    ax = (np.linspace(-1, 1, 5), np.linspace(-1, 1, 5))
    jump = np.full((5, 5, 3), 0.1 + 0.2j)
    fg = syn.stoneley_field(pk, PAIR, 0.5, ax, jump=jump)
    np.testing.assert_allclose(fg.f_plus - fg.f, jump, atol=1e-15)


def test_packet_center_and_fit():
    ax = (np.linspace(-3, 3, 61), np.linspace(-3, 3, 61))
    P = np.stack(np.meshgrid(*ax, indexing="ij"), -1)
    centres, times = [], [0.0, 1.0, 2.0]
    for t in times:
        c = np.array([0.5 - 0.4 * t, 0.2 + 0.3 * t])
        amp = np.exp(-np.sum((P - c) ** 2, -1) / 0.5)
        f = np.stack([amp, 0 * amp, 0 * amp], -1).astype(complex)
        centres.append(syn.packet_center(syn.BoundaryFieldGrid(t, ax, f)))
        np.testing.assert_allclose(centres[-1], c, atol=1e-6)
    fit = syn.fit_propagation(times, centres)
    assert fit.speed == pytest.approx(0.5, rel=1e-5)
    assert fit.angle_to((-0.4, 0.3)) < 1e-3


def test_direction_nodes_full_circle_and_arcs():
    th = np.linspace(0, 2 * np.pi, 400, endpoint=False)
    ring = syn.direction_nodes(np.stack([np.cos(th), np.sin(th)], -1))
    assert np.max(np.diff(np.sort(ring.theta))) <= 0.1 + 1e-12
    arc = np.linspace(-0.3, 0.3, 50)
    nodes = syn.direction_nodes(np.stack([np.cos(arc), np.sin(arc)], -1))
    assert nodes.theta.min() <= -0.3 + 1e-12 and nodes.theta.max() >= 0.3 - 1e-12


@settings(max_examples=15)
@given(materials, st.floats(0.3, 0.95))
def test_evanescent_profile_is_exact_lame_solution(m, frac):
    xi = np.array([3.0, 4.0])
    f_hat = np.array([0.3 + 0.1j, -0.2j, 1.0])
    depths = np.linspace(0.0, 0.5, 6)
    tau = frac * m.cs * 5.0
    ev = syn.evanescent_profile(xi[None], f_hat[None], depths, m, tau=tau)
    ref = profile_oracle(m, tau, xi, f_hat, depths)
    np.testing.assert_allclose(ev.u[:, 0], ref, atol=1e-12 * np.abs(ref).max())
    np.testing.assert_allclose(ev.u[0, 0], f_hat, atol=1e-14)
    assert ev.alpha[0] <= ev.beta[0]


def test_evanescent_profile_pair_sides():
    ev = syn.evanescent_profile([[1.0, 0.0]], [[0.1, 0.0, 1.0]], [-0.5, 0.0, 0.5], PAIR)
    np.testing.assert_allclose(ev.u[1, 0], [0.1, 0.0, 1.0], atol=1e-14)
    assert np.all(np.abs(ev.u[[0, 2], 0]).max(axis=-1) < 1.0)
    with pytest.raises(ValueError):
        syn.evanescent_profile([[1.0, 0.0]], [[0, 0, 1.0]], [-0.1], M)
