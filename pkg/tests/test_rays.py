import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surfwave import dispersion as disp
from surfwave import rays
from surfwave.errors import LeftWorkingBox, StepTooLarge
from surfwave.materials import (
    IDENTITY_METRIC,
    BoundaryMetric,
    Bump,
    MaterialField,
    MaterialPair,
    MaterialPoint,
    constant_field,
)

M = MaterialPoint(1.0, 1.0, 1.0)
C_R = disp.rayleigh_speed(M).c_R


def bump_field():
    return MaterialField(M, (Bump("mu", 0.2, (0.3, 0.1), 0.7), Bump("rho", -0.1, (0.0, 0.4), 0.5)))


@settings(max_examples=15)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 2 * np.pi), st.floats(0.3, 5))
def test_flat_rays_are_straight(x1, x2, ang, n):
    xi0 = n * np.array([np.cos(ang), np.sin(ang)])
    r = rays.trace_ray((x1, x2), xi0, 1.0, 0.01, M)
    u = xi0 / n
    np.testing.assert_allclose(r.x, np.array([x1, x2]) - C_R * r.t[:, None] * u, atol=1e-12)
    np.testing.assert_allclose(r.xi, np.broadcast_to(xi0, r.xi.shape), atol=1e-12)
    assert np.ptp(r.phase) < 1e-12 * (1 + abs(r.phase[0]))


def test_hamiltonian_and_phase_conserved_in_bump_model():
    f = bump_field()
    r = rays.trace_ray((0.5, -0.3), (1.0, 0.5), 1.0, 1e-3, f)
    lam = rays.hamiltonian_jet(rays.as_speed_model(f), IDENTITY_METRIC, r.x, r.xi, 1).lam
    assert np.max(np.abs(lam / lam[0] - 1)) < 1e-8
    assert np.ptp(r.phase) < 1e-8


def test_fourth_order_convergence():
    sp = rays.as_speed_model(bump_field())

    def drift(steps):
        b = rays.integrate_bundle(sp, IDENTITY_METRIC, [0.5, -0.3], [1.0, 0.5], 1.0, steps, check_drift=False)
        lam = rays.hamiltonian_jet(sp, IDENTITY_METRIC, b.x[:, 0], b.xi[:, 0], 1).lam
        return np.max(np.abs(lam / lam[0] - 1))

    assert drift(10) / drift(20) >= 8.0


def test_metric_ray_speed():
    # with g = 4 I the covector norm halves, so the ray moves at c_R / 2 in x
    g = BoundaryMetric(((4.0, 0.0), (0.0, 4.0)))
    r = rays.trace_ray((0, 0), (1.0, 0.0), 1.0, 0.01, M, g)
    # H = c |xi|_g ; dx/dt = -c g^{-1} xi / |xi|_g
    np.testing.assert_allclose(r.x[-1], [-C_R * 0.25 / 0.5, 0.0], atol=1e-12)


def test_step_and_box_errors():
    with pytest.raises(StepTooLarge):
        rays.trace_ray((0, 0), (1, 0), 1.0, 0.05, M)
    small = constant_field(M, box=((-0.5, 0.5), (-0.5, 0.5)))
    with pytest.raises(LeftWorkingBox):
        rays.trace_ray((0, 0), (1, 0), 2.0, 0.01, small)


def test_stoneley_rays_move_at_stoneley_speed():
    pair = MaterialPair(constant_field(MaterialPoint(5, 1, 5)), constant_field(M))
    c_st = disp.stoneley_speed(pair).c_ST
    r = rays.trace_ray((0, 0), (0.0, 2.0), 1.0, 0.01, pair)
    np.testing.assert_allclose(r.x[-1], [0.0, -c_st], atol=1e-12)


def test_hessian_matches_neighbouring_rays():
    f = bump_field()
    x0, xi0, T, dt = np.array([0.5, -0.3]), [1.0, 0.5], 1.0, 2e-3
    d = rays.dynamic_ray(rays.trace_ray(x0, xi0, T, dt, f), f)
    e = 1e-4
    J, K = np.zeros((2, 2)), np.zeros((2, 2))
    for k in range(2):
        dx = np.zeros(2)
        dx[k] = e
        rp, rm = rays.trace_ray(x0 + dx, xi0, T, dt, f), rays.trace_ray(x0 - dx, xi0, T, dt, f)
        J[:, k] = (rp.x[-1] - rm.x[-1]) / (2 * e)
        K[:, k] = (rp.xi[-1] - rm.xi[-1]) / (2 * e)
    assert np.max(np.abs(K @ np.linalg.inv(J) - d.hess[-1])) < 1e-4


def test_flat_transport_is_trivial():
    r = rays.dynamic_ray(rays.trace_ray((0.1, 0.2), (1.0, -2.0), 1.0, 0.01, M), M)
    a0 = np.array([lg.a0 for lg in rays.transport_amplitude(r, M)])
    assert np.max(np.abs(a0 - 1)) < 1e-10


def test_flat_phase_chart():
    xi0 = np.array([1.0, 0.5])
    ch = rays.phase_chart(0.7, xi0, (np.linspace(-2, 2, 21), np.linspace(-2, 2, 21)), M,
                          chart_axes=(np.linspace(-1, 1, 9), np.linspace(-1, 1, 9)))
    ref = 0.7 * C_R * np.hypot(*xi0) + ch.points @ xi0
    assert np.max(np.abs(ch.phi - ref)) < 1e-6


def test_bump_eikonal_residual():
    res = rays.eikonal_residual(1.0, [1.0, 0.5], (np.linspace(-1, 1, 21), np.linspace(-1, 1, 21)), bump_field(),
                                chart_axes=(np.linspace(-1.2, -0.2, 11), np.linspace(-0.8, 0.0, 11)))
    assert res < 1e-5
