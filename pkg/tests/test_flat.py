import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import dn_oracle
from surfwave import flat
from surfwave import synthesis as syn
from surfwave.materials import MaterialPoint

M = MaterialPoint(1.0, 1.0, 1.0)
FM = flat.FlatModel(M)


def test_column_spans_dn_kernel():
    xi = np.array([0.6, -1.1])
    n = np.hypot(*xi)
    L = dn_oracle(1, 1, 1, FM.c_R * n, xi)
    col = FM.column(xi)
    assert np.linalg.norm(L @ col) < 1e-12 * np.linalg.norm(L)
    assert np.linalg.norm(col) == pytest.approx(1.0, rel=1e-14)


@given(st.floats(0.1, 0.9), st.floats(0, 2 * np.pi), st.floats(0.1, 10))
def test_dn_multiplier_homogeneous_and_matches_oracle(frac, ang, k):
    xi = np.array([np.cos(ang), np.sin(ang)])
    tau = frac * M.cs
    L = flat.flat_dn_multiplier(tau, xi, M).entries
    np.testing.assert_allclose(L, dn_oracle(1, 1, 1, tau, xi), atol=1e-12)
    np.testing.assert_allclose(flat.flat_dn_multiplier(k * tau, k * xi, M).entries, k * L, atol=1e-12 * k)


def test_apply_flat_dn_on_grid():
    axes = (np.array([1.0, 2.0]), np.array([0.5]))
    u = np.ones((2, 1, 3), complex)
    out = flat.apply_flat_dn(0.4, axes, u, M)
    ref = dn_oracle(1, 1, 1, 0.4, (2.0, 0.5)) @ u[1, 0]
    np.testing.assert_allclose(out[1, 0], ref, atol=1e-13)


def test_flat_source_pipeline_matches_spectral_solution():
    src = flat.example1_source(20.0, T=1.0, ds=0.05, xi_max=40.0, dxi=0.5)
    ax = (np.linspace(-2, 2, 9), np.array([0.0]))
    f = syn.inhomogeneous_field(src, 1.5, ax, M).f
    ref = flat.flat_h1_spectrum(FM, 1.5, source=src).field(ax)
    assert np.linalg.norm(f - ref) / np.linalg.norm(ref) < 1e-10


def test_example1_outgoing_matches_synthesis():
    p = 40.0
    x1 = np.linspace(-3, 3, 61)
    x1 = x1[np.abs(x1) >= 1.0]
    f = syn.inhomogeneous_field(flat.example1_source(p), 10.0, (x1, np.array([0.0])), M).f[:, 0]
    ref = flat.example1_outgoing(10.0, x1, 1.0, p, M)
    assert np.max(np.abs(f - ref)) / np.max(np.abs(ref)) < 1e-2


def test_example1_closed_form_parity():
    xs = np.linspace(0.3, 2.7, 9)
    a = flat.example1_closed_form(0.7, xs, 1.0, 40.0, M)
    b = flat.example1_closed_form(0.7, -xs, 1.0, 40.0, M)
    np.testing.assert_allclose(a[:, 0], -b[:, 0], atol=1e-14)
    np.testing.assert_allclose(a[:, 2], b[:, 2], atol=1e-14)


@pytest.mark.parametrize("t", [1.0, 2.0])
def test_example2_peaks_on_rayleigh_front(t):
    eps = 0.01
    x = np.linspace(-4, 4, 8001)
    a = np.abs(flat.example2_closed_form(t, x, 1.0, eps, M)[:, 2])
    left, right = x[np.argmax(np.where(x < 0, a, 0))], x[np.argmax(np.where(x > 0, a, 0))]
    assert abs(left + FM.c_R * t) < eps
    assert abs(right - FM.c_R * t) < eps


def test_example2_rejects_nonpositive_eps():
    with pytest.raises(ValueError):
        flat.example2_closed_form(1.0, 0.0, 1.0, 0.0, M)
