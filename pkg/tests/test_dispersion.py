import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import rayleigh_root_mp, rayleigh_root_scan, rayleigh_secular_mp, stoneley_root_oracle
from surfwave import dispersion as disp
from surfwave.errors import OutsideEllipticRange
from surfwave.materials import MaterialPoint

materials = st.builds(MaterialPoint, st.floats(0.5, 4.0), st.floats(0.5, 3.0), st.floats(0.5, 3.0))


def test_poisson_solid_ratio():
    m = MaterialPoint(1.0, 1.0, 1.0)
    c = disp.rayleigh_speed(m).c_R
    assert c / m.cs == pytest.approx(0.919402, abs=1e-4)
    assert c / m.cs == pytest.approx(disp.rayleigh_poisson_ratio(), rel=1e-13)
    assert c == pytest.approx(rayleigh_root_scan(1.0, 1.0, 1.0), rel=1e-13)


@given(materials)
def test_rayleigh_root_matches_multiprecision(m):
    assert disp.rayleigh_speed(m).c_R == pytest.approx(rayleigh_root_mp(m.rho, m.lam, m.mu), rel=1e-12)


@given(materials)
def test_rayleigh_single_sign_change_and_slope(m):
    s = np.linspace(0, m.cs, 10001)[1:-1]
    r = disp.rayleigh_residual(s, m)
    assert np.count_nonzero(np.sign(r[:-1]) != np.sign(r[1:])) == 1
    root = disp.rayleigh_speed(m)
    assert abs(disp.rayleigh_residual(root.c_R, m)) < 1e-10
    assert root.slope < 0


@given(materials, st.floats(0.05, 0.95))
def test_residual_sign_agrees_with_secular_form(m, frac):
    s = frac * m.cs
    ref = float(rayleigh_secular_mp(s, m.rho, m.lam, m.mu))
    assert np.sign(disp.rayleigh_residual(s, m)) == np.sign(ref)


def test_residual_outside_range():
    m = MaterialPoint(1, 1, 1)
    with pytest.raises(OutsideEllipticRange):
        disp.rayleigh_residual(1.2 * m.cs, m)


def test_stoneley_default_pair_matches_interface_oracle():
    p, q = MaterialPoint(5, 1, 5), MaterialPoint(1, 1, 1)
    (ref,) = stoneley_root_oracle((5, 1, 5), (1, 1, 1))
    root = disp.stoneley_speed((p, q))
    assert root.exists
    assert root.c_ST == pytest.approx(ref, rel=1e-12)
    assert root.c_ST == pytest.approx(0.9582524195, abs=1e-9)


@pytest.mark.parametrize("pair", [((2.0, 1.5, 1.2), (2.0, 1.5, 1.2)), ((1.0, 1.0, 1.0), (1.0, 3.0, 1.1))])
def test_stoneley_existence_agrees_with_oracle(pair):
    p, q = (MaterialPoint(*v) for v in pair)
    roots = stoneley_root_oracle(*pair)
    got = disp.stoneley_speed((p, q))
    assert got.exists == bool(roots)
    if roots:
        assert got.c_ST == pytest.approx(roots[0], rel=1e-10)


@given(materials, materials, st.floats(0.02, 0.98))
def test_det_m_identity(p, q, frac):
    s = frac * min(p.cs, q.cs)
    det = float(np.real(np.linalg.det(disp.stoneley_matrix(s, (p, q)).m)))
    S = disp.stoneley_residual(s, (p, q))
    fac = disp.stoneley_det_factor(s, (p, q))
    assert det * fac == pytest.approx(S, rel=1e-10, abs=1e-12)


@given(materials, materials)
def test_stoneley_eigenvalues_decrease_and_trace_positive(p, q):
    grid = np.linspace(0.01, 0.99, 200) * min(p.cs, q.cs)
    rep = disp.definiteness_report((p, q), grid)
    assert rep.passed, rep.items
    m1, m2 = disp.stoneley_eigenvalues(grid, (p, q))
    assert np.all(m1 <= m2)


def test_stoneley_matrix_hermitian():
    M = disp.stoneley_matrix(0.5, (MaterialPoint(2, 1, 1), MaterialPoint(1, 2, 1))).m
    np.testing.assert_allclose(M, M.conj().T, atol=1e-15)
