import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from surfwave.errors import (
    ConfigError,
    DegenerateMetric,
    NonPositiveParameter,
    OutsideEllipticInterior,
    OutsideWorkingBox,
)
from surfwave.materials import (
    BoundaryMetric,
    Bump,
    EllipticPoint,
    MaterialField,
    MaterialPoint,
    covector_norm,
    elastic_speeds,
    material_field_from_dict,
    metric_from_dict,
)

pos = st.floats(0.1, 10.0)


@given(pos, pos, pos)
def test_speeds_match_definitions(rho, lam, mu):
    cs, cp = elastic_speeds(MaterialPoint(rho, lam, mu))
    assert cs == pytest.approx(np.sqrt(mu / rho), rel=1e-15)
    assert cp == pytest.approx(np.sqrt((lam + 2 * mu) / rho), rel=1e-15)
    assert cs < cp


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan, np.inf])
def test_nonpositive_parameter_rejected(bad):
    with pytest.raises(NonPositiveParameter):
        MaterialPoint(1.0, bad, 1.0)


def test_bump_driving_parameter_negative_is_rejected():
    with pytest.raises(NonPositiveParameter, match="mu"):
        MaterialField(MaterialPoint(1, 1, 1), (Bump("mu", -1.5, (0, 0), 1.0),))


def test_field_jet_matches_finite_differences():
    f = MaterialField(MaterialPoint(1, 1, 1), (Bump("mu", 0.3, (0.2, -0.1), 0.8), Bump("rho", -0.2, (0, 0.5), 1.1)))
    x = np.array([0.4, 0.3])
    jet = f.jet(x)
    h = 1e-5
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd = (f.jet(x + e).values - f.jet(x - e).values) / (2 * h)
        np.testing.assert_allclose(jet.grad[:, k], fd, atol=1e-9)
        fd2 = (f.jet(x + e).grad - f.jet(x - e).grad) / (2 * h)
        np.testing.assert_allclose(jet.hess[:, :, k], fd2, atol=1e-9)


def test_outside_box():
    f = MaterialField(MaterialPoint(1, 1, 1), box=((-1, 1), (-1, 1)))
    with pytest.raises(OutsideWorkingBox):
        f.jet(np.array([2.0, 0.0]))


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-5, 5).filter(lambda k: abs(k) > 1e-3))
def test_covector_norm_homogeneous(x1, x2, k):
    g = BoundaryMetric(((2.0, 0.3), (0.3, 1.0)), (Bump("g11", 0.3, (0.0, 0.0), 1.0),))
    xi = np.array([0.7, -1.2])
    n = covector_norm(g, (x1, x2), xi)
    assert covector_norm(g, (x1, x2), k * xi) == pytest.approx(abs(k) * n, rel=1e-14)


def test_covector_norm_uses_inverse_metric():
    g = BoundaryMetric(((4.0, 0.0), (0.0, 1.0)))
    assert covector_norm(g, (0, 0), (2.0, 0.0)) == pytest.approx(1.0)


def test_degenerate_metric_rejected():
    with pytest.raises(DegenerateMetric):
        BoundaryMetric(((1.0, 1.0), (1.0, 1.0)))


def test_elliptic_point_checked():
    EllipticPoint.checked((0, 0), 0.9, (1.0, 0.0), cs=1.0)
    with pytest.raises(OutsideEllipticInterior):
        EllipticPoint.checked((0, 0), 1.0, (1.0, 0.0), cs=1.0)
    with pytest.raises(OutsideEllipticInterior):
        EllipticPoint(0.0, (0, 0), 1.0, (0.0, 0.0))


def test_config_errors_name_the_key():
    with pytest.raises(ConfigError, match="mu"):
        material_field_from_dict({"rho": 1, "lam": 1}, key="pair.plus")
    with pytest.raises(ConfigError, match=r"material\.bumps\[0\]"):
        material_field_from_dict({"rho": 1, "lam": 1, "mu": 1, "bumps": [{"param": "mu"}]})
    with pytest.raises(ConfigError, match="g33"):
        metric_from_dict({"bumps": [{"entry": "g33", "amplitude": 1, "center": [0, 0], "width": 1}]})
