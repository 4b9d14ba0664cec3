"""Leading-order synthesis of surface and interface wave fields.

A field is a superposition over boundary covectors ``xi`` of the first
column of the diagonalizer, carried by the phase ``phi(t, x, xi)`` and the
amplitude ``a0``.  Both are homogeneous in ``xi`` (degrees 1 and 0), so
rays are only traced for a set of unit directions; the remainder
``psi = phi - x . omega`` and the amplitude are interpolated linearly in
the direction angle.  In a constant medium ``psi = c t`` and the
interpolation is exact.

Fourier convention: ``h(x) = sum_xi exp(i x . xi) h_hat(xi) dxi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import RectBivariateSpline

from . import dispersion as disp
from .errors import (
    ConfigError,
    DegenerateEllipse,
    NoStoneleyRoot,
    OffCharacteristic,
    OutsideEllipticInterior,
    SourceNotExpired,
)
from .materials import IDENTITY_METRIC, BoundaryMetric, EllipticPoint, MaterialPair
from .rays import RayleighSpeed, StoneleySpeed, as_speed_model, bundle_log_amp, hamiltonian_jet, shoot
from .symbols import local_arrays, restriction_arrays

SUPPORT_REL = 1e-12
ROOT_TOL = 1e-8
ANGLE_STEP = 0.1
CHART_N = 16
CHUNK = 512


# --------------------------------------------------------------------------
# data containers
# --------------------------------------------------------------------------


def _cell(axes) -> float:
    """Quadrature weight of a regular grid; a singleton axis has weight 1."""
    w = 1.0
    for a in axes:
        a = np.asarray(a, dtype=float)
        if a.size > 1:
            d = np.diff(a)
            if not np.allclose(d, d[0], rtol=1e-9, atol=0.0):
                raise ConfigError("covector grid must be regular")
            w *= float(d[0])
    return w


def _grid_points(axes) -> np.ndarray:
    A1, A2 = np.meshgrid(*axes, indexing="ij")
    return np.stack([A1, A2], axis=-1)


def _support(h: np.ndarray) -> np.ndarray:
    mag = np.abs(h)
    top = mag.max() if mag.size else 0.0
    return mag > SUPPORT_REL * top if top > 0 else np.zeros(mag.shape, bool)


@dataclass(frozen=True)
class WavePacketData:
    """Spectrum of the Cauchy datum on a regular covector grid.

    ``h_hat[i, j]`` is the sample at ``(axes[0][i], axes[1][j])``.  A
    singleton axis is integrated as a line (a delta in that covariable).
    """

    axes: tuple
    h_hat: np.ndarray
    center: tuple = (0.0, 0.0)
    width: float = 0.0

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        h = np.asarray(self.h_hat, dtype=complex)
        if h.shape != (len(axes[0]), len(axes[1])):
            raise ConfigError("h_hat shape does not match the covector axes")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "h_hat", h)
        mask = _support(h)
        if np.any(mask) and np.min(np.hypot(*_grid_points(axes)[mask].T)) <= 0.0:
            raise OutsideEllipticInterior("packet support contains xi = 0")

    @property
    def cell(self) -> float:
        return _cell(self.axes)

    @property
    def points(self) -> np.ndarray:
        return _grid_points(self.axes)

    def support(self):
        """Covectors and weighted samples ``h_hat * dxi`` on the support."""
        mask = _support(self.h_hat)
        return self.points[mask], self.h_hat[mask] * self.cell

    def scaled(self, k: complex) -> "WavePacketData":
        return replace(self, h_hat=self.h_hat * k)

    @classmethod
    def gaussian(cls, center, width: float, n: int = 256, x_center=(0.0, 0.0), span: float = 7.5, amplitude=1.0):
        """Gaussian spectrum ``exp(-|xi - center|^2 / (2 width^2))`` centred in x at ``x_center``."""
        center = np.asarray(center, dtype=float)
        if width <= 0:
            raise ConfigError("packet width must be positive")
        if np.hypot(*center) <= span * width:
            raise OutsideEllipticInterior("packet window reaches xi = 0; increase |center| or reduce width")
        axes = tuple(np.linspace(c - span * width, c + span * width, n) for c in center)
        P = _grid_points(axes)
        d2 = np.sum((P - center) ** 2, axis=-1)
        h = amplitude * np.exp(-0.5 * d2 / width**2) * np.exp(-1j * P @ np.asarray(x_center, dtype=float))
        return cls(axes, h, tuple(center), float(width))


@dataclass(frozen=True)
class SourceData:
    """Boundary source spectra ``l_hat[k]`` (shape (n1, n2, 3)) at times ``time_samples[k]``.

    Either the dense array ``l_hat`` (shape (n_times, n1, n2, 3)) is given,
    or a separable source ``profile[k] * spectrum`` (see :meth:`separable`).
    ``time_weights`` are the quadrature weights in s (default: uniform
    spacing of the samples).
    """

    time_samples: np.ndarray
    axes: tuple
    l_hat: np.ndarray | None = None
    time_weights: np.ndarray | None = None
    profile: np.ndarray | None = None
    spectrum: np.ndarray | None = None

    def __post_init__(self):
        s = np.atleast_1d(np.asarray(self.time_samples, dtype=float))
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        shape = (len(axes[0]), len(axes[1]), 3)
        if (self.l_hat is None) == (self.spectrum is None):
            raise ConfigError("give either l_hat or profile and spectrum")
        if self.l_hat is not None:
            lh = np.asarray(self.l_hat, dtype=complex)
            if lh.shape != (len(s),) + shape:
                raise ConfigError("l_hat must have shape (n_times, n1, n2, 3)")
            object.__setattr__(self, "l_hat", lh)
        else:
            sp = np.asarray(self.spectrum, dtype=complex)
            pr = np.asarray(self.profile, dtype=complex)
            if sp.shape != shape or pr.shape != s.shape:
                raise ConfigError("spectrum must have shape (n1, n2, 3) and profile (n_times,)")
            object.__setattr__(self, "spectrum", sp)
            object.__setattr__(self, "profile", pr)
        if np.any(s <= 0):
            raise ConfigError("source times must be positive")
        w = self.time_weights
        if w is None:
            w = np.full(len(s), float(np.diff(s).mean()) if len(s) > 1 else 1.0)
        object.__setattr__(self, "time_samples", s)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "time_weights", np.asarray(w, dtype=float))
        mask = self.support_mask()
        if np.any(mask) and np.min(np.hypot(*_grid_points(axes)[mask].T)) <= 0.0:
            raise OutsideEllipticInterior("source support contains xi = 0")

    @classmethod
    def separable(cls, time_samples, profile, axes, spectrum, time_weights=None) -> "SourceData":
        return cls(time_samples, axes, None, time_weights, profile, spectrum)

    def slices(self):
        """Yield ``(s, weight, l_hat(s))`` for every time sample."""
        for k, (s, w) in enumerate(zip(self.time_samples, self.time_weights)):
            lh = self.l_hat[k] if self.l_hat is not None else self.profile[k] * self.spectrum
            yield s, w, lh

    def support_mask(self) -> np.ndarray:
        if self.l_hat is not None:
            mag = np.sqrt(np.sum(np.abs(self.l_hat) ** 2, axis=(0, 3)))
        else:
            mag = np.sqrt(np.sum(np.abs(self.spectrum) ** 2, axis=-1)) * np.max(np.abs(self.profile))
        return _support(mag)

    def dense(self) -> np.ndarray:
        if self.l_hat is not None:
            return self.l_hat
        return self.profile[:, None, None, None] * self.spectrum[None]

    @property
    def end_time(self) -> float:
        """Last time with a non-zero sample (the source support ends there)."""
        if self.l_hat is not None:
            nz = np.nonzero(np.any(np.abs(self.l_hat) > 0, axis=(1, 2, 3)))[0]
        else:
            nz = np.nonzero(np.abs(self.profile) > 0)[0] if np.any(self.spectrum) else np.zeros(0, int)
        return float(self.time_samples[nz[-1]]) if nz.size else 0.0

    @property
    def cell(self) -> float:
        return _cell(self.axes)

    def scaled(self, k: complex) -> "SourceData":
        if self.l_hat is not None:
            return replace(self, l_hat=self.l_hat * k)
        return replace(self, spectrum=self.spectrum * k)

    def __add__(self, other: "SourceData") -> "SourceData":
        if not (np.array_equal(self.time_samples, other.time_samples) and all(
            np.array_equal(a, b) for a, b in zip(self.axes, other.axes)
        )):
            raise ConfigError("sources must share time samples and covector grid")
        return SourceData(self.time_samples, self.axes, self.dense() + other.dense(), self.time_weights)


@dataclass(frozen=True)
class BoundaryFieldGrid:
    """Leading-order boundary displacement ``f[i, j, :]`` on ``x_axes`` at time t."""

    t: float
    x_axes: tuple
    f: np.ndarray
    f_plus: np.ndarray | None = None
    label: str = "leading order"

    @property
    def points(self) -> np.ndarray:
        return _grid_points(self.x_axes)


# --------------------------------------------------------------------------
# mode coefficients
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ModeCoefficients:
    """Pointwise scalars of the first diagonalizer column on the mode.

    The column is ``(i h u, v) / k1`` with ``u`` the unit covector; the
    elliptic factor ``e0`` is evaluated on the root.
    """

    c: np.ndarray
    h: np.ndarray
    v: np.ndarray
    k1: np.ndarray
    e0: np.ndarray


def rayleigh_coefficients(values) -> ModeCoefficients:
    """``h = mu theta_bar``, ``v = b rho c_R^2``, ``e0 = R'(c_R) / (i (a + b) rho c_R^2)``."""
    values = np.asarray(values, dtype=float)
    mat = disp.ArrayMaterial(values)
    c = disp.rayleigh_speed_params(values)[0]
    a, b, omab, x = disp._radicals(c, mat)
    h = mat.mu * (2.0 * omab - x)
    v = b * mat.rho * c * c
    e0 = disp._rayleigh_d1(c, mat) / (1j * (a + b) * mat.rho * c * c)
    return ModeCoefficients(c, h, v, np.hypot(h, v), e0)


def stoneley_coefficients(plus_values, minus_values) -> ModeCoefficients:
    """``h = zeta_1``, ``v = zeta_2`` and ``e0 = m1'(c_ST) / i``.

    Raises
    ------
    NoStoneleyRoot
    """
    pv = np.asarray(plus_values, dtype=float)
    qv = np.asarray(minus_values, dtype=float)
    c = disp.stoneley_speed_field(pv, qv)
    if np.any(np.isnan(c)):
        raise NoStoneleyRoot("pair has no Stoneley speed at some point")
    P, Q = disp.ArrayMaterial(pv), disp.ArrayMaterial(qv)
    _, _, _, m11, _, z = disp._stoneley_eigs(c, P, Q)
    slope = np.imag(disp._stoneley_eigs(c + 1j * disp.CSTEP, P, Q)[0]) / disp.CSTEP
    return ModeCoefficients(c, z, m11, np.hypot(z, m11), slope / 1j)


def mode_coefficients(speed, x) -> ModeCoefficients:
    x = np.asarray(x, dtype=float)
    if isinstance(speed, RayleighSpeed):
        return rayleigh_coefficients(speed.field.jet(x, order=0).values)
    p = speed.pair.plus.jet(x, order=0).values
    q = speed.pair.minus.jet(x, order=0).values
    return stoneley_coefficients(p, q)


# --------------------------------------------------------------------------
# polarization
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PolarizationSample:
    """Polarization vector ``p`` and the real motion at one phase.

    ``re_p = Re(p e^{i phase})`` and ``im_p = Im(p e^{i phase})``.  The
    frame holds the propagation direction and the upward normal (``-x3``).
    """

    p: np.ndarray
    phase: float
    t: float
    h_scale: float
    v_scale: float
    a0: complex
    k1: float
    direction: np.ndarray
    inv_metric: np.ndarray = field(default_factory=lambda: np.eye(2))
    up: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -1.0]))

    @property
    def re_p(self) -> np.ndarray:
        return np.real(self.p * np.exp(1j * self.phase))

    @property
    def im_p(self) -> np.ndarray:
        return np.imag(self.p * np.exp(1j * self.phase))

    @property
    def frame(self):
        return self.direction, self.up

    def ellipsoid_residual(self, part: str = "re") -> float:
        """Relative defect of ``|q_h|_g^2 / h^2 + q_3^2 / v^2 = |a0|^2 / k1^2`` for the real motion q."""
        q = self.re_p if part == "re" else self.im_p
        qh = q[:2]
        lhs = qh @ self.inv_metric @ qh / self.h_scale**2 + q[2] ** 2 / self.v_scale**2
        rhs = abs(self.a0) ** 2 / self.k1**2
        return float(abs(lhs - rhs) / rhs)

    def conjugated(self) -> "PolarizationSample":
        return replace(self, p=np.conj(self.p))

    def at_phase(self, phase: float, t: float | None = None) -> "PolarizationSample":
        return replace(self, phase=float(phase), t=self.t if t is None else float(t))


def _mode_polarization(pt: EllipticPoint, a0, coef: ModeCoefficients, g, phase) -> PolarizationSample:
    x = np.asarray(pt.x, dtype=float)
    xi = np.asarray(pt.xi, dtype=float)
    A = g.jet(x, order=0).a
    u = xi / np.sqrt(xi @ A @ xi)
    h, v, k1 = float(coef.h), float(coef.v), float(coef.k1)
    p = np.array([1j * h * u[0], 1j * h * u[1], v], dtype=complex) * a0 / k1
    d = -xi / np.hypot(*xi)
    return PolarizationSample(p, float(phase), float(pt.t), h, v, complex(a0), k1, d, np.asarray(A))


def _check_on_mode(pt: EllipticPoint, c: float, g: BoundaryMetric):
    s = pt.tau / pt.xi_norm(g)
    if abs(s - c) > ROOT_TOL * c:
        raise OffCharacteristic(f"slowness {s:.12g} is off the mode speed {c:.12g}")


def rayleigh_polarization(
    pt: EllipticPoint, a0: complex, model, g: BoundaryMetric = IDENTITY_METRIC, phase: float = 0.0
) -> PolarizationSample:
    """``P = (i mu theta_bar u, b rho c_R^2) a0 / k1`` with ``u = xi / |xi|_g``.

    Raises
    ------
    OffCharacteristic
        If ``tau / |xi|_g`` differs from ``c_R(x)`` by more than 1e-8 relative.
    """
    speed = as_speed_model(model)
    if not isinstance(speed, RayleighSpeed):
        raise ConfigError("rayleigh_polarization needs a single material")
    coef = rayleigh_coefficients(speed.field.jet(np.asarray(pt.x), order=0).values)
    _check_on_mode(pt, float(coef.c), g)
    return _mode_polarization(pt, a0, coef, g, phase)


def stoneley_polarization(
    pt: EllipticPoint, a0: complex, pair, g: BoundaryMetric = IDENTITY_METRIC, phase: float = 0.0
) -> PolarizationSample:
    """``P = (i zeta_1 u, zeta_2) a0 / k1`` on the Stoneley variety."""
    if isinstance(pair, tuple):
        pair = MaterialPair(*pair)
    x = np.asarray(pt.x)
    coef = stoneley_coefficients(pair.plus.jet(x, order=0).values, pair.minus.jet(x, order=0).values)
    _check_on_mode(pt, float(coef.c), g)
    return _mode_polarization(pt, a0, coef, g, phase)


def polarization_series(sample: PolarizationSample, omega: float, n: int = 32, upsilon_rate: float = 0.0):
    """Samples over one period at fixed x: phase ``omega t + upsilon_rate t``."""
    rate = omega + upsilon_rate
    ts = np.arange(n) * (2.0 * np.pi / rate) / n
    return [sample.at_phase(sample.phase + rate * t, t) for t in ts]


@dataclass(frozen=True)
class RetrogradeReport:
    """Outcome of the retrograde test for the Re and Im motions."""

    phase_rate_positive: bool
    min_phase_rate: float
    retrograde_re: bool
    retrograde_im: bool
    velocity_re: float
    velocity_im: float
    semi_axes: tuple

    @property
    def retrograde(self) -> bool:
        return self.phase_rate_positive and self.retrograde_re and self.retrograde_im

    def as_dict(self) -> dict:
        return {
            "phase_rate_positive": self.phase_rate_positive,
            "min_phase_rate": self.min_phase_rate,
            "retrograde_re": self.retrograde_re,
            "retrograde_im": self.retrograde_im,
            "velocity_at_top_re": self.velocity_re,
            "velocity_at_top_im": self.velocity_im,
            "semi_axes": list(self.semi_axes),
            "retrograde": self.retrograde,
        }


def _top_velocity(samples, part):
    d, up = samples[0].frame
    q = np.array([getattr(s, part + "_p") for s in samples])
    t = np.array([s.t for s in samples])
    horiz = q[:, :2] @ d
    height = q @ up
    n = len(samples)
    k = int(np.argmax(height))
    dt = t[1] - t[0]
    vel = (horiz[(k + 1) % n] - horiz[(k - 1) % n]) / (2.0 * dt)
    return float(vel), float(np.max(np.abs(horiz))), float(np.max(np.abs(height)))


def retrograde_check(samples) -> RetrogradeReport:
    """Retrograde sense of the motion over one uniformly sampled period.

    The phase must increase in time, and at the sample of maximal upward
    displacement the horizontal velocity along the propagation direction
    must be negative.

    Raises
    ------
    DegenerateEllipse
        If a semi-axis of either motion is below 1e-12.
    ValueError
        If fewer than 16 samples are given.
    """
    if len(samples) < 16:
        raise ValueError("need at least 16 samples over one period")
    phases = np.unwrap([s.phase for s in samples])
    t = np.array([s.t for s in samples])
    rate = np.diff(phases) / np.diff(t)
    v_re, h_re, z_re = _top_velocity(samples, "re")
    v_im, h_im, z_im = _top_velocity(samples, "im")
    axes = (h_re, z_re, h_im, z_im)
    if min(axes) < 1e-12:
        raise DegenerateEllipse(f"semi-axis below 1e-12: {min(axes):.3g}")
    return RetrogradeReport(bool(np.all(rate > 0)), float(rate.min()), v_re < 0, v_im < 0, v_re, v_im, axes)


# --------------------------------------------------------------------------
# direction charts
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DirectionNodes:
    """Interpolation of support angles onto ray directions.

    Each covector k is interpolated between nodes ``j1[k]`` and ``j2[k]``
    with weight ``w[k]`` on ``j2``.
    """

    theta: np.ndarray
    j1: np.ndarray
    j2: np.ndarray
    w: np.ndarray


def direction_nodes(xi: np.ndarray, step: float = ANGLE_STEP) -> DirectionNodes:
    """Group support angles into arcs and place nodes at most ``step`` apart."""
    th = np.arctan2(xi[:, 1], xi[:, 0])
    u = np.unique(np.round(th, 12))
    two_pi = 2.0 * np.pi
    gaps = np.diff(np.concatenate([u, [u[0] + two_pi]]))
    cut = gaps > 2.0 * step
    nodes, j1, j2, w = [], np.zeros(len(th), int), np.zeros(len(th), int), np.zeros(len(th))
    if not np.any(cut):
        # full circle: periodic nodes
        k = int(np.ceil(two_pi / step))
        base = u[0]
        nodes = base + two_pi * np.arange(k) / k
        pos = np.mod(th - base, two_pi) / (two_pi / k)
        i = np.floor(pos).astype(int) % k
        return DirectionNodes(nodes, i, (i + 1) % k, pos - np.floor(pos))
    # arcs start after each cut gap
    starts = np.nonzero(np.roll(cut, 1))[0]
    ends = np.nonzero(cut)[0]
    off = 0
    for s in starts:
        e = ends[np.searchsorted(ends, s) % len(ends)]
        lo = u[s]
        hi = u[e] if e >= s else u[e] + two_pi
        m = max(1, int(np.ceil((hi - lo) / step - 1e-12)))
        if hi == lo:
            arc = np.array([lo])
        else:
            arc = np.linspace(lo, hi, m + 1)
        rel = np.mod(th - lo + 1e-12, two_pi) - 1e-12
        inside = rel <= (hi - lo) + 1e-9
        if arc.size == 1:
            j1[inside] = j2[inside] = off
            w[inside] = 0.0
        else:
            pos = np.clip(rel[inside] / (arc[1] - arc[0]), 0.0, arc.size - 1)
            i = np.minimum(np.floor(pos).astype(int), arc.size - 2)
            j1[inside] = off + i
            j2[inside] = off + i + 1
            w[inside] = pos - i
        nodes.extend(arc.tolist())
        off += arc.size
    return DirectionNodes(np.asarray(nodes), j1, j2, w)


@dataclass(frozen=True)
class DirectionCharts:
    """Per-direction phase remainder ``psi``, direction correction and log-amplitude on output points."""

    psi: np.ndarray
    du: np.ndarray
    log_amp: np.ndarray


def _unit_g(A, omega):
    return omega / np.sqrt(np.einsum("...i,...ij,...j->...", omega, A, omega))[..., None]


def _chart_one(speed, g, t, omega, targets, steps, h):
    """Seeds, psi, direction and log amplitude for unit covector omega at targets."""
    hj = hamiltonian_jet(speed, g, targets, np.broadcast_to(omega, targets.shape), order=1)
    guess = targets + t * hj.lam_xi
    seeds, b = shoot(speed, g, targets, omega, t, guess, steps)
    psi = (seeds - targets) @ omega
    A = g.jet(targets, order=0).a
    grad = b.xi[-1]
    du = _unit_g(A, grad) - _unit_g(A, np.broadcast_to(omega, grad.shape))
    la = bundle_log_amp(speed, g, b, h, stride=max(1, steps // 16)) if not (
        speed.is_constant and g.is_constant
    ) else np.zeros(len(targets), complex)
    return psi, du, la


def direction_charts(
    speed, g, t: float, x_axes, theta: np.ndarray, chart_n: int = CHART_N, dt: float | None = None, h: float = 1e-3
) -> DirectionCharts:
    """Charts for every node direction, resampled to the output grid."""
    X = _grid_points(x_axes).reshape(-1, 2)
    K = len(theta)
    if t == 0.0:
        return DirectionCharts(np.zeros((K, len(X))), np.zeros((K, len(X), 2)), np.zeros((K, len(X)), complex))
    steps = max(1, int(np.ceil(t / (dt if dt is not None else min(2e-2, t / 20)) - 1e-9)))
    a1, a2 = (np.asarray(a, dtype=float) for a in x_axes)
    coarse = len(a1) > chart_n and len(a2) > chart_n
    if coarse:
        c_axes = (np.linspace(a1[0], a1[-1], chart_n), np.linspace(a2[0], a2[-1], chart_n))
        targets = _grid_points(c_axes).reshape(-1, 2)
    else:
        targets = X
    psi = np.empty((K, len(X)))
    du = np.empty((K, len(X), 2))
    la = np.empty((K, len(X)), complex)
    for k, th in enumerate(theta):
        omega = np.array([np.cos(th), np.sin(th)])
        p, d, l_ = _chart_one(speed, g, t, omega, targets, steps, h)
        if coarse:
            def up(v):
                r = RectBivariateSpline(*c_axes, v.reshape(chart_n, chart_n), kx=3, ky=3)
                return r(a1, a2).reshape(-1)
            psi[k] = up(p)
            du[k, :, 0], du[k, :, 1] = up(d[:, 0]), up(d[:, 1])
            la[k] = up(l_.real) + 1j * up(l_.imag)
        else:
            psi[k], du[k], la[k] = p, d, l_
    return DirectionCharts(psi, du, la)


# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------


def _field_sum(X, coef, A, nodes, charts, xi, weight, mode):
    """Chunked Riemann sum; ``weight`` is (M,) for Cauchy data or (M, 3) for sources."""
    out = np.zeros((len(X), 3), dtype=complex)
    has_du = np.any(charts.du)
    has_la = np.any(charts.log_amp)
    uniform = not has_du and np.all(A == A[:1])
    if uniform:
        A = A[:1]
    a11, a12, a22 = A[:, 0, 0], A[:, 0, 1], A[:, 1, 1]
    for s0 in range(0, len(xi), CHUNK):
        sl = slice(s0, s0 + CHUNK)
        xs = xi[sl]
        j1, j2, w = nodes.j1[sl], nodes.j2[sl], nodes.w[sl][:, None]
        x1, x2 = xs[:, :1], xs[:, 1:]
        ng = np.sqrt(a11 * x1 * x1 + 2.0 * a12 * x1 * x2 + a22 * x2 * x2)
        u1, u2 = x1 / ng, x2 / ng
        if has_du:
            u1 = u1 + (1 - w) * charts.du[j1, :, 0] + w * charts.du[j2, :, 0]
            u2 = u2 + (1 - w) * charts.du[j1, :, 1] + w * charts.du[j2, :, 1]
        ph = xs @ X.T
        ne = np.hypot(x1, x2)
        ph += ne * ((1 - w) * charts.psi[j1] + w * charts.psi[j2])
        E = np.empty(ph.shape, dtype=complex)
        np.cos(ph, out=E.real)
        np.sin(ph, out=E.imag)
        if has_la:
            E *= np.exp(-((1 - w) * charts.log_amp[j1] + w * charts.log_amp[j2]))
        if mode == "cauchy":
            E *= weight[sl, None]
        else:
            lw = weight[sl]
            comb = -1j * coef.h[None, :] * (u1 * lw[:, :1] + u2 * lw[:, 1:2]) + coef.v[None, :] * lw[:, 2:3]
            E *= comb / (coef.e0 * coef.k1)[None, :]
        if uniform and mode == "cauchy":
            out[:, 0] += u1[:, 0] @ E
            out[:, 1] += u2[:, 0] @ E
        else:
            out[:, 0] += np.einsum("bx,bx->x", E, np.broadcast_to(u1, E.shape))
            out[:, 1] += np.einsum("bx,bx->x", E, np.broadcast_to(u2, E.shape))
        out[:, 2] += E.sum(axis=0)
    out[:, 0] *= 1j * coef.h / coef.k1
    out[:, 1] *= 1j * coef.h / coef.k1
    out[:, 2] *= coef.v / coef.k1
    return out


def _prepare(model, x_axes, g):
    speed = as_speed_model(model)
    x_axes = tuple(np.asarray(a, dtype=float) for a in x_axes)
    X = _grid_points(x_axes).reshape(-1, 2)
    coef = mode_coefficients(speed, X)
    A = np.broadcast_to(g.jet(X, order=0).a, (len(X), 2, 2))
    return speed, x_axes, X, coef, A


def cauchy_field(
    packet: WavePacketData,
    t: float,
    x_axes,
    model,
    g: BoundaryMetric = IDENTITY_METRIC,
    angle_step: float = ANGLE_STEP,
    chart_n: int = CHART_N,
    dt: float | None = None,
) -> BoundaryFieldGrid:
    """Leading-order field from Cauchy data ``h_hat``.

    ``f(t, x) = sum_xi P(t, x, xi) a0 exp(i phi) h_hat(xi) dxi``.

    Raises
    ------
    CausticEncountered, LeftWorkingBox, NoStoneleyRoot
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    speed, x_axes, X, coef, A = _prepare(model, x_axes, g)
    xi, w = packet.support()
    shape = (len(x_axes[0]), len(x_axes[1]), 3)
    if len(xi) == 0:
        return BoundaryFieldGrid(float(t), x_axes, np.zeros(shape, complex))
    nodes = direction_nodes(xi, angle_step)
    charts = direction_charts(speed, g, float(t), x_axes, nodes.theta, chart_n, dt)
    f = _field_sum(X, coef, A, nodes, charts, xi, w, "cauchy")
    return BoundaryFieldGrid(float(t), x_axes, f.reshape(shape))


def _fold_flat_source(speed, g, src: SourceData, t, xi, mask):
    """Fold the s-quadrature into one spectrum (exact for a constant medium)."""
    c = float(speed.speed(np.zeros(2)))
    A = g.jet(np.zeros(2), order=0).a
    ng = np.sqrt(np.einsum("bi,ij,bj->b", xi, A, xi))
    out = np.zeros((len(xi), 3), complex)
    for s, ws, lh in src.slices():
        out += (ws * np.exp(-1j * c * s * ng))[:, None] * lh[mask]
    return out * (np.exp(1j * c * t * ng))[:, None]


def inhomogeneous_field(
    src: SourceData,
    t: float,
    x_axes,
    model,
    g: BoundaryMetric = IDENTITY_METRIC,
    angle_step: float = ANGLE_STEP,
    chart_n: int = CHART_N,
    dt: float | None = None,
) -> BoundaryFieldGrid:
    """Leading-order field of an expired boundary source.

    Each source time contributes the mode column times
    ``e0^{-1} (conj column) . l_hat``; for a Rayleigh wave this is
    ``(i mu theta_bar u, b rho c^2) (mu theta_bar u . l_h + i b rho c^2 l_3) / (b rho c^2 R'(c))``.

    Raises
    ------
    SourceNotExpired
        If ``t`` is earlier than the end of the source support.
    """
    if t < src.end_time:
        raise SourceNotExpired(f"t = {t} precedes the end of the source support {src.end_time}")
    speed, x_axes, X, coef, A = _prepare(model, x_axes, g)
    mask = src.support_mask()
    xi = _grid_points(src.axes)[mask]
    shape = (len(x_axes[0]), len(x_axes[1]), 3)
    if len(xi) == 0:
        return BoundaryFieldGrid(float(t), x_axes, np.zeros(shape, complex))
    nodes = direction_nodes(xi, angle_step)
    cell = src.cell
    if speed.is_constant and g.is_constant:
        weight = _fold_flat_source(speed, g, src, t, xi, mask) * cell
        charts = direction_charts(speed, g, 0.0, x_axes, nodes.theta, chart_n, dt)
        f = _field_sum(X, coef, A, nodes, charts, xi, weight, "source")
    else:
        f = np.zeros((len(X), 3), complex)
        for s, ws, lh in src.slices():
            weight = lh[mask] * (ws * cell)
            if not np.any(weight):
                continue
            charts = direction_charts(speed, g, float(t - s), x_axes, nodes.theta, chart_n, dt)
            f += _field_sum(X, coef, A, nodes, charts, xi, weight, "source")
    return BoundaryFieldGrid(float(t), x_axes, f.reshape(shape))


def stoneley_field(
    data,
    pair,
    t: float,
    x_axes,
    g: BoundaryMetric = IDENTITY_METRIC,
    jump=None,
    **kw,
) -> BoundaryFieldGrid:
    """Interface field ``f^-`` from Cauchy data or a source, with ``f^+ = l + f^-``.

    ``jump`` holds the displacement jump ``l`` sampled on the output grid at
    time t (zero when omitted).

    Raises
    ------
    NoStoneleyRoot
    """
    if isinstance(pair, tuple):
        pair = MaterialPair(*pair)
    speed = StoneleySpeed(pair)
    c0 = disp.stoneley_speed(pair, np.zeros(2))
    if not c0.exists:
        raise NoStoneleyRoot("pair has no Stoneley speed")
    if isinstance(data, WavePacketData):
        fg = cauchy_field(data, t, x_axes, speed, g, **kw)
    else:
        fg = inhomogeneous_field(data, t, x_axes, speed, g, **kw)
    plus = fg.f.copy() if jump is None else fg.f + np.asarray(jump, dtype=complex)
    return replace(fg, f_plus=plus)


# --------------------------------------------------------------------------
# diagnostics on synthesized fields
# --------------------------------------------------------------------------


def packet_center(fg: BoundaryFieldGrid, level: float = 0.05) -> np.ndarray:
    """Intensity-weighted centroid of the main lobe (``|f|^2 >= level max``)."""
    inten = np.sum(np.abs(fg.f) ** 2, axis=-1)
    w = np.where(inten >= level * inten.max(), inten, 0.0)
    P = fg.points
    return np.einsum("ij,ijk->k", w, P) / w.sum()


@dataclass(frozen=True)
class PropagationFit:
    speed: float
    direction: np.ndarray
    velocity: np.ndarray

    def angle_to(self, d) -> float:
        d = np.asarray(d, float) / np.hypot(*d)
        return float(np.degrees(np.arccos(np.clip(self.direction @ d, -1.0, 1.0))))


def fit_propagation(times, centers) -> PropagationFit:
    """Least-squares velocity of packet centres."""
    t = np.asarray(times, float)
    C = np.asarray(centers, float)
    V = np.polyfit(t, C, 1)[0]
    sp = float(np.hypot(*V))
    return PropagationFit(sp, V / sp, V)


def compatibility_mismatch(packet: WavePacketData, x_axes, model, g: BoundaryMetric = IDENTITY_METRIC) -> float:
    """Relative L2 gap between ``f(0, .)`` and the frozen column at the packet centre times ``h``."""
    fg = cauchy_field(packet, 0.0, x_axes, model, g)
    speed, x_axes, X, coef, A = _prepare(model, x_axes, g)
    xi, w = packet.support()
    h = np.exp(1j * X @ xi.T) @ w
    xc = np.asarray(packet.center, float)
    u = xc / np.sqrt(np.einsum("i,xij,j->x", xc, A, xc))[:, None]
    col = np.stack([1j * coef.h * u[:, 0], 1j * coef.h * u[:, 1], coef.v], -1) / coef.k1[:, None]
    ref = col * h[:, None]
    f = fg.f.reshape(-1, 3)
    return float(np.linalg.norm(f - ref) / np.linalg.norm(f))


# --------------------------------------------------------------------------
# bulk extension
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EvanescentProfile:
    """Depth samples ``w[d, k, :]`` and ``u[d, k, :]`` for covectors k.

    ``exact`` is true for a constant medium with constant metric.
    """

    depths: np.ndarray
    w: np.ndarray
    u: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    exact: bool


def _restriction(values, tau, xi_frame, sign):
    loc = local_arrays(values, tau, xi_frame)
    if sign < 0:
        loc = replace(loc, alpha=-loc.alpha, beta=-loc.beta)
    U, Ui, _ = restriction_arrays(loc)
    return U, Ui, loc.alpha, loc.beta


def evanescent_profile(
    xi,
    f_hat,
    depths,
    model,
    g: BoundaryMetric = IDENTITY_METRIC,
    x=(0.0, 0.0),
    tau=None,
) -> EvanescentProfile:
    """Extend boundary spectra into the bulk at leading order.

    ``w_b = U_out^{-1} f_hat`` and ``w(x3) = diag(e^{-alpha x3}, e^{-alpha x3},
    e^{-beta x3}) w_b``; ``u = U_out w``.  Coefficients are frozen at ``x``.
    For an interface pair the plus side is used for ``x3 >= 0`` and the minus
    side, with decay ``e^{+alpha_- x3}``, for ``x3 < 0``.  ``tau`` defaults to
    the mode speed times ``|xi|_g``.

    Raises
    ------
    OutsideEllipticInterior
    """
    speed = as_speed_model(model)
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    f_hat = np.atleast_2d(np.asarray(f_hat, dtype=complex))
    depths = np.atleast_1d(np.asarray(depths, dtype=float))
    x = np.asarray(x, dtype=float)
    xf = np.einsum("ij,kj->ki", g.frame(x), xi) if not g.is_identity else xi
    n = np.hypot(xf[:, 0], xf[:, 1])
    if tau is None:
        tau = float(speed.speed(x)) * n
    tau = np.broadcast_to(np.asarray(tau, dtype=float), n.shape)
    if isinstance(speed, RayleighSpeed):
        sides = [(speed.field.jet(x, order=0).values, 1.0, depths >= 0)]
        if np.any(depths < 0):
            raise ValueError("depths must be non-negative for a half-space")
    else:
        sides = [
            (speed.pair.plus.jet(x, order=0).values, 1.0, depths >= 0),
            (speed.pair.minus.jet(x, order=0).values, -1.0, depths < 0),
        ]
    W = np.zeros((len(depths), len(xi), 3), complex)
    Uo = np.zeros_like(W)
    alpha = beta = None
    for vals, sign, sel in sides:
        V = np.broadcast_to(vals, (len(xi), 3))
        U, Ui, al, be = _restriction(V, tau, xf, sign)
        if alpha is None:
            alpha, beta = np.abs(al), np.abs(be)
        wb = np.einsum("kij,kj->ki", Ui, f_hat)
        d = depths[sel][:, None]
        decay = np.stack([np.exp(-al[None] * d), np.exp(-al[None] * d), np.exp(-be[None] * d)], -1)
        W[sel] = decay * wb[None]
        Uo[sel] = np.einsum("kij,dkj->dki", U, W[sel])
    exact = speed.is_constant and g.is_constant
    return EvanescentProfile(depths, W, Uo, alpha, beta, exact)
