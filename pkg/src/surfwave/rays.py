"""Bicharacteristics of ``lambda = c(x) |xi|_g``, phase charts and transport.

The phase solves ``phi_t = lambda(x, grad phi)`` with ``phi(0, x) = x . xi0``.
Characteristics of ``H = tau - lambda`` give

    x' = -d_xi lambda,    xi' = +d_x lambda,

so ``lambda`` and ``phi`` are conserved along every ray.  The paraxial
system for ``J = dx/dx0`` and ``K = dxi/dx0`` yields ``hess phi = K J^{-1}``.
The leading amplitude obeys ``d a0/dt = -gamma a0`` with
``gamma = r0 - tr(lambda_xixi hess phi) / 2``.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import RegularGridInterpolator

from . import dispersion as disp
from .errors import (
    CausticEncountered,
    InterpolationGap,
    LeftWorkingBox,
    NoStoneleyRoot,
    StepTooLarge,
)
from .materials import (
    IDENTITY_METRIC,
    BoundaryMetric,
    MaterialField,
    MaterialPair,
    MaterialPoint,
    _in_box,
    constant_field,
)
from .symbols import r0_arrays

DRIFT_LIMIT = 1e-6
CAUSTIC_DET = 1e-6
MIN_STEPS = 100


# --------------------------------------------------------------------------
# speed models
# --------------------------------------------------------------------------


def _box_intersection(a, b):
    return (
        (max(a[0][0], b[0][0]), min(a[0][1], b[0][1])),
        (max(a[1][0], b[1][0]), min(a[1][1], b[1][1])),
    )


@dataclass(frozen=True)
class RayleighSpeed:
    """Rayleigh speed ``c_R(x)`` of a material field with exact derivatives."""

    field: MaterialField

    @property
    def box(self):
        return self.field.box

    @property
    def is_constant(self) -> bool:
        return self.field.is_constant

    @property
    def min_width(self) -> float:
        return self.field.min_width

    def jet(self, x):
        """Return ``(c, grad c, hess c)`` at points of shape (..., 2)."""
        return disp.rayleigh_speed_jet(self.field.jet(x, order=2, check=False))

    def speed(self, x):
        return disp.rayleigh_speed_params(self.field.jet(x, order=0, check=False).values)[0]

    def r0(self, g: BoundaryMetric, x, xi, h: float = 1e-3):
        x = np.asarray(x, dtype=float)
        if self.is_constant and g.is_constant:
            return np.zeros(x.shape[:-1], dtype=complex)
        return r0_arrays(self.field, g, x, np.asarray(xi, dtype=float), h=h)[0]


@dataclass(frozen=True)
class StoneleySpeed:
    """Stoneley speed ``c_ST(x)`` of an interface pair.

    Derivatives come from fourth-order central differences with step
    ``rel_step * min_width``.  The lower-order transport symbol is taken
    as zero for interface waves.
    """

    pair: MaterialPair
    rel_step: float = 1e-2

    @property
    def box(self):
        return self.pair.box

    @property
    def is_constant(self) -> bool:
        return self.pair.is_constant

    @property
    def min_width(self) -> float:
        return self.pair.min_width

    @cached_property
    def _constant_speed(self) -> float:
        c = disp.stoneley_speed_field(self.pair.plus.jet(np.zeros(2), order=0, check=False).values,
                                      self.pair.minus.jet(np.zeros(2), order=0, check=False).values)
        return float(c)

    def speed(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_constant:
            if np.isnan(self._constant_speed):
                raise NoStoneleyRoot("pair has no Stoneley root")
            return np.full(x.shape[:-1], self._constant_speed)
        p = self.pair.plus.jet(x, order=0, check=False).values
        q = self.pair.minus.jet(x, order=0, check=False).values
        c = disp.stoneley_speed_field(p, q)
        if np.any(np.isnan(c)):
            raise NoStoneleyRoot("no Stoneley root at some evaluation point")
        return c

    def jet(self, x):
        x = np.asarray(x, dtype=float)
        c = self.speed(x)
        lead = x.shape[:-1]
        if self.is_constant:
            return c, np.zeros(lead + (2,)), np.zeros(lead + (2, 2))
        h = self.rel_step * self.min_width
        e = np.eye(2) * h
        f = {}
        for i in range(2):
            for k in (-2, -1, 1, 2):
                f[i, k] = self.speed(x + k * e[i])
        grad = np.stack(
            [(-f[i, 2] + 8 * f[i, 1] - 8 * f[i, -1] + f[i, -2]) / (12 * h) for i in range(2)], axis=-1
        )
        hess = np.zeros(lead + (2, 2))
        for i in range(2):
            hess[..., i, i] = (-f[i, 2] + 16 * f[i, 1] - 30 * c + 16 * f[i, -1] - f[i, -2]) / (12 * h * h)
        d = e[0] + e[1]
        a = e[0] - e[1]

        def cross(k):
            return self.speed(x + k * d) - self.speed(x + k * a) - self.speed(x - k * a) + self.speed(x - k * d)

        hess[..., 0, 1] = hess[..., 1, 0] = (16 * cross(1) - cross(2)) / (48 * h * h)
        return c, grad, hess

    def r0(self, g: BoundaryMetric, x, xi, h: float = 1e-3):
        return np.zeros(np.asarray(x).shape[:-1], dtype=complex)


def as_speed_model(model):
    """Wrap materials into a speed model (Rayleigh for one side, Stoneley for a pair)."""
    if isinstance(model, (RayleighSpeed, StoneleySpeed)):
        return model
    if isinstance(model, MaterialPoint):
        return RayleighSpeed(constant_field(model))
    if isinstance(model, MaterialField):
        return RayleighSpeed(model)
    if isinstance(model, MaterialPair):
        return StoneleySpeed(model)
    raise TypeError(f"cannot build a speed model from {type(model).__name__}")


def working_box(speed, g: BoundaryMetric):
    return _box_intersection(speed.box, g.box)


# --------------------------------------------------------------------------
# Hamiltonian derivatives
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class HamiltonianJet:
    """``lambda = c |xi|_g`` and derivatives; ``cross[k, i] = d_xk d_xii lambda``."""

    lam: np.ndarray
    lam_x: np.ndarray
    lam_xi: np.ndarray
    lam_xx: np.ndarray | None = None
    lam_xixi: np.ndarray | None = None
    cross: np.ndarray | None = None


def hamiltonian_jet(speed, g: BoundaryMetric, x, xi, order: int = 2) -> HamiltonianJet:
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    c, dc, d2c = speed.jet(x)
    mj = g.jet(x, order=2, check=False)
    A = np.broadcast_to(mj.a, x.shape[:-1] + (2, 2))
    Axi = np.einsum("...ij,...j->...i", A, xi)
    N = np.sqrt(np.einsum("...i,...i->...", xi, Axi))
    dAxi = np.einsum("...ijk,...j->...ik", mj.da, xi)
    dN = np.einsum("...i,...ik->...k", xi, dAxi) / (2.0 * N[..., None])
    lam = c * N
    lam_xi = (c / N)[..., None] * Axi
    lam_x = dc * N[..., None] + c[..., None] * dN
    if order < 2:
        return HamiltonianJet(lam, lam_x, lam_xi)
    outer = Axi[..., :, None] * Axi[..., None, :]
    lam_xixi = (c / N)[..., None, None] * (A - outer / (N * N)[..., None, None])
    d2N = np.einsum("...i,...ijkl,...j->...kl", xi, mj.d2a, xi) / (2.0 * N[..., None, None])
    d2N = d2N - dN[..., :, None] * dN[..., None, :] / N[..., None, None]
    lam_xx = (
        d2c * N[..., None, None]
        + dc[..., :, None] * dN[..., None, :]
        + dN[..., :, None] * dc[..., None, :]
        + c[..., None, None] * d2N
    )
    cross = (
        dc[..., :, None] * Axi[..., None, :] / N[..., None, None]
        + (c / N)[..., None, None] * np.swapaxes(dAxi, -1, -2)
        - (c / (N * N))[..., None, None] * dN[..., :, None] * Axi[..., None, :]
    )
    return HamiltonianJet(lam, lam_x, lam_xi, lam_xx, lam_xixi, cross)


# --------------------------------------------------------------------------
# bundle integrator
# --------------------------------------------------------------------------


def _rhs(speed, g, y, paraxial):
    x, xi = y[..., 0:2], y[..., 2:4]
    hj = hamiltonian_jet(speed, g, x, xi, order=2 if paraxial else 1)
    out = np.empty_like(y)
    out[..., 0:2] = -hj.lam_xi
    out[..., 2:4] = hj.lam_x
    out[..., 4] = hj.lam - np.einsum("...i,...i->...", hj.lam_xi, xi)
    if paraxial:
        J = y[..., 5:9].reshape(y.shape[:-1] + (2, 2))
        K = y[..., 9:13].reshape(y.shape[:-1] + (2, 2))
        C = hj.cross
        Ct = np.swapaxes(C, -1, -2)
        dJ = -(Ct @ J) - hj.lam_xixi @ K
        dK = hj.lam_xx @ J + C @ K
        out[..., 5:9] = dJ.reshape(y.shape[:-1] + (4,))
        out[..., 9:13] = dK.reshape(y.shape[:-1] + (4,))
    return out


@dataclass(frozen=True)
class Bundle:
    """Histories of a family of rays; arrays have shape (steps + 1, n, ...)."""

    t: np.ndarray
    x: np.ndarray
    xi: np.ndarray
    phase: np.ndarray
    jac: np.ndarray | None = None
    dxi: np.ndarray | None = None

    @property
    def hess(self) -> np.ndarray | None:
        if self.jac is None:
            return None
        return self.dxi @ np.linalg.inv(self.jac)

    @property
    def det_jac(self) -> np.ndarray | None:
        return None if self.jac is None else np.linalg.det(self.jac)

    def head(self, k: int) -> "Bundle":
        cut = lambda a: None if a is None else a[:k]  # noqa: E731
        return Bundle(self.t[:k], self.x[:k], self.xi[:k], self.phase[:k], cut(self.jac), cut(self.dxi))


def integrate_bundle(speed, g, x0, xi0, T: float, steps: int, paraxial: bool = False, check_drift: bool = True):
    """Classical RK4 for a bundle of rays with ``steps`` equal steps to time T.

    Raises
    ------
    LeftWorkingBox
        If any ray leaves the working box at a step end.
    StepTooLarge
        If the relative drift of ``lambda`` exceeds ``DRIFT_LIMIT``.
    """
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    xi0 = np.atleast_2d(np.asarray(xi0, dtype=float))
    x0, xi0 = np.broadcast_arrays(x0, xi0)
    n = x0.shape[0]
    box = working_box(speed, g)
    if not np.all(_in_box(box, x0)):
        raise LeftWorkingBox("initial point outside the working box")
    width = 13 if paraxial else 5
    y = np.zeros((n, width))
    y[:, 0:2], y[:, 2:4] = x0, xi0
    y[:, 4] = np.einsum("ni,ni->n", x0, xi0)
    if paraxial:
        y[:, 5:9] = np.eye(2).reshape(4)
    hist = np.empty((steps + 1, n, width))
    hist[0] = y
    lam0 = hamiltonian_jet(speed, g, x0, xi0, order=1).lam
    dt = T / steps if steps else 0.0
    for k in range(steps):
        k1 = _rhs(speed, g, y, paraxial)
        k2 = _rhs(speed, g, y + 0.5 * dt * k1, paraxial)
        k3 = _rhs(speed, g, y + 0.5 * dt * k2, paraxial)
        k4 = _rhs(speed, g, y + dt * k3, paraxial)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(_in_box(box, y[:, 0:2])):
            raise LeftWorkingBox(f"ray left the working box {box} at t = {(k + 1) * dt:.6g}")
        hist[k + 1] = y
    if check_drift and steps:
        lam = hamiltonian_jet(speed, g, hist[-1, :, 0:2], hist[-1, :, 2:4], order=1).lam
        drift = np.max(np.abs(lam / lam0 - 1.0))
        if drift > DRIFT_LIMIT:
            raise StepTooLarge(f"Hamiltonian drift {drift:.3g} exceeds {DRIFT_LIMIT}")
    t = np.linspace(0.0, T, steps + 1)
    jac = dxi = None
    if paraxial:
        jac = hist[..., 5:9].reshape(steps + 1, n, 2, 2)
        dxi = hist[..., 9:13].reshape(steps + 1, n, 2, 2)
    return Bundle(t, hist[..., 0:2], hist[..., 2:4], hist[..., 4], jac, dxi)


def _steps_for(T: float, dt: float) -> int:
    if T < 0 or dt <= 0:
        raise ValueError("need T >= 0 and dt > 0")
    return int(np.ceil(T / dt - 1e-9)) if T > 0 else 0


# --------------------------------------------------------------------------
# single rays
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RayState:
    """One sample along a ray.

    ``jac`` is ``dx/dx0``, ``hess`` the spatial Hessian of the phase and
    ``log_amp`` the accumulated ``int gamma``.
    """

    t: float
    x: np.ndarray
    xi: np.ndarray
    phase: float
    jac: np.ndarray | None = None
    hess: np.ndarray | None = None
    log_amp: complex = 0j


@dataclass(frozen=True)
class Ray(Sequence):
    """A traced ray; indexing yields :class:`RayState` samples."""

    t: np.ndarray
    x: np.ndarray
    xi: np.ndarray
    phase: np.ndarray
    dt: float
    jac: np.ndarray | None = None
    dxi: np.ndarray | None = None
    log_amp: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[k] for k in range(*i.indices(len(self)))]
        hess = self.hess
        return RayState(
            float(self.t[i]),
            self.x[i].copy(),
            self.xi[i].copy(),
            float(self.phase[i]),
            None if self.jac is None else self.jac[i].copy(),
            None if hess is None else hess[i].copy(),
            0j if self.log_amp is None else complex(self.log_amp[i]),
        )

    @property
    def hess(self):
        if self.jac is None:
            return None
        return self.dxi @ np.linalg.inv(self.jac)

    @property
    def det_jac(self):
        return None if self.jac is None else np.linalg.det(self.jac)

    @classmethod
    def _from_bundle(cls, b: Bundle, dt: float) -> "Ray":
        take = lambda a: None if a is None else a[:, 0]  # noqa: E731
        return cls(b.t, b.x[:, 0], b.xi[:, 0], b.phase[:, 0], dt, take(b.jac), take(b.dxi))


def trace_ray(x0, xi0, T: float, dt: float, model, g: BoundaryMetric = IDENTITY_METRIC) -> Ray:
    """Integrate one bicharacteristic with classical RK4.

    Raises
    ------
    StepTooLarge
        If ``dt > T / 100`` or the Hamiltonian drifts by more than 1e-6.
    LeftWorkingBox
        If the ray exits the working box.
    """
    speed = as_speed_model(model)
    if T > 0 and dt > T / MIN_STEPS * (1 + 1e-12):
        raise StepTooLarge(f"dt = {dt} exceeds T/{MIN_STEPS}")
    steps = _steps_for(T, dt)
    b = integrate_bundle(speed, g, x0, xi0, T, steps)
    return Ray._from_bundle(b, dt)


def dynamic_ray(ray: Ray, model, g: BoundaryMetric = IDENTITY_METRIC) -> Ray:
    """Fill the paraxial Jacobian and the phase Hessian along a traced ray.

    Raises
    ------
    CausticEncountered
        When ``det J`` drops below 1e-6; ``partial`` holds the ray up to
        the last regular sample.
    """
    speed = as_speed_model(model)
    steps = len(ray) - 1
    b = integrate_bundle(speed, g, ray.x[0], ray.xi[0], float(ray.t[-1]), steps, paraxial=True)
    out = Ray._from_bundle(b, ray.dt)
    det = out.det_jac
    bad = np.nonzero(det < CAUSTIC_DET)[0]
    if bad.size:
        k = int(bad[0])
        partial = replace(out, **{f: getattr(out, f)[:k] for f in ("t", "x", "xi", "phase", "jac", "dxi")})
        raise CausticEncountered(f"caustic at t = {out.t[k]:.6g} (det J = {det[k]:.3g})", partial=partial)
    return out


# --------------------------------------------------------------------------
# transport
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TransportLog:
    """Accumulated transport integrals at one sample.

    ``a0 = exp(-gamma1_int) exp(-i gamma2_int)`` and ``upsilon = -gamma2_int``.
    """

    t: float
    gamma1_int: float
    gamma2_int: float

    @property
    def a0(self) -> complex:
        return complex(np.exp(-self.gamma1_int) * np.exp(-1j * self.gamma2_int))

    @property
    def upsilon(self) -> float:
        return -self.gamma2_int


def gamma_values(speed, g, x, xi, hess, h: float = 1e-3):
    """Transport coefficient ``r0 - tr(lambda_xixi hess) / 2``."""
    hj = hamiltonian_jet(speed, g, x, xi, order=2)
    curv = 0.5 * np.einsum("...ij,...ji->...", hj.lam_xixi, hess)
    return speed.r0(g, x, xi, h) - curv


def _accumulate(t, gamma):
    """Cumulative integral along axis 0 (Simpson when at least 3 nodes)."""
    gamma = np.asarray(gamma, dtype=complex)
    if len(t) < 3:
        w = 0.5 * np.diff(t).reshape((-1,) + (1,) * (gamma.ndim - 1))
        steps = w * (gamma[1:] + gamma[:-1])
        return np.concatenate([np.zeros((1,) + gamma.shape[1:], complex), np.cumsum(steps, axis=0)])
    re = cumulative_simpson(gamma.real, x=t, axis=0, initial=0)
    im = cumulative_simpson(gamma.imag, x=t, axis=0, initial=0)
    return re + 1j * im


def transport_amplitude(ray: Ray, model, g: BoundaryMetric = IDENTITY_METRIC, h: float = 1e-3) -> list[TransportLog]:
    """Integrate the leading amplitude along a ray carrying a phase Hessian.

    Raises
    ------
    ValueError
        If the ray has no paraxial data (call :func:`dynamic_ray` first).
    """
    if ray.jac is None:
        raise ValueError("transport needs the phase Hessian; run dynamic_ray first")
    speed = as_speed_model(model)
    gam = gamma_values(speed, g, ray.x, ray.xi, ray.hess, h)
    acc = _accumulate(ray.t, gam)
    return [TransportLog(float(t), float(a.real), float(a.imag)) for t, a in zip(ray.t, acc)]


def with_transport(ray: Ray, logs: list[TransportLog]) -> Ray:
    """Copy of ``ray`` with ``log_amp`` filled from transport logs."""
    la = np.array([complex(lg.gamma1_int, lg.gamma2_int) for lg in logs])
    return replace(ray, log_amp=la)


def bundle_log_amp(speed, g, b: Bundle, h: float = 1e-3, stride: int = 1) -> np.ndarray:
    """``int_0^T gamma`` at the end of each ray of a paraxial bundle."""
    idx = np.arange(0, len(b.t), stride)
    if idx[-1] != len(b.t) - 1:
        idx = np.append(idx, len(b.t) - 1)
    gam = gamma_values(speed, g, b.x[idx], b.xi[idx], b.hess[idx], h)
    return _accumulate(b.t[idx], gam)[-1]


# --------------------------------------------------------------------------
# phase charts
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseChart:
    """Phase on a regular grid at time ``t`` for initial covector ``xi0``.

    Arrays are indexed ``[i1, i2]`` over ``axes = (x1, x2)``.  ``x0`` holds
    the seed of the ray reaching each node, ``caustic`` flags nodes with
    ``|det J| < 1e-6``.
    """

    t: float
    xi0: np.ndarray
    axes: tuple
    phi: np.ndarray
    grad: np.ndarray
    x0: np.ndarray
    det_jac: np.ndarray
    caustic: np.ndarray
    hess: np.ndarray | None = None
    log_amp: np.ndarray | None = None

    @property
    def points(self) -> np.ndarray:
        X1, X2 = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([X1, X2], axis=-1)


def _bilinear_inverse(X: np.ndarray, axes0, targets: np.ndarray, iters: int = 30):
    """Invert the bilinear interpolant of a deformed grid ``X[i, j] -> seed``."""
    n1, n2 = X.shape[:2]
    a1, a2 = (np.asarray(a, dtype=float) for a in axes0)
    # affine first guess from the fan mean
    S = np.stack(np.meshgrid(a1, a2, indexing="ij"), -1).reshape(-1, 2)
    Xf = X.reshape(-1, 2)
    sm, xm = S.mean(0), Xf.mean(0)
    M, *_ = np.linalg.lstsq(S - sm, Xf - xm, rcond=None)
    seeds = sm + np.linalg.solve(M.T, (targets - xm).T).T
    u = np.stack([np.interp(seeds[:, 0], a1, np.arange(n1)), np.interp(seeds[:, 1], a2, np.arange(n2))], -1)
    for _ in range(iters):
        i = np.clip(np.floor(u[:, 0]).astype(int), 0, n1 - 2)
        j = np.clip(np.floor(u[:, 1]).astype(int), 0, n2 - 2)
        p, q = (u[:, 0] - i)[:, None], (u[:, 1] - j)[:, None]
        x00, x10, x01, x11 = X[i, j], X[i + 1, j], X[i, j + 1], X[i + 1, j + 1]
        val = (1 - p) * (1 - q) * x00 + p * (1 - q) * x10 + (1 - p) * q * x01 + p * q * x11
        dp = (1 - q) * (x10 - x00) + q * (x11 - x01)
        dq = (1 - p) * (x01 - x00) + p * (x11 - x10)
        Jm = np.stack([dp, dq], axis=-1)
        step = np.linalg.solve(Jm, (targets - val)[..., None])[..., 0]
        u = u + step
        u[:, 0] = np.clip(u[:, 0], -0.5, n1 - 0.5)
        u[:, 1] = np.clip(u[:, 1], -0.5, n2 - 0.5)
    inside = (u[:, 0] >= -1e-9) & (u[:, 0] <= n1 - 1 + 1e-9) & (u[:, 1] >= -1e-9) & (u[:, 1] <= n2 - 1 + 1e-9)
    ok = inside & (np.hypot(*(targets - val).T) < 1e-9 * (1.0 + np.abs(targets).max()))
    seeds = np.stack([np.interp(u[:, 0], np.arange(n1), a1), np.interp(u[:, 1], np.arange(n2), a2)], -1)
    return seeds, ok


def _default_dt(t: float) -> float:
    return min(1e-2, t / MIN_STEPS) if t > 0 else 1e-2


def shoot(speed, g, targets, xi0, t: float, seeds, steps: int, iters: int = 8, tol: float = 1e-12):
    """Newton shooting: find seeds whose rays reach ``targets`` at time t."""
    seeds = np.array(seeds, dtype=float)
    xi0 = np.broadcast_to(np.asarray(xi0, dtype=float), seeds.shape)
    for _ in range(iters):
        b = integrate_bundle(speed, g, seeds, xi0, t, steps, paraxial=True)
        miss = targets - b.x[-1]
        if np.max(np.abs(miss)) <= tol * (1.0 + np.max(np.abs(targets))):
            return seeds, b
        seeds = seeds + np.linalg.solve(b.jac[-1], miss[..., None])[..., 0]
    b = integrate_bundle(speed, g, seeds, xi0, t, steps, paraxial=True)
    return seeds, b


def phase_chart(
    t: float,
    xi0,
    x0_grid,
    model,
    g: BoundaryMetric = IDENTITY_METRIC,
    chart_axes=None,
    dt: float | None = None,
    steps: int | None = None,
    refine: bool = True,
    transport: bool = False,
    h: float = 1e-3,
) -> PhaseChart:
    """Phase chart of the fan seeded on ``x0_grid = (axis1, axis2)``.

    Targets on ``chart_axes`` (default: the seed axes) are located on the
    deformed fan by bilinear inversion; with ``refine`` the seeds are then
    polished by Newton shooting so that ``grad phi`` is exactly a ray's
    ``xi(t)``.

    Raises
    ------
    CausticEncountered
        If ``det J`` changes sign along any fan ray.
    InterpolationGap
        If a chart node is not covered by the fan.
    """
    speed = as_speed_model(model)
    xi0 = np.asarray(xi0, dtype=float)
    a1, a2 = (np.asarray(a, dtype=float) for a in x0_grid)
    chart_axes = (a1, a2) if chart_axes is None else tuple(np.asarray(a, dtype=float) for a in chart_axes)
    if steps is None:
        steps = _steps_for(t, dt if dt is not None else _default_dt(t))
    S = np.stack(np.meshgrid(a1, a2, indexing="ij"), -1)
    fan = integrate_bundle(speed, g, S.reshape(-1, 2), xi0, t, steps, paraxial=True)
    if np.any(fan.det_jac <= 0):
        raise CausticEncountered("fan crosses a caustic before the chart time")
    C = np.stack(np.meshgrid(*chart_axes, indexing="ij"), -1)
    targets = C.reshape(-1, 2)
    X = fan.x[-1].reshape(len(a1), len(a2), 2)
    seeds, ok = _bilinear_inverse(X, (a1, a2), targets)
    if not np.all(ok):
        raise InterpolationGap(f"{int((~ok).sum())} chart nodes lie outside the traced fan")
    if refine:
        seeds, b = shoot(speed, g, targets, xi0, t, seeds, steps)
        if np.any(b.det_jac <= 0):
            raise CausticEncountered("shooting ray crosses a caustic")
        xi_end, det, hess = b.xi[-1], b.det_jac[-1], b.hess[-1]
        la = bundle_log_amp(speed, g, b, h) if transport else None
    else:
        # bilinear interpolation of fan endpoint data
        def interp(v):
            r = RegularGridInterpolator((a1, a2), v.reshape(len(a1), len(a2), -1))
            return r(seeds)

        xi_end = interp(fan.xi[-1])
        det = interp(fan.det_jac[-1][:, None])[:, 0]
        hess = interp(fan.hess[-1].reshape(-1, 4)).reshape(-1, 2, 2)
        la = None
    phi = seeds @ xi0
    shape = C.shape[:-1]
    return PhaseChart(
        float(t),
        xi0,
        chart_axes,
        phi.reshape(shape),
        xi_end.reshape(shape + (2,)),
        seeds.reshape(shape + (2,)),
        det.reshape(shape),
        (np.abs(det) < CAUSTIC_DET).reshape(shape),
        hess.reshape(shape + (2, 2)),
        None if la is None else la.reshape(shape),
    )


def eikonal_residual(
    t: float, xi0, x0_grid, model, g: BoundaryMetric = IDENTITY_METRIC, delta: float = 1e-4, chart_axes=None,
    dt: float | None = None,
) -> float:
    """Max of ``|phi_t - c |grad phi|_g|`` relative to ``c |xi0|``, with phi_t from charts at t +- delta."""
    speed = as_speed_model(model)
    steps = _steps_for(t, dt if dt is not None else _default_dt(t))
    ch0 = phase_chart(t, xi0, x0_grid, speed, g, chart_axes, steps=steps)
    chp = phase_chart(t + delta, xi0, x0_grid, speed, g, chart_axes, steps=steps)
    chm = phase_chart(t - delta, xi0, x0_grid, speed, g, chart_axes, steps=steps)
    phi_t = (chp.phi - chm.phi) / (2.0 * delta)
    lam = hamiltonian_jet(speed, g, ch0.points, ch0.grad, order=1).lam
    ref = hamiltonian_jet(speed, g, ch0.x0, np.broadcast_to(np.asarray(xi0, float), ch0.x0.shape), order=1).lam
    return float(np.max(np.abs(phi_t - lam) / ref))
