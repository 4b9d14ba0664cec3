"""Exact constant-coefficient solutions used as ground truth.

In a homogeneous half-space with the Euclidean boundary metric the DN
symbol is exactly homogeneous of degree one, rays are straight, ``a0 = 1``
and the Rayleigh phase is ``phi = t c_R |xi| + x . xi``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import dispersion as disp
from .materials import EllipticPoint, MaterialPoint
from .symbols import Symbol3, dn_arrays, dn_symbol, local_arrays
from .synthesis import SourceData, WavePacketData, _grid_points, rayleigh_coefficients


@dataclass(frozen=True)
class FlatModel:
    """Homogeneous half-space with the identity boundary metric."""

    material: MaterialPoint

    @cached_property
    def _coef(self):
        return rayleigh_coefficients(self.material.as_array())

    @property
    def c_R(self) -> float:
        return float(self._coef.c)

    @property
    def radicals(self) -> tuple[float, float]:
        """``(a, b)`` at the Rayleigh speed."""
        a, b, _, _ = disp._radicals(self.c_R, self.material)
        return float(a), float(b)

    @property
    def h(self) -> float:
        """``mu theta_bar`` at the Rayleigh speed."""
        return float(self._coef.h)

    @property
    def v(self) -> float:
        """``b rho c_R^2``."""
        return float(self._coef.v)

    @property
    def k1(self) -> float:
        return float(self._coef.k1)

    @property
    def r_prime(self) -> float:
        """``R'(c_R)`` of the normalized Rayleigh function."""
        return float(disp._rayleigh_d1(self.c_R, self.material))

    @property
    def e0(self) -> complex:
        return complex(self._coef.e0)

    def column(self, xi) -> np.ndarray:
        """First diagonalizer column ``(i h xi_hat, v) / k1`` for covectors (..., 2)."""
        xi = np.asarray(xi, dtype=float)
        u = xi / np.hypot(xi[..., 0], xi[..., 1])[..., None]
        return np.concatenate([1j * self.h * u, np.full(u.shape[:-1] + (1,), self.v)], -1) / self.k1

    def decay_rates(self, tau, xi):
        """``(alpha_tilde, beta_tilde) = |xi| (a, b)`` at slowness ``tau / |xi|``."""
        loc = local_arrays(np.broadcast_to(self.material.as_array(), np.shape(tau) + (3,)), tau, xi)
        return loc.alpha, loc.beta


def flat_dn_multiplier(tau: float, xi, m: MaterialPoint) -> Symbol3:
    """DN multiplier of the homogeneous half-space at ``(tau, xi)``.

    Raises
    ------
    OutsideEllipticInterior
    """
    return dn_symbol(EllipticPoint(0.0, (0.0, 0.0), tau, xi), m)


def apply_flat_dn(tau: float, axes, u_hat: np.ndarray, m: MaterialPoint) -> np.ndarray:
    """Multiply spectra ``u_hat[i, j, :]`` by the DN symbol at fixed tau."""
    P = _grid_points(axes)
    vals = np.broadcast_to(m.as_array(), P.shape[:-1] + (3,))
    L = dn_arrays(local_arrays(vals, np.full(P.shape[:-1], float(tau)), P))
    return np.einsum("...ij,...j->...i", L, u_hat)


# --------------------------------------------------------------------------
# spectral solution of the scalar surface equation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FlatH1Solution:
    """Spectrum ``h1_hat(t, xi)`` on a regular covector grid (cell weight included)."""

    t: float
    xi: np.ndarray
    h1_weighted: np.ndarray
    model: FlatModel

    def scalar(self, x_axes) -> np.ndarray:
        X = _grid_points(x_axes)
        return np.exp(1j * X @ self.xi.T) @ self.h1_weighted

    def field(self, x_axes) -> np.ndarray:
        """Boundary displacement: each mode carries the first diagonalizer column."""
        X = _grid_points(x_axes)
        col = self.model.column(self.xi)
        return np.exp(1j * X @ self.xi.T) @ (col * self.h1_weighted[:, None])


def flat_h1_spectrum(
    model: FlatModel, t: float, packet: WavePacketData | None = None, source: SourceData | None = None
) -> FlatH1Solution:
    """``h1_hat(t) = e^{i t c |xi|} h_hat + sum_{s <= t} e^{i (t - s) c |xi|} g_hat(s) ds``.

    The source enters through ``g_hat = e0^{-1} conj(column) . l_hat``.
    """
    c = model.c_R
    parts_xi, parts_w = [], []
    if packet is not None:
        xi, w = packet.support()
        n = np.hypot(xi[:, 0], xi[:, 1])
        parts_xi.append(xi)
        parts_w.append(np.exp(1j * t * c * n) * w)
    if source is not None:
        xi = _grid_points(source.axes).reshape(-1, 2)
        n = np.hypot(xi[:, 0], xi[:, 1])
        col = model.column(xi)
        acc = np.zeros(len(xi), complex)
        for s, ws, lh in source.slices():
            if s > t:
                continue
            g = np.einsum("ki,ki->k", np.conj(col), lh.reshape(-1, 3)) / model.e0
            acc += ws * np.exp(1j * (t - s) * c * n) * g
        parts_xi.append(xi)
        parts_w.append(acc * source.cell)
    if not parts_xi:
        return FlatH1Solution(float(t), np.zeros((0, 2)), np.zeros(0, complex), model)
    return FlatH1Solution(float(t), np.concatenate(parts_xi), np.concatenate(parts_w), model)


# --------------------------------------------------------------------------
# line-source examples
# --------------------------------------------------------------------------


def example1_source(
    p: float,
    A3: complex = 1.0,
    T: float = 10.0,
    ds: float = 0.01,
    xi_max: float = 200.0,
    dxi: float = 0.02,
    taper_order: int = 8,
) -> SourceData:
    """Time-harmonic vertical line load ``l = (0, 0, A3 e^{i p s} delta(x1))`` on ``0 < s < T``.

    ``delta(x1)`` has spectrum ``1 / (2 pi)`` in xi1 and a line measure in
    xi2.  The xi1 grid uses cell midpoints (so xi = 0 is excluded) and a
    smooth taper ``exp(-(xi1 / xi_max)^taper_order)``.
    """
    n = int(round(xi_max / dxi))
    xi1 = (np.arange(-n, n) + 0.5) * dxi
    s = (np.arange(int(round(T / ds))) + 0.5) * ds
    taper = np.exp(-((xi1 / xi_max) ** taper_order))
    spectrum = np.zeros((len(xi1), 1, 3), complex)
    spectrum[:, 0, 2] = A3 * taper / (2.0 * np.pi)
    return SourceData.separable(s, np.exp(1j * p * s), (xi1, np.array([0.0])), spectrum, np.full(len(s), ds))


def example1_closed_form(t, x1, A3: complex, p: float, m: MaterialPoint) -> np.ndarray:
    """Standing-wave closed form of the line-load example, leading term.

    ``f = A3 e^{i p t} / R'(c) (h (e^{i p x1 / c} - e^{-i p x1 / c}), 0,
    -i v (e^{i p x1 / c} + e^{-i p x1 / c}))`` with ``h = mu theta_bar`` and
    ``v = b rho c^2``.
    """
    fm = FlatModel(m)
    c = fm.c_R
    t, x1 = np.broadcast_arrays(np.asarray(t, float), np.asarray(x1, float))
    ep, em = np.exp(1j * p * x1 / c), np.exp(-1j * p * x1 / c)
    pre = A3 * np.exp(1j * p * t) / fm.r_prime
    return np.stack([pre * fm.h * (ep - em), np.zeros_like(pre), -1j * pre * fm.v * (ep + em)], -1)


def example1_outgoing(t, x1, A3: complex, p: float, m: MaterialPoint) -> np.ndarray:
    """Causal steady state of the line-load example, leading term away from x1 = 0.

    ``f = A3 / (c R'(c)) e^{i p (t - |x1| / c)} (sgn(x1) h, 0, i v)``.
    """
    fm = FlatModel(m)
    c = fm.c_R
    t, x1 = np.broadcast_arrays(np.asarray(t, float), np.asarray(x1, float))
    pre = A3 * np.exp(1j * p * (t - np.abs(x1) / c)) / (c * fm.r_prime)
    return np.stack([pre * np.sign(x1) * fm.h, np.zeros_like(pre), 1j * pre * fm.v], -1)


def _delta(y, eps):
    return np.exp(-0.5 * (y / eps) ** 2) / (eps * np.sqrt(2.0 * np.pi))


def _pv(y, eps):
    return y / (y * y + eps * eps)


def example2_closed_form(t, x1, A3: complex, eps: float, m: MaterialPoint) -> np.ndarray:
    """Impulsive line-load example with regularized distributions.

    ``f = (-A3 h I1 / R', 0, i A3 v I2 / R')`` where
    ``I1 = pi (delta(tc + x) - delta(tc - x)) + i (pv(tc + x) - pv(tc - x))`` and
    ``I2 = pi (delta(tc + x) + delta(tc - x)) + i (pv(tc + x) + pv(tc - x))``;
    delta is a Gaussian of width eps and ``pv(y) = y / (y^2 + eps^2)``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    fm = FlatModel(m)
    c = fm.c_R
    t, x1 = np.broadcast_arrays(np.asarray(t, float), np.asarray(x1, float))
    yp, ym = t * c + x1, t * c - x1
    I1 = np.pi * (_delta(yp, eps) - _delta(ym, eps)) + 1j * (_pv(yp, eps) - _pv(ym, eps))
    I2 = np.pi * (_delta(yp, eps) + _delta(ym, eps)) + 1j * (_pv(yp, eps) + _pv(ym, eps))
    R1 = fm.r_prime
    return np.stack([-A3 * fm.h * I1 / R1, np.zeros_like(I1), 1j * A3 * fm.v * I2 / R1], -1)
