"""Elastic media, boundary metrics and phase-space points.

A :class:`MaterialField` is a constant isotropic medium plus a finite sum of
Gaussian bumps in the boundary coordinates x' = (x1, x2).  All spatial
derivatives up to second order are available in closed form, which is what
the ray engine needs.  A :class:`BoundaryMetric` does the same for a
symmetric 2x2 metric tensor.

Array conventions: spatial points have shape ``(..., 2)``.  Derivative
indices always come last, so a parameter gradient has shape ``(..., 3, 2)``
and a Hessian ``(..., 3, 2, 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DegenerateMetric,
    NonPositiveParameter,
    OutsideEllipticInterior,
    OutsideWorkingBox,
)

PARAMS = ("rho", "lam", "mu")
METRIC_ENTRIES = ("g11", "g12", "g22")
METRIC_FLOOR = 1e-8
ELLIPTIC_MARGIN = 1e-10
DEFAULT_BOX = ((-10.0, 10.0), (-10.0, 10.0))


# --------------------------------------------------------------------------
# constant media
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MaterialPoint:
    """Isotropic elastic constants at a point.

    Parameters
    ----------
    rho : float
        Mass density.
    lam : float
        First Lame parameter.
    mu : float
        Shear modulus.
    """

    rho: float
    lam: float
    mu: float

    def __post_init__(self):
        for name in PARAMS:
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise NonPositiveParameter(f"{name} must be finite and > 0, got {v!r}")
            object.__setattr__(self, name, float(v))

    @property
    def cs(self) -> float:
        """Shear speed sqrt(mu / rho)."""
        return math.sqrt(self.mu / self.rho)

    @property
    def cp(self) -> float:
        """Compressional speed sqrt((lam + 2 mu) / rho)."""
        return math.sqrt((self.lam + 2.0 * self.mu) / self.rho)

    def as_array(self) -> np.ndarray:
        return np.array([self.rho, self.lam, self.mu])

    def scaled(self, k: float) -> "MaterialPoint":
        return MaterialPoint(k * self.rho, k * self.lam, k * self.mu)


def elastic_speeds(m: MaterialPoint) -> tuple[float, float]:
    """Return the shear and compressional speeds ``(c_s, c_p)``."""
    return m.cs, m.cp


# --------------------------------------------------------------------------
# Gaussian bumps
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Bump:
    """Gaussian perturbation ``A exp(-|x - c|^2 / (2 w^2))`` of one quantity.

    ``target`` names a material parameter (rho, lam, mu) or a metric entry
    (g11, g12, g22) depending on where the bump is used.
    """

    target: str
    amplitude: float
    center: tuple[float, float]
    width: float

    def __post_init__(self):
        if not (np.isfinite(self.width) and self.width > 0):
            raise ConfigError(f"bump width must be > 0, got {self.width!r}")
        c = tuple(float(v) for v in self.center)
        if len(c) != 2:
            raise ConfigError("bump center must have two coordinates")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "amplitude", float(self.amplitude))
        object.__setattr__(self, "width", float(self.width))

    def jet(self, x: np.ndarray):
        """Value, gradient and Hessian at points ``x`` of shape (..., 2)."""
        d = x - np.asarray(self.center)
        w2 = self.width**2
        val = self.amplitude * np.exp(-0.5 * np.sum(d * d, axis=-1) / w2)
        grad = -(val / w2)[..., None] * d
        hess = (val / (w2 * w2))[..., None, None] * (d[..., :, None] * d[..., None, :])
        hess = hess - (val / w2)[..., None, None] * np.eye(2)
        return val, grad, hess


def _check_box(box) -> tuple[tuple[float, float], tuple[float, float]]:
    try:
        (a0, a1), (b0, b1) = box
        out = ((float(a0), float(a1)), (float(b0), float(b1)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"box must be [[x1min, x1max], [x2min, x2max]]: {exc}") from None
    if not (out[0][0] < out[0][1] and out[1][0] < out[1][1]):
        raise ConfigError(f"box bounds must be increasing, got {box!r}")
    return out


def _in_box(box, x: np.ndarray) -> np.ndarray:
    (a0, a1), (b0, b1) = box
    return (x[..., 0] >= a0) & (x[..., 0] <= a1) & (x[..., 1] >= b0) & (x[..., 1] <= b1)


def _scan_grid(box, bumps: Sequence[Bump]) -> np.ndarray:
    """Grid over the box with spacing min(width)/4, capped for huge boxes."""
    (a0, a1), (b0, b1) = box
    h = min(b.width for b in bumps) / 4.0
    n1 = min(int(np.ceil((a1 - a0) / h)) + 1, 2001)
    n2 = min(int(np.ceil((b1 - b0) / h)) + 1, 2001)
    g1, g2 = np.meshgrid(np.linspace(a0, a1, n1), np.linspace(b0, b1, n2), indexing="ij")
    pts = np.stack([g1, g2], axis=-1).reshape(-1, 2)
    # bump centres are where extremes sit; include those inside the box
    centres = np.array([b.center for b in bumps])
    centres = centres[_in_box(box, centres)]
    return np.concatenate([pts, centres]) if len(centres) else pts


# --------------------------------------------------------------------------
# variable media
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MaterialJet:
    """Parameters (rho, lam, mu) and their spatial derivatives.

    Attributes
    ----------
    values : ndarray, shape (..., 3)
    grad : ndarray, shape (..., 3, 2) or None
    hess : ndarray, shape (..., 3, 2, 2) or None
    """

    values: np.ndarray
    grad: np.ndarray | None = None
    hess: np.ndarray | None = None

    @property
    def point(self) -> MaterialPoint:
        v = np.asarray(self.values)
        if v.shape != (3,):
            raise ValueError("point() needs a single evaluation point")
        return MaterialPoint(*v)


@dataclass(frozen=True)
class MaterialField:
    """Constant medium plus Gaussian bumps on a working box.

    Positivity of every parameter is certified on construction by scanning
    a grid of spacing ``min(width) / 4``; bump centres are included.
    """

    base: MaterialPoint
    bumps: tuple[Bump, ...] = ()
    box: tuple = DEFAULT_BOX

    def __post_init__(self):
        object.__setattr__(self, "bumps", tuple(self.bumps))
        object.__setattr__(self, "box", _check_box(self.box))
        for b in self.bumps:
            if b.target not in PARAMS:
                raise ConfigError(f"material bump target must be one of {PARAMS}, got {b.target!r}")
        if self.bumps:
            vals = self._values(_scan_grid(self.box, self.bumps))
            if not np.all(vals > 0):
                k = int(np.argmin(vals.min(axis=0)))
                raise NonPositiveParameter(
                    f"{PARAMS[k]} becomes non-positive inside the working box (min {vals[:, k].min():.3g})"
                )
            # shear speed must stay below the compressional speed: automatic
            # once lam > 0 and mu > 0.

    @property
    def is_constant(self) -> bool:
        return all(b.amplitude == 0.0 for b in self.bumps)

    @property
    def min_width(self) -> float:
        ws = [b.width for b in self.bumps if b.amplitude != 0.0]
        return min(ws) if ws else 1.0

    def _values(self, x: np.ndarray) -> np.ndarray:
        out = np.broadcast_to(self.base.as_array(), x.shape[:-1] + (3,)).copy()
        for b in self.bumps:
            out[..., PARAMS.index(b.target)] += b.jet(x)[0]
        return out

    def contains(self, x) -> np.ndarray:
        return _in_box(self.box, np.asarray(x, dtype=float))

    def jet(self, x, order: int = 2, check: bool = True) -> MaterialJet:
        """Vectorized evaluation at points of shape (..., 2)."""
        x = np.asarray(x, dtype=float)
        if check and not np.all(self.contains(x)):
            raise OutsideWorkingBox(f"point outside working box {self.box}")
        lead = x.shape[:-1]
        vals = np.broadcast_to(self.base.as_array(), lead + (3,)).copy()
        grad = np.zeros(lead + (3, 2)) if order >= 1 else None
        hess = np.zeros(lead + (3, 2, 2)) if order >= 2 else None
        for b in self.bumps:
            k = PARAMS.index(b.target)
            v, gr, he = b.jet(x)
            vals[..., k] += v
            if order >= 1:
                grad[..., k, :] += gr
            if order >= 2:
                hess[..., k, :, :] += he
        return MaterialJet(vals, grad, hess)

    def point(self, x) -> MaterialPoint:
        return MaterialPoint(*self.jet(x, order=0).values)


def constant_field(m: MaterialPoint, box=DEFAULT_BOX) -> MaterialField:
    return MaterialField(m, (), box)


def eval_material(f: MaterialField, x, order: int = 0):
    """Evaluate a material field at a single point.

    Parameters
    ----------
    f : MaterialField
    x : array_like, shape (2,)
    order : {0, 1, 2}
        0 returns a :class:`MaterialPoint`; 1 and 2 return a
        :class:`MaterialJet` with gradient (and Hessian).

    Raises
    ------
    OutsideWorkingBox
    """
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    jet = f.jet(np.asarray(x, dtype=float).reshape(2), order=order)
    return jet.point if order == 0 else jet


@dataclass(frozen=True)
class MaterialPair:
    """Two media in contact across the interface x3 = 0."""

    plus: MaterialField
    minus: MaterialField

    def points(self, x=(0.0, 0.0)) -> tuple[MaterialPoint, MaterialPoint]:
        return self.plus.point(x), self.minus.point(x)

    @property
    def is_constant(self) -> bool:
        return self.plus.is_constant and self.minus.is_constant

    @property
    def box(self):
        (a0, a1), (b0, b1) = self.plus.box
        (c0, c1), (d0, d1) = self.minus.box
        return ((max(a0, c0), min(a1, c1)), (max(b0, d0), min(b1, d1)))

    @property
    def min_width(self) -> float:
        return min(self.plus.min_width, self.minus.min_width)


# --------------------------------------------------------------------------
# boundary metric
# --------------------------------------------------------------------------


def _inv2(G: np.ndarray) -> np.ndarray:
    det = G[..., 0, 0] * G[..., 1, 1] - G[..., 0, 1] * G[..., 1, 0]
    out = np.empty_like(G)
    out[..., 0, 0] = G[..., 1, 1]
    out[..., 1, 1] = G[..., 0, 0]
    out[..., 0, 1] = -G[..., 0, 1]
    out[..., 1, 0] = -G[..., 1, 0]
    return out / det[..., None, None]


def _min_eig2(G: np.ndarray) -> np.ndarray:
    tr = G[..., 0, 0] + G[..., 1, 1]
    dif = G[..., 0, 0] - G[..., 1, 1]
    return 0.5 * (tr - np.sqrt(dif * dif + 4.0 * G[..., 0, 1] ** 2))


def inv_sqrt_spd2(A: np.ndarray) -> np.ndarray:
    """Inverse symmetric square root of SPD 2x2 matrices."""
    sdet = np.sqrt(A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] ** 2)
    t = np.sqrt(A[..., 0, 0] + A[..., 1, 1] + 2.0 * sdet)
    root = (A + sdet[..., None, None] * np.eye(2)) / t[..., None, None]
    return _inv2(root)


_ENTRY_INDEX = {"g11": ((0, 0),), "g22": ((1, 1),), "g12": ((0, 1), (1, 0))}


@dataclass(frozen=True)
class MetricJet:
    """Inverse metric ``A = G^{-1}`` with derivatives (index order i, j, k, l)."""

    g: np.ndarray
    a: np.ndarray
    da: np.ndarray | None = None
    d2a: np.ndarray | None = None


@dataclass(frozen=True)
class BoundaryMetric:
    """Riemannian metric on the boundary: constant SPD matrix plus bumps.

    Covector norms use the inverse matrix, |xi|_g^2 = g^{ij} xi_i xi_j.
    """

    base: tuple = ((1.0, 0.0), (0.0, 1.0))
    bumps: tuple[Bump, ...] = ()
    box: tuple = DEFAULT_BOX

    def __post_init__(self):
        b = np.asarray(self.base, dtype=float)
        if b.shape != (2, 2) or not np.all(np.isfinite(b)):
            raise ConfigError("metric base must be a finite 2x2 matrix")
        if b[0, 1] != b[1, 0]:
            raise DegenerateMetric("metric base must be symmetric")
        object.__setattr__(self, "base", tuple(map(tuple, b.tolist())))
        object.__setattr__(self, "bumps", tuple(self.bumps))
        object.__setattr__(self, "box", _check_box(self.box))
        for bp in self.bumps:
            if bp.target not in METRIC_ENTRIES:
                raise ConfigError(f"metric bump entry must be one of {METRIC_ENTRIES}, got {bp.target!r}")
        pts = _scan_grid(self.box, self.bumps) if self.bumps else np.zeros((1, 2))
        if np.min(_min_eig2(self._g(pts))) < METRIC_FLOOR:
            raise DegenerateMetric("metric eigenvalue below floor on the working box")

    @property
    def is_constant(self) -> bool:
        return all(bp.amplitude == 0.0 for bp in self.bumps)

    @property
    def is_identity(self) -> bool:
        return self.is_constant and self.base == ((1.0, 0.0), (0.0, 1.0))

    @property
    def min_width(self) -> float:
        ws = [b.width for b in self.bumps if b.amplitude != 0.0]
        return min(ws) if ws else 1.0

    def _g(self, x: np.ndarray, order: int = 0):
        lead = x.shape[:-1]
        G = np.broadcast_to(np.asarray(self.base), lead + (2, 2)).copy()
        dG = np.zeros(lead + (2, 2, 2)) if order >= 1 else None
        d2G = np.zeros(lead + (2, 2, 2, 2)) if order >= 2 else None
        for bp in self.bumps:
            v, gr, he = bp.jet(x)
            for i, j in _ENTRY_INDEX[bp.target]:
                G[..., i, j] += v
                if order >= 1:
                    dG[..., i, j, :] += gr
                if order >= 2:
                    d2G[..., i, j, :, :] += he
        if order == 0:
            return G
        return G, dG, d2G

    def matrix(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self._g(x)

    def jet(self, x, order: int = 2, check: bool = True) -> MetricJet:
        """Inverse metric and its first/second derivatives at points (..., 2)."""
        x = np.asarray(x, dtype=float)
        if check and not np.all(_in_box(self.box, x)):
            raise OutsideWorkingBox(f"point outside working box {self.box}")
        if self.is_constant:
            G = np.broadcast_to(np.asarray(self.base), x.shape[:-1] + (2, 2))
            A = np.broadcast_to(_inv2(np.asarray(self.base)), G.shape)
            z1 = np.zeros(x.shape[:-1] + (2, 2, 2)) if order >= 1 else None
            z2 = np.zeros(x.shape[:-1] + (2, 2, 2, 2)) if order >= 2 else None
            return MetricJet(G, A, z1, z2)
        G, dG, d2G = self._g(x, order=2)
        if check and np.min(_min_eig2(G)) < METRIC_FLOOR:
            raise DegenerateMetric("metric eigenvalue below floor")
        A = _inv2(G)
        dA = d2A = None
        if order >= 1:
            # dA_k = -A dG_k A
            dA = -np.einsum("...ia,...abk,...bj->...ijk", A, dG, A)
        if order >= 2:
            t1 = -np.einsum("...iak,...abl,...bj->...ijkl", dA, dG, A)
            t2 = -np.einsum("...ia,...abkl,...bj->...ijkl", A, d2G, A)
            t3 = -np.einsum("...ia,...abk,...bjl->...ijkl", A, dG, dA)
            d2A = t1 + t2 + t3
        return MetricJet(G, A, dA, d2A)

    def frame(self, x) -> np.ndarray:
        """Orthonormalizing map L = G^{-1/2} so that |L xi| = |xi|_g."""
        x = np.asarray(x, dtype=float)
        if self.is_identity:
            return np.broadcast_to(np.eye(2), x.shape[:-1] + (2, 2))
        return inv_sqrt_spd2(self.matrix(x))

    def norm(self, x, xi) -> np.ndarray:
        A = self.jet(x, order=0).a
        xi = np.asarray(xi, dtype=float)
        return np.sqrt(np.einsum("...i,...ij,...j->...", xi, A, xi))


def covector_norm(g: BoundaryMetric, x, xi) -> float:
    """Return ``sqrt(g^{ij} xi_i xi_j)`` at the point x.

    Raises
    ------
    DegenerateMetric
        If the metric violates the positive-definiteness floor at x.
    """
    x = np.asarray(x, dtype=float)
    G = g.matrix(x)
    if _min_eig2(G) < METRIC_FLOOR:
        raise DegenerateMetric("metric eigenvalue below floor")
    return float(g.norm(x, xi))


IDENTITY_METRIC = BoundaryMetric()


# --------------------------------------------------------------------------
# phase-space points
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EllipticPoint:
    """Boundary phase-space sample (t, x', tau, xi') with tau > 0, xi' != 0.

    Use :meth:`checked` to also certify that the point sits strictly inside
    the elliptic region of a given medium.
    """

    t: float
    x: tuple[float, float]
    tau: float
    xi: tuple[float, float]

    def __post_init__(self):
        x = tuple(float(v) for v in np.asarray(self.x, dtype=float).reshape(2))
        xi = tuple(float(v) for v in np.asarray(self.xi, dtype=float).reshape(2))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "tau", float(self.tau))
        if not self.tau > 0:
            raise OutsideEllipticInterior(f"tau must be > 0, got {self.tau}")
        if xi == (0.0, 0.0):
            raise OutsideEllipticInterior("xi must be nonzero")

    def xi_norm(self, g: BoundaryMetric = IDENTITY_METRIC) -> float:
        return covector_norm(g, self.x, self.xi)

    def slowness(self, g: BoundaryMetric = IDENTITY_METRIC) -> float:
        """Slowness ratio s = tau / |xi'|_g."""
        return self.tau / self.xi_norm(g)

    def scaled(self, k: float) -> "EllipticPoint":
        return EllipticPoint(self.t, self.x, k * self.tau, (k * self.xi[0], k * self.xi[1]))

    @classmethod
    def checked(cls, x, tau, xi, cs: float, g: BoundaryMetric = IDENTITY_METRIC, t: float = 0.0):
        """Construct and verify tau^2 / (c_s^2 |xi|_g^2) <= 1 - 1e-10."""
        pt = cls(t, x, tau, xi)
        ratio = (pt.slowness(g) / cs) ** 2
        if ratio > 1.0 - ELLIPTIC_MARGIN:
            raise OutsideEllipticInterior(f"tau^2/(c_s^2|xi|^2) = {ratio:.12g} not below 1 - 1e-10")
        return pt


# --------------------------------------------------------------------------
# JSON schema helpers
# --------------------------------------------------------------------------


def _bumps_from(items, allowed, key) -> tuple[Bump, ...]:
    out = []
    for n, item in enumerate(items or ()):
        if not isinstance(item, Mapping):
            raise ConfigError(f"{key}[{n}] must be an object")
        try:
            tgt = item["entry"] if "entry" in item else item["param"]
            out.append(Bump(str(tgt), float(item["amplitude"]), tuple(item["center"]), float(item["width"])))
        except KeyError as exc:
            raise ConfigError(f"{key}[{n}] is missing key {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}[{n}]: {exc}") from None
        if out[-1].target not in allowed:
            raise ConfigError(f"{key}[{n}]: unknown target {out[-1].target!r}")
    return tuple(out)


def material_point_from_dict(d: Mapping, key: str = "material") -> MaterialPoint:
    try:
        return MaterialPoint(float(d["rho"]), float(d["lam"]), float(d["mu"]))
    except KeyError as exc:
        raise ConfigError(f"{key} is missing key {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, NonPositiveParameter):
            raise NonPositiveParameter(f"{key}: {exc}") from None
        raise ConfigError(f"{key}: {exc}") from None


def material_field_from_dict(d: Mapping, box=DEFAULT_BOX, key: str = "material") -> MaterialField:
    """Build a field from ``{"rho", "lam", "mu", "bumps": [...]}``."""
    if not isinstance(d, Mapping):
        raise ConfigError(f"{key} must be an object")
    base = material_point_from_dict(d, key)
    bumps = _bumps_from(d.get("bumps"), PARAMS, f"{key}.bumps")
    return MaterialField(base, bumps, box)


def metric_from_dict(d: Mapping | None, box=DEFAULT_BOX, key: str = "metric") -> BoundaryMetric:
    """Build a metric from ``{"base": [[g11, g12], [g12, g22]], "bumps": [...]}``."""
    if d is None:
        return BoundaryMetric(box=box)
    if not isinstance(d, Mapping):
        raise ConfigError(f"{key} must be an object")
    base = d.get("base", [[1.0, 0.0], [0.0, 1.0]])
    bumps = _bumps_from(d.get("bumps"), METRIC_ENTRIES, f"{key}.bumps")
    return BoundaryMetric(tuple(map(tuple, base)), bumps, box)
