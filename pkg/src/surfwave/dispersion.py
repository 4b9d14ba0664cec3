"""Rayleigh and Stoneley dispersion kernels and characteristic speeds.

All quantities are evaluated at unit covector length, ``|xi'|_g = 1``, so the
slowness ratio ``s = tau / |xi'|_g`` is the only frequency variable.  The
radicals are

    a(s) = sqrt(1 - s^2 / c_s^2),    b(s) = sqrt(1 - s^2 / c_p^2),

so that ``a <= b``.  Differences such as ``1 - a b`` are evaluated in the
rationalized form ``(x + y - x y) / (1 + a b)`` with ``x = s^2 / c_s^2`` and
``y = s^2 / c_p^2``, which keeps full relative accuracy for small s.

The private helpers use only analytic operations so they accept complex
``s``; complex-step differentiation then gives derivatives to round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OutsideEllipticRange, RootCountMismatch
from .materials import MaterialJet, MaterialPair, MaterialPoint

RAYLEIGH_SCAN = 1024
STONELEY_SCAN = 2048
ENDPOINT_EPS = 1e-6
CSTEP = 1e-30


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------


class ArrayMaterial:
    """Array-valued stand-in for :class:`MaterialPoint` in the kernels.

    Parameters
    ----------
    values : ndarray, shape (..., 3)
        Stacked (rho, lam, mu).
    """

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        self.rho = values[..., 0]
        self.lam = values[..., 1]
        self.mu = values[..., 2]
        self.cs = np.sqrt(self.mu / self.rho)
        self.cp = np.sqrt((self.lam + 2.0 * self.mu) / self.rho)


def _radicals(s, m: MaterialPoint):
    """Return ``a, b, 1 - a b, x`` for slowness s (real or complex)."""
    x = s * s / (m.cs * m.cs)
    y = s * s / (m.cp * m.cp)
    a = np.sqrt(1.0 - x)
    b = np.sqrt(1.0 - y)
    one_m_ab = (x + y - x * y) / (1.0 + a * b)
    return a, b, one_m_ab, x


def _check_range(s, m: MaterialPoint, allow_zero: bool = False):
    s = np.asarray(s, dtype=float)
    lo_ok = s >= 0 if allow_zero else s > 0
    if not np.all(lo_ok & (s < m.cs)):
        raise OutsideEllipticRange(f"slowness must lie in {'[' if allow_zero else '('}0, c_s={m.cs:.6g})")
    return s


@dataclass(frozen=True)
class DispersionKernels:
    """Radicals and the Rayleigh combination at one slowness.

    Attributes
    ----------
    s : float
        Slowness ratio tau / |xi'|_g.
    a, b : float
        Normalized radicals alpha/|xi'| and beta/|xi'|.
    theta_bar : float
        ``2 - s^2/c_s^2 - 2ab``.
    alpha, beta : float
        Dimensional radicals at the given covector length.
    """

    s: float
    a: float
    b: float
    theta_bar: float
    alpha: float
    beta: float
    xi_norm: float = 1.0


def kernels(s: float, m: MaterialPoint, xi_norm: float = 1.0) -> DispersionKernels:
    """Evaluate the dispersion radicals at slowness ``s``.

    Raises
    ------
    OutsideEllipticRange
        If ``s <= 0`` or ``s >= c_s``.
    """
    _check_range(s, m)
    a, b, omab, x = _radicals(float(s), m)
    tb = 2.0 * omab - x
    return DispersionKernels(float(s), float(a), float(b), float(tb), float(a * xi_norm), float(b * xi_norm), xi_norm)


def theta_bar(s, m: MaterialPoint):
    a, b, omab, x = _radicals(s, m)
    return 2.0 * omab - x


# --------------------------------------------------------------------------
# Rayleigh function
# --------------------------------------------------------------------------


def _rayleigh(s, m: MaterialPoint):
    # 4 mu^2 a b - (rho s^2 - 2 mu)^2  ==  mu^2 (4 (x - (1 - ab)) - x^2)
    a, b, omab, x = _radicals(s, m)
    return m.mu * m.mu * (4.0 * (x - omab) - x * x)


def rayleigh_residual(s, m: MaterialPoint):
    """Rayleigh function ``R(s) = 4 mu^2 a b - (rho s^2 - 2 mu)^2``.

    Accepts scalars or arrays with ``0 <= s < c_s``.
    """
    s = _check_range(s, m, allow_zero=True)
    r = _rayleigh(s, m)
    return float(r) if np.ndim(r) == 0 else r


def _rayleigh_d1(s, m: MaterialPoint):
    a, b, _, _ = _radicals(s, m)
    da = -s / (m.cs**2 * a)
    db = -s / (m.cp**2 * b)
    return 4.0 * m.mu**2 * (da * b + a * db) - 4.0 * m.rho * s * (m.rho * s * s - 2.0 * m.mu)


def _rayleigh_d2(s, m: MaterialPoint):
    a, b, _, _ = _radicals(s, m)
    cs2, cp2 = m.cs**2, m.cp**2
    da = -s / (cs2 * a)
    db = -s / (cp2 * b)
    d2a = -1.0 / (cs2 * a) - s * s / (cs2 * cs2 * a**3)
    d2b = -1.0 / (cp2 * b) - s * s / (cp2 * cp2 * b**3)
    return 4.0 * m.mu**2 * (d2a * b + 2.0 * da * db + a * d2b) - 8.0 * (m.rho * s) ** 2 - 4.0 * m.rho * (
        m.rho * s * s - 2.0 * m.mu
    )


def rayleigh_derivative(s, m: MaterialPoint, order: int = 1):
    """Analytic first or second derivative of R in s."""
    s = _check_range(s, m)
    r = _rayleigh_d1(s, m) if order == 1 else _rayleigh_d2(s, m)
    return float(r) if np.ndim(r) == 0 else r


@dataclass(frozen=True)
class RayleighRoot:
    """The Rayleigh speed and the slope of R there."""

    c_R: float
    slope: float


def _bisect(fn, lo: float, hi: float, flo: float, tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _sign_changes(v: np.ndarray) -> np.ndarray:
    sg = np.sign(v)
    return np.nonzero(sg[:-1] * sg[1:] < 0)[0]


def rayleigh_speed(m: MaterialPoint) -> RayleighRoot:
    """Locate the unique zero of R on (0, c_s).

    A 1024-sample sign scan brackets the root, bisection narrows the bracket
    to 1e-13 and Newton steps polish the result to round-off.

    Raises
    ------
    RootCountMismatch
        If the scan does not find exactly one sign change.
    """
    eps = ENDPOINT_EPS * m.cs
    grid = np.linspace(eps, m.cs - eps, RAYLEIGH_SCAN)
    vals = _rayleigh(grid, m)
    idx = _sign_changes(vals)
    if len(idx) != 1:
        raise RootCountMismatch(f"Rayleigh scan found {len(idx)} sign changes, expected 1")
    i = int(idx[0])
    lo, hi = float(grid[i]), float(grid[i + 1])
    fn = lambda s: float(_rayleigh(s, m))  # noqa: E731
    c = _bisect(fn, lo, hi, float(vals[i]), 1e-13 * m.cs)
    for _ in range(3):
        step = fn(c) / float(_rayleigh_d1(c, m))
        cn = c - step
        if not (lo <= cn <= hi) or abs(fn(cn)) > abs(fn(c)):
            break
        c = cn
    return RayleighRoot(c, float(_rayleigh_d1(c, m)))


# --------------------------------------------------------------------------
# vectorized Rayleigh speed with parameter derivatives
# --------------------------------------------------------------------------


def _cubic(xi, q):
    return ((xi - 8.0) * xi + (24.0 - 16.0 * q)) * xi - 16.0 * (1.0 - q)


def rayleigh_ratio(q):
    """Rayleigh-to-shear speed ratio as a function of ``q = mu / (lam + 2 mu)``.

    Solves the rationalized secular cubic
    ``G(z, q) = z^3 - 8 z^2 + (24 - 16 q) z - 16 (1 - q)`` for its unique
    root ``z = (c_R/c_s)^2`` in (0, 1); ``G(0) < 0 < G(1) = 1``.
    Valid for ``0 < q < 1/2``, i.e. positive Lame parameters.

    Returns
    -------
    eta, deta, d2eta : ndarray
        ``eta = sqrt(z)`` and its first two derivatives in q.
    """
    q = np.asarray(q, dtype=float)
    # G is increasing and concave on (0, 1) for 0 < q < 1/2 and G(0.7) < 0,
    # so Newton from z = 0.7 increases monotonically to the root.
    z = np.full_like(q, 0.7)
    for _ in range(7):
        z = z - _cubic(z, q) / ((3.0 * z - 16.0) * z + 24.0 - 16.0 * q)
    gz = (3.0 * z - 16.0) * z + 24.0 - 16.0 * q
    gq = 16.0 - 16.0 * z
    dz = -gq / gz
    d2z = -((6.0 * z - 16.0) * dz * dz - 32.0 * dz) / gz
    eta = np.sqrt(z)
    deta = dz / (2.0 * eta)
    d2eta = d2z / (2.0 * eta) - dz * dz / (4.0 * eta**3)
    return eta, deta, d2eta


def rayleigh_speed_params(values: np.ndarray):
    """c_R with gradient and Hessian in (rho, lam, mu).

    Parameters
    ----------
    values : ndarray, shape (..., 3)

    Returns
    -------
    c : ndarray (...,)
    dc : ndarray (..., 3)
    d2c : ndarray (..., 3, 3)
    """
    rho, lam, mu = values[..., 0], values[..., 1], values[..., 2]
    D = lam + 2.0 * mu
    q = mu / D
    cs = np.sqrt(mu / rho)
    zero = np.zeros_like(rho)
    # shear speed
    dcs = np.stack([-cs / (2 * rho), zero, cs / (2 * mu)], axis=-1)
    Hcs = np.zeros(rho.shape + (3, 3))
    Hcs[..., 0, 0] = 3 * cs / (4 * rho**2)
    Hcs[..., 2, 2] = -cs / (4 * mu**2)
    Hcs[..., 0, 2] = Hcs[..., 2, 0] = -cs / (4 * rho * mu)
    # q = mu / (lam + 2 mu)
    dq = np.stack([zero, -mu / D**2, lam / D**2], axis=-1)
    Hq = np.zeros(rho.shape + (3, 3))
    Hq[..., 1, 1] = 2 * mu / D**3
    Hq[..., 1, 2] = Hq[..., 2, 1] = (2 * mu - lam) / D**3
    Hq[..., 2, 2] = -4 * lam / D**3
    eta, de, d2e = rayleigh_ratio(q)
    c = cs * eta
    dc = eta[..., None] * dcs + (cs * de)[..., None] * dq
    outer = dcs[..., :, None] * dq[..., None, :]
    d2c = (
        eta[..., None, None] * Hcs
        + de[..., None, None] * (outer + np.swapaxes(outer, -1, -2))
        + (cs * d2e)[..., None, None] * dq[..., :, None] * dq[..., None, :]
        + (cs * de)[..., None, None] * Hq
    )
    return c, dc, d2c


def rayleigh_speed_jet(jet: MaterialJet):
    """Spatial jet of c_R(x) from a material jet (chain rule).

    Returns ``(c, grad, hess)`` with shapes (...,), (..., 2), (..., 2, 2).
    """
    c, dc, d2c = rayleigh_speed_params(jet.values)
    grad = hess = None
    if jet.grad is not None:
        grad = np.einsum("...p,...pk->...k", dc, jet.grad)
    if jet.hess is not None:
        hess = np.einsum("...pq,...pk,...ql->...kl", d2c, jet.grad, jet.grad)
        hess = hess + np.einsum("...p,...pkl->...kl", dc, jet.hess)
    return c, grad, hess


# --------------------------------------------------------------------------
# Stoneley matrices
# --------------------------------------------------------------------------


def _side(s, m: MaterialPoint):
    a, b, omab, x = _radicals(s, m)
    kappa = m.rho * s * s / omab
    return a, b, omab, kappa


def _stoneley_parts(s, p: MaterialPoint, q: MaterialPoint):
    """Entries of M at unit covector: ``M11, M22, Z`` with ``M21 = i Z``."""
    ap, bp, _, kp = _side(s, p)
    am, bm, _, km = _side(s, q)
    m11 = bp * kp + bm * km
    m22 = ap * kp + am * km
    z = 2.0 * (p.mu - q.mu) - (kp - km)
    return m11, m22, z


def _stoneley_eigs(s, p: MaterialPoint, q: MaterialPoint):
    m11, m22, z = _stoneley_parts(s, p, q)
    d = m11 - m22
    varrho = d * d + 4.0 * z * z
    tr = m11 + m22
    det = m11 * m22 - z * z
    m2 = 0.5 * (tr + np.sqrt(varrho))
    m1 = det / m2
    return m1, m2, varrho, m11, m22, z


def _stoneley_S(s, p: MaterialPoint, q: MaterialPoint):
    ap, bp, op, _ = _side(s, p)
    am, bm, om, _ = _side(s, q)
    dmu = p.mu - q.mu
    s2 = s * s
    return (
        ((p.rho * am + q.rho * ap) * (p.rho * bm + q.rho * bp) - (p.rho - q.rho) ** 2) * s2 * s2
        - 4.0 * dmu * dmu * op * om
        + 4.0 * dmu * (p.rho * om - q.rho * op) * s2
    )


def _n_matrix(s, m: MaterialPoint) -> np.ndarray:
    a, b, _, kappa = _side(s, m)
    zeta = 2.0 * m.mu - kappa
    return np.array([[b * kappa, -1j * zeta], [1j * zeta, a * kappa]])


@dataclass(frozen=True)
class StoneleyMatrices:
    """Interface matrices at unit covector length.

    ``m = n_plus + n_minus.T`` is Hermitian with eigenvalues ``m1 <= m2``.
    """

    n_plus: np.ndarray
    n_minus: np.ndarray
    m: np.ndarray
    m1: float
    m2: float
    varrho: float


def _pair_points(pair, x):
    if isinstance(pair, tuple):
        return pair
    return pair.points(x)


def _check_pair_range(s, p: MaterialPoint, q: MaterialPoint):
    cmin = min(p.cs, q.cs)
    s = np.asarray(s, dtype=float)
    if not np.all((s > 0) & (s < cmin)):
        raise OutsideEllipticRange(f"slowness must lie in (0, min c_s = {cmin:.6g})")
    return s


def stoneley_matrix(s: float, pair: MaterialPair, x=(0.0, 0.0)) -> StoneleyMatrices:
    """Assemble ``N_+, N_-`` and ``M = N_+ + N_-^T`` at slowness s.

    ``pair`` may be a :class:`MaterialPair` (evaluated at ``x``) or a tuple
    of two :class:`MaterialPoint`.
    """
    p, q = _pair_points(pair, x)
    _check_pair_range(s, p, q)
    s = float(s)
    npl = _n_matrix(s, p)
    nmi = _n_matrix(s, q)
    M = npl + nmi.T
    m1, m2, varrho, *_ = _stoneley_eigs(s, p, q)
    return StoneleyMatrices(npl, nmi, M, float(m1), float(m2), float(varrho))


def stoneley_eigenvalues(s, pair, x=(0.0, 0.0)):
    """Vectorized ``(m1, m2)`` over an array of slownesses."""
    p, q = _pair_points(pair, x)
    s = _check_pair_range(s, p, q)
    m1, m2, *_ = _stoneley_eigs(s, p, q)
    return m1, m2


def stoneley_residual(s, pair, x=(0.0, 0.0)):
    """Interface secular function S(s); vectorized over s."""
    p, q = _pair_points(pair, x)
    s = _check_pair_range(s, p, q)
    r = _stoneley_S(s, p, q)
    return float(r) if np.ndim(r) == 0 else r


def stoneley_det_factor(s, pair, x=(0.0, 0.0)):
    """The product ``(1 - a_+ b_+)(1 - a_- b_-)``."""
    p, q = _pair_points(pair, x)
    s = _check_pair_range(s, p, q)
    return _radicals(s, p)[2] * _radicals(s, q)[2]


@dataclass(frozen=True)
class StoneleyRoot:
    """Stoneley speed if one exists."""

    exists: bool
    c_ST: float | None = None
    slope: float | None = None


def _m1_slope(c: float, p: MaterialPoint, q: MaterialPoint) -> float:
    return float(np.imag(_stoneley_eigs(complex(c, CSTEP), p, q)[0]) / CSTEP)


def stoneley_speed(pair, x=(0.0, 0.0)) -> StoneleyRoot:
    """Scan m1 on (eps, min c_s - eps) and bisect a sign change if present.

    Raises
    ------
    RootCountMismatch
        If more than one sign change is found.
    """
    p, q = _pair_points(pair, x)
    cmin = min(p.cs, q.cs)
    eps = ENDPOINT_EPS * cmin
    grid = np.linspace(eps, cmin - eps, STONELEY_SCAN)
    m1 = _stoneley_eigs(grid, p, q)[0]
    idx = _sign_changes(m1)
    if len(idx) > 1:
        raise RootCountMismatch(f"Stoneley scan found {len(idx)} sign changes, expected at most 1")
    if len(idx) == 0:
        return StoneleyRoot(False)
    i = int(idx[0])
    fn = lambda s: float(_stoneley_eigs(s, p, q)[0])  # noqa: E731
    lo, hi = float(grid[i]), float(grid[i + 1])
    c = _bisect(fn, lo, hi, float(m1[i]), 1e-13 * cmin)
    for _ in range(3):
        cn = c - fn(c) / _m1_slope(c, p, q)
        if not (lo <= cn <= hi) or abs(fn(cn)) > abs(fn(c)):
            break
        c = cn
    return StoneleyRoot(True, c, _m1_slope(c, p, q))


def stoneley_speed_field(p_values: np.ndarray, q_values: np.ndarray, iters: int = 64) -> np.ndarray:
    """Vectorized Stoneley speed over arrays of parameter triples.

    Uses bisection on S, whose sign equals the sign of m1 because
    ``det M = m1 m2`` with ``m2 > 0`` and ``det M`` a positive multiple of S.
    Entries without a root are NaN.
    """
    P, Q = ArrayMaterial(p_values), ArrayMaterial(q_values)
    cmin = np.minimum(P.cs, Q.cs)
    lo = ENDPOINT_EPS * cmin
    hi = (1.0 - ENDPOINT_EPS) * cmin
    slo = np.sign(_stoneley_S(lo, P, Q))
    shi = np.sign(_stoneley_S(hi, P, Q))
    ok = slo * shi < 0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        sm = np.sign(_stoneley_S(mid, P, Q))
        same = sm == slo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return np.where(ok, 0.5 * (lo + hi), np.nan)


# --------------------------------------------------------------------------
# definiteness checks behind uniqueness of the Stoneley root
# --------------------------------------------------------------------------


@dataclass
class DefinitenessReport:
    """Pass/fail items of the monotonicity argument for one pair."""

    items: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.items.values())


def small_s_limit(m: MaterialPoint) -> float:
    """``lim_{s->0} rho s^2 / (1 - a b) = 2 mu (2 mu + lam) / (3 mu + lam)``."""
    return 2.0 * m.mu * (2.0 * m.mu + m.lam) / (3.0 * m.mu + m.lam)


def _ntilde_prime(iota, m: MaterialPoint):
    """Determinant and trace of d/d(s^2) N at iota = s^2 (closed forms)."""
    s = np.sqrt(iota)
    a, b, omab, _ = _radicals(s, m)
    det = m.rho**2 / omab**2 / (2.0 * a * b) * (a - b) ** 2
    tr = -m.rho * (a + b) / (2.0 * a * b * omab**2) * ((a - b) ** 2 + (a * b + 1.0) ** 2)
    return det, tr


def definiteness_report(pair, grid, x=(0.0, 0.0)) -> DefinitenessReport:
    """Check the positivity and monotonicity items for a pair on an s-grid."""
    p, q = _pair_points(pair, x)
    rep = DefinitenessReport()
    # (a) small-s limit positive definite
    ok_a = True
    for tag, m in (("plus", p), ("minus", q)):
        c = small_s_limit(m)
        rep.details[f"c_{tag}"] = c
        ok_a &= (4.0 * m.mu / 3.0 < c < 2.0 * m.mu) and 2 * c > 0 and 4 * m.mu * (c - m.mu) > 0
    rep.items["a_limit_positive_definite"] = bool(ok_a)
    grid = np.asarray(list(grid), dtype=float)
    if grid.size:
        _check_pair_range(grid, p, q)
        h = 1e-6 * min(p.cs, q.cs)
        lo = np.maximum(grid - h, 0.5 * grid)
        hi = np.minimum(grid + h, min(p.cs, q.cs) * (1 - 1e-12))
        m1l, m2l = _stoneley_eigs(lo, p, q)[:2]
        m1h, m2h = _stoneley_eigs(hi, p, q)[:2]
        d1 = (m1h - m1l) / (hi - lo)
        d2 = (m2h - m2l) / (hi - lo)
        rep.items["b_m1_decreasing"] = bool(np.all(d1 < 0))
        rep.items["b_m2_decreasing"] = bool(np.all(d2 < 0))
        trs = []
        closed = True
        for m in (p, q):
            a, b, omab, kappa = _side(grid, m)
            trs.append((a + b) * kappa)
            det_n, tr_n = _ntilde_prime(grid**2, m)
            closed &= bool(np.all(det_n > 0) and np.all(tr_n < 0))
        rep.items["c_trace_positive"] = bool(all(np.all(t > 0) for t in trs))
        rep.items["b_closed_forms"] = closed
        rep.details["max_dm1"] = float(d1.max())
        rep.details["max_dm2"] = float(d2.max())
    else:
        rep.items["b_m1_decreasing"] = True
        rep.items["b_m2_decreasing"] = True
        rep.items["c_trace_positive"] = True
        rep.items["b_closed_forms"] = True
    return rep


def rayleigh_poisson_ratio() -> float:
    """c_R / c_s for lam = mu, from the cubic: sqrt(2 - 2/sqrt(3))."""
    return math.sqrt(2.0 - 2.0 / math.sqrt(3.0))
