"""Principal symbols of the Dirichlet-to-Neumann map and their diagonalization.

Symbols are evaluated in the g-orthonormal coframe: a covector xi' at x' is
replaced by ``L(x') xi'`` with ``L = G^{-1/2}``, so Euclidean formulas apply
and ``|L xi'| = |xi'|_g``.  For the identity metric this is the identity.

Notation (dimensional, at covector length n = |xi'|_g)::

    alpha = sqrt(n^2 - tau^2/c_s^2),  beta = sqrt(n^2 - tau^2/c_p^2)
    theta = 2 n^2 - tau^2/c_s^2 - 2 alpha beta
    D     = n^2 - alpha beta

The DN symbol is the Hermitian matrix ``N1 / D``.  It is block-diagonalized
by ``V0`` (columns xi_hat, e3, xi_hat_perp) and fully diagonalized by
``W = V0 V1``.

Every ``*_arrays`` function is vectorized over leading dimensions; the
public point-wise functions wrap them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dispersion as disp
from .dispersion import ArrayMaterial
from .errors import (
    DegenerateEigenvalue,
    NoStoneleyRoot,
    OutsideEllipticInterior,
    OutsideTube,
)
from .materials import (
    IDENTITY_METRIC,
    ELLIPTIC_MARGIN,
    BoundaryMetric,
    EllipticPoint,
    MaterialPoint,
)

E0_SWITCH = 1e-6
E0_TUBE = 0.1
R0_TUBE = 0.05
MIN_GAP = 1e-14


# --------------------------------------------------------------------------
# containers
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Symbol3:
    """A complex 3x3 symbol value at a phase-space point."""

    entries: np.ndarray
    point: EllipticPoint | None = None

    def hermitian_defect(self) -> float:
        return float(np.linalg.norm(self.entries - self.entries.conj().T))


@dataclass(frozen=True)
class DiagonalizationResult:
    """Unitary diagonalizer and eigenvalues.

    Attributes
    ----------
    w : ndarray (3, 3)
        Unitary matrix with ``w* Lambda w = diag(eigenvalues)``.
    k1, k2 : float
        Column normalizations of the 2x2 block eigenvectors.
    eigenvalues : ndarray (3,)
        ``(m1~, m2~, m3~)``.
    e0 : complex or None
        Elliptic factor when the point is within the tube around the
        characteristic variety.
    """

    w: np.ndarray
    k1: float
    k2: float
    eigenvalues: np.ndarray
    e0: complex | None = None
    raw: np.ndarray | None = None


@dataclass(frozen=True)
class LocalSymbols:
    """Vectorized local quantities entering every symbol."""

    rho: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    tau: np.ndarray
    xi: np.ndarray
    n: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    omab: np.ndarray
    theta: np.ndarray
    denom: np.ndarray


def local_arrays(values, tau, xi, check: bool = True) -> LocalSymbols:
    """Radicals for parameters ``values (..., 3)``, ``tau (...)``, ``xi (..., 2)``.

    ``xi`` must already be expressed in the orthonormal coframe.
    """
    mat = ArrayMaterial(values)
    tau = np.asarray(tau, dtype=float)
    xi = np.asarray(xi, dtype=float)
    n = np.hypot(xi[..., 0], xi[..., 1])
    if check:
        ratio = (tau / (mat.cs * n)) ** 2
        if not np.all((tau > 0) & (n > 0) & (ratio <= 1.0 - ELLIPTIC_MARGIN)):
            raise OutsideEllipticInterior("point not strictly inside the elliptic region")
    s = tau / n
    a, b, omab, x = disp._radicals(s, mat)
    if check and not np.all(omab > MIN_GAP):
        raise OutsideEllipticInterior("|xi|^2 - alpha beta is not bounded away from zero")
    n2 = n * n
    return LocalSymbols(
        mat.rho, mat.lam, mat.mu, tau, xi, n, n * a, n * b, omab, n2 * (2.0 * omab - x), n2 * omab
    )


def _perp(xi):
    return np.stack([-xi[..., 1], xi[..., 0]], axis=-1)


def _outer(u, v):
    return u[..., :, None] * v[..., None, :]


# --------------------------------------------------------------------------
# one-sided DN symbol
# --------------------------------------------------------------------------


def _side_matrix(loc: LocalSymbols, sign: float = 1.0) -> np.ndarray:
    """``N1 / D`` with the diagonal-type entries multiplied by ``sign``."""
    lead = loc.tau.shape
    out = np.zeros(lead + (3, 3), dtype=complex)
    xp = _perp(loc.xi)
    rt2 = loc.rho * loc.tau**2
    up = (loc.mu * (loc.alpha - loc.beta))[..., None, None] * _outer(xp, xp)
    up = up + (loc.beta * rt2)[..., None, None] * np.eye(2)
    out[..., :2, :2] = sign * up
    c = (loc.mu * loc.theta)[..., None] * loc.xi
    out[..., :2, 2] = -1j * c
    out[..., 2, :2] = 1j * c
    out[..., 2, 2] = sign * loc.alpha * rt2
    return out / loc.denom[..., None, None]


def dn_arrays(loc: LocalSymbols) -> np.ndarray:
    return _side_matrix(loc, 1.0)


def restriction_arrays(loc: LocalSymbols):
    """Principal symbols of U_out, U_out^{-1} and M_out."""
    x1, x2 = loc.xi[..., 0], loc.xi[..., 1]
    al, be, mu, n = loc.alpha, loc.beta, loc.mu, loc.n
    z = np.zeros_like(x1)
    U = np.stack(
        [
            np.stack([z, -1j * al, x1 + 0j], -1),
            np.stack([1j * al, z, x2 + 0j], -1),
            np.stack([-x2 + 0j, x1 + 0j, 1j * be], -1),
        ],
        -2,
    )
    ab = al * be
    Ui = np.stack(
        [
            np.stack([-x1 * x2 + 0j, x1 * x1 - ab + 0j, -1j * al * x2], -1),
            np.stack([-(x2 * x2 - ab) + 0j, x1 * x2 + 0j, 1j * al * x1], -1),
            np.stack([1j * al * x1, 1j * al * x2, -al * al + 0j], -1),
        ],
        -2,
    )
    Ui = Ui * np.asarray(-1j / (al * loc.denom))[..., None, None]
    Mo = np.stack(
        [
            np.stack([-mu * x1 * x2 + 0j, mu * (x1 * x1 + al * al) + 0j, 2j * mu * be * x1], -1),
            np.stack([-mu * (x2 * x2 + al * al) + 0j, mu * x1 * x2 + 0j, 2j * mu * be * x2], -1),
            np.stack([-2j * mu * al * x2, 2j * mu * al * x1, -2 * mu * n * n + loc.rho * loc.tau**2 + 0j], -1),
        ],
        -2,
    )
    return U, Ui, -1j * Mo


def v0_arrays(xi: np.ndarray) -> np.ndarray:
    n = np.hypot(xi[..., 0], xi[..., 1])
    h = xi / n[..., None]
    V = np.zeros(xi.shape[:-1] + (3, 3))
    V[..., 0, 0] = h[..., 0]
    V[..., 1, 0] = h[..., 1]
    V[..., 2, 1] = 1.0
    V[..., 0, 2] = -h[..., 1]
    V[..., 1, 2] = h[..., 0]
    return V


def diag_arrays(loc: LocalSymbols):
    """Exact diagonalization of the DN symbol.

    Returns
    -------
    W : ndarray (..., 3, 3)
    mt : ndarray (..., 3)
        Eigenvalues ``m_j / D``.
    m : ndarray (..., 3)
        Undivided eigenvalues ``m1, m2, m3``.
    k : ndarray (..., 2)
    """
    rt2 = loc.rho * loc.tau**2
    q = loc.n * loc.mu * loc.theta
    dba = (loc.beta - loc.alpha) * rt2
    r = np.sqrt(dba * dba + 4.0 * q * q)
    if np.any(r <= 1e-10 * (loc.alpha + loc.beta) * rt2):
        raise DegenerateEigenvalue("block eigenvalues m1 and m2 coincide")
    m2 = 0.5 * ((loc.alpha + loc.beta) * rt2 + r)
    # m1 m2 = n^6 (1 - ab) R(s), evaluated without cancellation
    n3 = loc.n**3
    s = loc.tau / loc.n
    Rs = disp._rayleigh(s, ArrayMaterial(np.stack([loc.rho, loc.lam, loc.mu], -1)))
    m1 = n3 * n3 * loc.omab * Rs / m2
    m3 = loc.mu * loc.alpha * loc.denom
    d1 = 0.5 * (dba + r)  # beta rho tau^2 - m1
    d2 = -2.0 * q * q / (dba + r)  # beta rho tau^2 - m2
    k1 = np.sqrt(q * q + d1 * d1)
    k2 = np.sqrt(q * q + d2 * d2)
    V1 = np.zeros(loc.tau.shape + (3, 3), dtype=complex)
    V1[..., 0, 0] = 1j * q / k1
    V1[..., 1, 0] = d1 / k1
    V1[..., 0, 1] = 1j * q / k2
    V1[..., 1, 1] = d2 / k2
    V1[..., 2, 2] = 1.0
    W = v0_arrays(loc.xi) @ V1
    m = np.stack([m1, m2, m3], -1)
    return W, m / loc.denom[..., None], m, np.stack([k1, k2], -1)


def e0_arrays(loc: LocalSymbols, c_R: np.ndarray) -> np.ndarray:
    """Elliptic factor ``m1~ / (i (tau - c_R n))`` with a smooth near-root branch."""
    mat = ArrayMaterial(np.stack([loc.rho, loc.lam, loc.mu], -1))
    s = loc.tau / loc.n
    rt2n = loc.rho * s * s
    a, b = loc.alpha / loc.n, loc.beta / loc.n
    q = loc.mu * loc.theta / (loc.n * loc.n)
    dba = (b - a) * rt2n
    B2 = 0.5 * ((a + b) * rt2n + np.sqrt(dba * dba + 4.0 * q * q))
    ds = s - c_R
    near = np.abs(ds) < E0_SWITCH * c_R
    far_ds = np.where(near, 1.0, ds)
    far = disp._rayleigh(s, mat) / far_ds
    cc = np.where(near, c_R, 0.5 * mat.cs)
    taylor = disp._rayleigh_d1(cc, mat) + 0.5 * disp._rayleigh_d2(cc, mat) * ds
    return np.where(near, taylor, far) / (1j * B2)


# --------------------------------------------------------------------------
# point-wise public API
# --------------------------------------------------------------------------


def _values_at(m, x) -> np.ndarray:
    if isinstance(m, MaterialPoint):
        return np.broadcast_to(m.as_array(), np.shape(x)[:-1] + (3,)).astype(float)
    return m.jet(x, order=0).values


def _frame_xi(g: BoundaryMetric, x, xi) -> np.ndarray:
    if g.is_identity:
        return np.asarray(xi, dtype=float)
    return np.einsum("...ij,...j->...i", g.frame(x), xi)


def _local_at(pt: EllipticPoint, m, g) -> LocalSymbols:
    x = np.asarray(pt.x)
    return local_arrays(_values_at(m, x), np.asarray(pt.tau), _frame_xi(g, x, np.asarray(pt.xi)))


def dn_symbol(pt: EllipticPoint, m, g: BoundaryMetric = IDENTITY_METRIC) -> Symbol3:
    """Principal symbol of the DN map, ``N1 / (|xi'|^2 - alpha beta)``.

    Raises
    ------
    OutsideEllipticInterior
    """
    return Symbol3(dn_arrays(_local_at(pt, m, g)), pt)


def boundary_restriction_symbols(pt: EllipticPoint, m, g: BoundaryMetric = IDENTITY_METRIC):
    """Principal symbols of ``U_out``, ``U_out^{-1}`` and ``M_out``."""
    U, Ui, Mo = restriction_arrays(_local_at(pt, m, g))
    return Symbol3(U, pt), Symbol3(Ui, pt), Symbol3(Mo, pt)


def _c_R(values) -> np.ndarray:
    return disp.rayleigh_speed_params(np.asarray(values, dtype=float))[0]


def e0_rayleigh(pt: EllipticPoint, m, g: BoundaryMetric = IDENTITY_METRIC) -> complex:
    """Elliptic factor ``e0`` with ``m1~ = e0 i (tau - c_R |xi'|_g)``.

    Within ``|s - c_R| < 1e-6 c_R`` the quotient is replaced by its
    second-order Taylor expansion about the root, which is continuous with
    the direct quotient to round-off.
    """
    loc = _local_at(pt, m, g)
    return complex(e0_arrays(loc, _c_R(_values_at(m, np.asarray(pt.x)))))


def diagonalize_dn(pt: EllipticPoint, m, g: BoundaryMetric = IDENTITY_METRIC) -> DiagonalizationResult:
    """Unitary diagonalization ``W = V0 V1`` of the DN symbol.

    Raises
    ------
    OutsideEllipticInterior, DegenerateEigenvalue
    """
    loc = _local_at(pt, m, g)
    W, mt, mraw, k = diag_arrays(loc)
    c = _c_R(_values_at(m, np.asarray(pt.x)))
    s = pt.tau / float(loc.n)
    e0 = complex(e0_arrays(loc, c)) if abs(s - c) <= E0_TUBE * c else None
    n3 = float(loc.n) ** 3
    return DiagonalizationResult(W, float(k[0]) / n3, float(k[1]) / n3, mt, e0, mraw)


# --------------------------------------------------------------------------
# interface (Stoneley) symbols
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class JumpSymbol:
    """Jump ``Lambda_+ - Lambda_-`` and its V0 reduction."""

    symbol: Symbol3
    reduction: np.ndarray


def _pair_values(pair, x):
    if isinstance(pair, tuple):
        return _values_at(pair[0], x), _values_at(pair[1], x)
    return _values_at(pair.plus, x), _values_at(pair.minus, x)


def _pair_locals(pt: EllipticPoint, pair, g):
    x = np.asarray(pt.x)
    xi = _frame_xi(g, x, np.asarray(pt.xi))
    vp, vm = _pair_values(pair, x)
    tau = np.asarray(pt.tau)
    return local_arrays(vp, tau, xi), local_arrays(vm, tau, xi)


def jump_arrays(lp: LocalSymbols, lm: LocalSymbols) -> np.ndarray:
    return _side_matrix(lp, 1.0) - _side_matrix(lm, -1.0)


def dn_jump_symbol(pt: EllipticPoint, pair, g: BoundaryMetric = IDENTITY_METRIC) -> JumpSymbol:
    """Interface jump symbol and its block reduction ``V0* J V0``.

    The reduction is block diagonal: ``|xi'|_g M`` (2x2) and the scalar
    ``mu_+ alpha_+ + mu_- alpha_-``.
    """
    lp, lm = _pair_locals(pt, pair, g)
    J = jump_arrays(lp, lm)
    V0 = v0_arrays(lp.xi)
    red = V0.T @ J @ V0
    return JumpSymbol(Symbol3(J, pt), red)


def stoneley_block_arrays(lp: LocalSymbols, lm: LocalSymbols):
    """Dimensional ``M11, M22, Z`` with ``M21 = i Z`` (all scaled by n)."""
    kp = lp.rho * lp.tau**2 / lp.denom
    km = lm.rho * lm.tau**2 / lm.denom
    m11 = lp.beta * kp + lm.beta * km
    m22 = lp.alpha * kp + lm.alpha * km
    z = lp.n * (2.0 * (lp.mu - lm.mu) - (kp - km))
    return m11, m22, z


def stoneley_diag_arrays(lp: LocalSymbols, lm: LocalSymbols):
    m11, m22, z = stoneley_block_arrays(lp, lm)
    d = m11 - m22  # positive since b > a on both sides
    r = np.sqrt(d * d + 4.0 * z * z)
    if np.any(r <= 1e-10 * (m11 + m22)):
        raise DegenerateEigenvalue("Stoneley block eigenvalues coincide")
    m2 = 0.5 * (m11 + m22 + r)
    m1 = (m11 * m22 - z * z) / m2
    m3 = lp.mu * lp.alpha + lm.mu * lm.alpha
    d1 = 0.5 * (d + r)  # M11 - m1
    d2 = -2.0 * z * z / (d + r)  # M11 - m2
    k1 = np.sqrt(d1 * d1 + z * z)
    k2 = np.sqrt(d2 * d2 + z * z)
    V1 = np.zeros(lp.tau.shape + (3, 3), dtype=complex)
    V1[..., 0, 0] = 1j * z / k1
    V1[..., 1, 0] = d1 / k1
    V1[..., 0, 1] = 1j * z / k2
    V1[..., 1, 1] = d2 / k2
    V1[..., 2, 2] = 1.0
    W = v0_arrays(lp.xi) @ V1
    return W, np.stack([m1, m2, m3], -1), np.stack([k1, k2], -1)


def _stoneley_m1_unit(s, p, q):
    return disp._stoneley_eigs(s, p, q)[0]


def e0_stoneley_value(s: float, c_st: float, p: MaterialPoint, q: MaterialPoint) -> complex:
    """``m1(s) / (i (s - c_ST))`` with the same near-root Taylor branch."""
    ds = s - c_st
    if abs(ds) < E0_SWITCH * c_st:
        d1 = disp._m1_slope(c_st, p, q)
        h = 1e-4 * c_st
        d2 = (disp._m1_slope(c_st + h, p, q) - disp._m1_slope(c_st - h, p, q)) / (2 * h)
        return complex((d1 + 0.5 * d2 * ds) / 1j)
    return complex(float(_stoneley_m1_unit(s, p, q)) / (1j * ds))


def diagonalize_stoneley(pt: EllipticPoint, pair, g: BoundaryMetric = IDENTITY_METRIC, with_e0: bool = False):
    """Unitary diagonalization ``W_s = V0 V1`` of the interface jump symbol.

    Returns
    -------
    DiagonalizationResult
        With ``e0`` filled when ``with_e0`` is true.

    Raises
    ------
    NoStoneleyRoot
        If ``with_e0`` is requested and the pair has no Stoneley speed.
    """
    lp, lm = _pair_locals(pt, pair, g)
    W, m, k = stoneley_diag_arrays(lp, lm)
    e0 = None
    if with_e0:
        e0 = e0_stoneley(pt, pair, g)
    n2 = float(lp.n) ** 2
    return DiagonalizationResult(W, float(k[0]) / n2, float(k[1]) / n2, m, e0, m)


def e0_stoneley(pt: EllipticPoint, pair, g: BoundaryMetric = IDENTITY_METRIC) -> complex:
    """Stoneley elliptic factor ``m1(s) / (i (s - c_ST))``."""
    x = np.asarray(pt.x)
    vp, vm = _pair_values(pair, x)
    p, q = MaterialPoint(*vp), MaterialPoint(*vm)
    root = disp.stoneley_speed((p, q))
    if not root.exists:
        raise NoStoneleyRoot("pair has no Stoneley speed")
    s = pt.tau / float(np.hypot(*_frame_xi(g, x, np.asarray(pt.xi))))
    return e0_stoneley_value(s, root.c_ST, p, q)


# --------------------------------------------------------------------------
# lower-order symbol along the Rayleigh variety
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class R0Result:
    """Leading term of the lower-order transport symbol.

    Attributes
    ----------
    value : complex
    flag : str
        ``"flat_exact"`` when the omitted lower-order DN contribution is known
        to vanish (constant coefficients and metric), ``"truncated"``
        otherwise.
    step_change : float
        Relative change of the Richardson-extrapolated value when the
        difference step is halved.
    """

    value: complex
    flag: str
    step_change: float


def _fields(m, g: BoundaryMetric, x, xi, tau):
    vals = _values_at(m, x)
    xt = _frame_xi(g, x, xi)
    loc = local_arrays(vals, tau, xt, check=False)
    lam = dn_arrays(loc)
    W = diag_arrays(loc)[0]
    e0 = e0_arrays(loc, _c_R(vals))
    return lam, W, e0


def _speed_norm_grad(m, g: BoundaryMetric, x, xi):
    """Gradient in x of ``c_R(x) |xi|_{g(x)}``; shape (..., 2)."""
    if isinstance(m, MaterialPoint):
        jet_v, jet_g = np.broadcast_to(m.as_array(), x.shape[:-1] + (3,)), np.zeros(x.shape[:-1] + (3, 2))
    else:
        jet = m.jet(x, order=1)
        jet_v, jet_g = jet.values, jet.grad
    c, dc, _ = disp.rayleigh_speed_params(jet_v)
    grad_c = np.einsum("...p,...pk->...k", dc, jet_g)
    mj = g.jet(x, order=1)
    N = np.sqrt(np.einsum("...i,...ij,...j->...", xi, mj.a, xi))
    dN = np.einsum("...i,...ijk,...j->...k", xi, mj.da, xi) / (2.0 * N[..., None])
    return grad_c * N[..., None] + c[..., None] * dN, c, N


def _r0_terms(m, g, x, xi, tau, h_xi, h_x):
    """R11 and the e0 correction with central differences at steps h."""
    lam0, W0, e00 = _fields(m, g, x, xi, tau)
    Ws0 = np.conj(np.swapaxes(W0, -1, -2))
    total = np.zeros(tau.shape, dtype=complex)
    dcn, _, _ = _speed_norm_grad(m, g, x, xi)
    for k in range(2):
        e = np.zeros(2)
        e[k] = 1.0
        lp, Wp, ep = _fields(m, g, x, xi + h_xi[..., None] * e, tau)
        lm, Wm, em = _fields(m, g, x, xi - h_xi[..., None] * e, tau)
        two_h = (2.0 * h_xi)[..., None, None]
        dWs_xi = np.conj(np.swapaxes(Wp - Wm, -1, -2)) / two_h
        dlam_xi = (lp - lm) / two_h
        de0_xi = (ep - em) / (2.0 * h_xi)
        xp_, xm_ = x + h_x * e, x - h_x * e
        lxp, Wxp, _ = _fields(m, g, xp_, xi, tau)
        lxm, Wxm, _ = _fields(m, g, xm_, xi, tau)
        dLW_x = (lxp @ Wxp - lxm @ Wxm) / (2.0 * h_x)
        dW_x = (Wxp - Wxm) / (2.0 * h_x)
        # D = -i d
        term = -1j * (dWs_xi @ dLW_x + Ws0 @ dlam_xi @ dW_x)
        total = total + term[..., 0, 0] + 1j * de0_xi * dcn[..., k]
    return total / e00


def r0_arrays(m, g: BoundaryMetric, x, xi, tau=None, h: float = 1e-3):
    """Vectorized r0 at points ``x (..., 2)``, covectors ``xi (..., 2)``.

    ``tau`` defaults to ``c_R(x) |xi|_g`` (the characteristic variety).

    Returns
    -------
    value : ndarray complex
    step_change : ndarray
    """
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if tau is None:
        _, c, N = _speed_norm_grad(m, g, x, xi)
        tau = c * N
    tau = np.asarray(tau, dtype=float)
    scale_x = 1.0
    if not isinstance(m, MaterialPoint):
        scale_x = min(m.min_width, g.min_width)
    h_xi = h * np.hypot(xi[..., 0], xi[..., 1])
    h_x = h * scale_x
    d1 = _r0_terms(m, g, x, xi, tau, h_xi, h_x)
    d2 = _r0_terms(m, g, x, xi, tau, h_xi / 2, h_x / 2)
    d4 = _r0_terms(m, g, x, xi, tau, h_xi / 4, h_x / 4)
    rich_a = (4.0 * d2 - d1) / 3.0
    rich_b = (4.0 * d4 - d2) / 3.0
    scale = np.maximum(np.abs(rich_b), 1e-300)
    change = np.where(rich_b == rich_a, 0.0, np.abs(rich_b - rich_a) / scale)
    return rich_b, change


def r0_leading(pt: EllipticPoint, m, g: BoundaryMetric = IDENTITY_METRIC, h: float = 1e-3) -> R0Result:
    """Leading term of the lower-order symbol r0 near the Rayleigh variety.

    The two first-order composition terms of ``(W* Lambda W)_{11}`` are
    formed with Richardson-extrapolated central differences, and the
    ``-i sum e0^(alpha) p_(alpha)`` correction with ``p = i(tau - c_R|xi|)``
    is added.  The lower-order DN contribution is omitted: it vanishes for
    constant coefficients (flag ``flat_exact``) and is truncated otherwise.

    Raises
    ------
    OutsideTube
        If ``|s - c_R| >= 0.05 c_R``.
    """
    x = np.asarray(pt.x)
    xi = np.asarray(pt.xi)
    c = float(_c_R(_values_at(m, x)))
    s = pt.tau / float(np.hypot(*_frame_xi(g, x, xi)))
    if abs(s - c) >= R0_TUBE * c:
        raise OutsideTube(f"|s - c_R| = {abs(s - c):.3g} outside the tube of half-width {R0_TUBE} c_R")
    _local_at(pt, m, g)  # validates ellipticity
    val, change = r0_arrays(m, g, x, xi, np.asarray(pt.tau), h)
    const = (isinstance(m, MaterialPoint) or m.is_constant) and g.is_constant
    return R0Result(complex(val), "flat_exact" if const else "truncated", float(change))
