"""Independent reference computations shared by the tests.

None of these call into the package's dispersion or symbol code: the DN map
is rebuilt from decaying plane-wave modes of the Lame system and the roots
come from generic scalar solvers.
"""

import mpmath as mp
import numpy as np
from scipy.optimize import brentq


def speeds(rho, lam, mu):
    return np.sqrt(mu / rho), np.sqrt((lam + 2 * mu) / rho)


def dn_oracle(rho, lam, mu, tau, xi, side=1):
    """DN matrix ``-side sigma e3`` of the half-space ``side * x3 > 0``.

    Columns are the two shear and the compressional decaying modes of
    ``u = A exp(i k . x)`` with ``k = (xi, i side kappa)``.
    """
    xi = np.asarray(xi, float)
    n = np.linalg.norm(xi)
    cs, cp = speeds(rho, lam, mu)
    ks = np.sqrt(n * n - tau**2 / cs**2)
    kp = np.sqrt(n * n - tau**2 / cp**2)
    k = np.array([xi[0], xi[1], side * 1j * ks])
    kP = np.array([xi[0], xi[1], side * 1j * kp])
    modes = [(k, np.array([-xi[1], xi[0], 0.0])), (k, np.array([xi[0] * k[2], xi[1] * k[2], -n * n])), (kP, kP)]
    D = np.zeros((3, 3), complex)
    T = np.zeros((3, 3), complex)
    for j, (kk, A) in enumerate(modes):
        grad = 1j * np.outer(A, kk)
        sig = lam * np.trace(grad) * np.eye(3) + mu * (grad + grad.T)
        D[:, j] = A
        T[:, j] = -side * sig[:, 2]
    return T @ np.linalg.inv(D)


def rayleigh_secular_mp(s, rho, lam, mu):
    """``4 mu^2 a b - (rho s^2 - 2 mu)^2`` in multiprecision."""
    s, rho, lam, mu = (mp.mpf(v) for v in (s, rho, lam, mu))
    a = mp.sqrt(1 - rho * s**2 / mu)
    b = mp.sqrt(1 - rho * s**2 / (lam + 2 * mu))
    return 4 * mu**2 * a * b - (rho * s**2 - 2 * mu) ** 2


def rayleigh_root_mp(rho, lam, mu, dps=30):
    """Rayleigh speed by bracketed multiprecision root finding."""
    with mp.workdps(dps):
        cs = mp.sqrt(mp.mpf(mu) / rho)
        f = lambda s: rayleigh_secular_mp(s, rho, lam, mu)  # noqa: E731
        return float(mp.findroot(f, (mp.mpf("0.5") * cs, cs * (1 - mp.mpf(10) ** -12)), solver="anderson"))


def rayleigh_root_scan(rho, lam, mu, n=100_000):
    """Dense sign scan followed by bisection in double precision."""
    cs, cp = speeds(rho, lam, mu)
    s = np.linspace(0, cs, n + 1)[1:-1]
    f = 4 * mu**2 * np.sqrt(1 - s**2 / cs**2) * np.sqrt(1 - s**2 / cp**2) - (rho * s**2 - 2 * mu) ** 2
    i = np.nonzero(np.sign(f[:-1]) != np.sign(f[1:]))[0]
    assert len(i) == 1
    lo, hi = s[i[0]], s[i[0] + 1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = 4 * mu**2 * np.sqrt(1 - mid**2 / cs**2) * np.sqrt(1 - mid**2 / cp**2) - (rho * mid**2 - 2 * mu) ** 2
        if np.sign(fm) == np.sign(f[i[0]]):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def interface_det(s, plus, minus, xi=(1.0, 0.0)):
    """Determinant of the summed upper and lower DN maps at slowness s."""
    n = np.linalg.norm(xi)
    L = dn_oracle(*plus, s * n, xi, 1) + dn_oracle(*minus, s * n, xi, -1)
    return float(np.linalg.det(L).real)


def stoneley_root_oracle(plus, minus, n=600):
    """Sign changes of the interface determinant on (0, min c_s)."""
    cmin = min(speeds(*plus)[0], speeds(*minus)[0])
    s = np.linspace(1e-3, cmin * (1 - 1e-6), n)
    v = np.array([interface_det(x, plus, minus) for x in s])
    idx = np.nonzero(np.sign(v[:-1]) != np.sign(v[1:]))[0]
    return [brentq(interface_det, s[i], s[i + 1], args=(plus, minus), xtol=1e-15) for i in idx]


def null_vector(L):
    """Right singular vector of the smallest singular value."""
    _, sv, vh = np.linalg.svd(L)
    return vh[-1].conj(), sv[-1] / sv[0]
