"""Complete elliptic integrals for complex parameter via Carlson's forms.

All routines are vectorized over numpy arrays and evaluate in
``np.clongdouble`` (80-bit extended on x86), so that complete integrals come
out accurate to roughly 1e-17 relative before rounding to complex128.

Conventions follow the parameter form: ``K(m) = RF(0, 1-m, 1)`` with
``m = k**2``, and ``Pi(n, m)`` is the integral of
``1 / ((1 - n sin^2) sqrt(1 - m sin^2))``.  Principal branches throughout,
which coincide with ``mpmath.ellipk``, ``mpmath.ellipe`` and
``mpmath.ellippi``.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

__all__ = [
    "carlson_rf",
    "carlson_rd",
    "carlson_rj",
    "carlson_rc",
    "complete_K",
    "complete_E",
    "complete_Pi",
    "pi_branch_corrected",
]

_CT = np.clongdouble
_EPS = float(np.finfo(np.longdouble).eps)
_MAXITER = 60


def _as(a):
    return np.asarray(a, dtype=_CT)


def _out(r, scalar):
    return complex(r) if scalar else r


def _is_scalar(*args):
    return all(np.ndim(a) == 0 for a in args)


def carlson_rf(x, y, z):
    """Carlson's symmetric integral R_F(x, y, z) by duplication.

    Parameters
    ----------
    x, y, z : complex or array_like
        Arguments in the plane cut along the negative real axis, at most one
        of them zero.

    Returns
    -------
    complex or ndarray of clongdouble

    Raises
    ------
    DomainError
        If two arguments vanish.

    Examples
    --------
    >>> abs(carlson_rf(0, 1, 1) - np.pi / 2) < 1e-16
    True
    """
    scalar = _is_scalar(x, y, z)
    x, y, z = np.broadcast_arrays(_as(x), _as(y), _as(z))
    x, y, z = x.copy(), y.copy(), z.copy()
    zeros = (x == 0).astype(int) + (y == 0) + (z == 0)
    if np.any(zeros >= 2):
        raise DomainError("carlson_rf: two arguments are zero")
    A0 = (x + y + z) / 3
    Q = (3 * _EPS) ** (-1.0 / 6.0) * np.maximum.reduce(
        [np.abs(A0 - x), np.abs(A0 - y), np.abs(A0 - z)]
    )
    A = A0.copy()
    x0, y0 = x.copy(), y.copy()
    f = 1.0
    for _ in range(_MAXITER):
        if np.all(f * Q < np.abs(A)):
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * (sy + sz) + sy * sz
        x, y, z = (x + lam) / 4, (y + lam) / 4, (z + lam) / 4
        A = (A + lam) / 4
        f /= 4
    X = (A0 - x0) * f / A
    Y = (A0 - y0) * f / A
    Z = -X - Y
    E2 = X * Y - Z * Z
    E3 = X * Y * Z
    r = (1 - E2 / 10 + E3 / 14 + E2 * E2 / 24 - 3 * E2 * E3 / 44) / np.sqrt(A)
    return _out(r, scalar)


def carlson_rc(x, y):
    """Degenerate integral R_C(x, y) = R_F(x, y, y), closed form."""
    scalar = _is_scalar(x, y)
    x, y = np.broadcast_arrays(_as(x), _as(y))
    r = _rc(x, y)
    return _out(r, scalar)


def _rc(x, y):
    # R_C(x, y) = atan(sqrt((y - x) / x)) / sqrt(y - x), series near y = x
    e = (y - x) / x
    small = np.abs(e) < 1e-4
    es = np.where(small, 1, e)
    s = np.sqrt(es)
    core = np.where(
        small,
        1 - e / 3 + e * e / 5 - e ** 3 / 7 + e ** 4 / 9,
        np.arctan(s) / s,
    )
    return core / np.sqrt(x)


def carlson_rj(x, y, z, p):
    """Carlson's R_J(x, y, z, p) by duplication.

    Parameters
    ----------
    x, y, z : complex or array_like
        At most one zero; off the negative real axis.
    p : complex or array_like
        Nonzero.

    Notes
    -----
    For general complex arguments the duplication sum of R_C terms can pick
    a non-principal branch.  The arguments used for complete integrals,
    ``(0, 1-m, 1, 1-n)``, are checked against ``mpmath.elliprj`` in the
    test suite over the parameter ranges the action integrals visit.
    """
    scalar = _is_scalar(x, y, z, p)
    x, y, z, p = (a.copy() for a in np.broadcast_arrays(_as(x), _as(y), _as(z), _as(p)))
    if np.any(p == 0):
        raise DomainError("carlson_rj: p is zero")
    A0 = (x + y + z + 2 * p) / 5
    delta = (p - x) * (p - y) * (p - z)
    Q = (_EPS / 4) ** (-1.0 / 6.0) * np.maximum.reduce(
        [np.abs(A0 - x), np.abs(A0 - y), np.abs(A0 - z), np.abs(A0 - p)]
    )
    A = A0.copy()
    x0, y0, z0 = x.copy(), y.copy(), z.copy()
    f = 1.0
    acc = np.zeros_like(A)
    for _ in range(_MAXITER):
        if np.all(f * Q < np.abs(A)):
            break
        sx, sy, sz, sp = np.sqrt(x), np.sqrt(y), np.sqrt(z), np.sqrt(p)
        lam = sx * (sy + sz) + sy * sz
        d = (sp + sx) * (sp + sy) * (sp + sz)
        e = f ** 3 * delta / (d * d)
        acc = acc + f / d * _rc(np.ones_like(e), 1 + e)
        x, y, z, p = (x + lam) / 4, (y + lam) / 4, (z + lam) / 4, (p + lam) / 4
        A = (A + lam) / 4
        f /= 4
    X = (A0 - x0) * f / A
    Y = (A0 - y0) * f / A
    Z = (A0 - z0) * f / A
    P = (-X - Y - Z) / 2
    E2 = X * Y + X * Z + Y * Z - 3 * P * P
    E3 = X * Y * Z + 2 * E2 * P + 4 * P ** 3
    E4 = (2 * X * Y * Z + E2 * P + 3 * P ** 3) * P
    E5 = X * Y * Z * P * P
    series = (
        1
        - 3 * E2 / 14
        + E3 / 6
        + 9 * E2 * E2 / 88
        - 3 * E4 / 22
        - 9 * E2 * E3 / 52
        + 3 * E5 / 26
    )
    r = f * series / (A * np.sqrt(A)) + 6 * acc
    return _out(r, scalar)


def carlson_rd(x, y, z):
    """R_D(x, y, z) = R_J(x, y, z, z)."""
    return carlson_rj(x, y, z, z)


def _check_m(m):
    m = _as(m)
    bad = (m.imag == 0) & (m.real >= 1)
    if np.any(bad):
        raise DomainError("parameter m on the branch cut [1, inf)")
    return m


def complete_K(m):
    """K(m) = R_F(0, 1-m, 1), principal branch.

    Examples
    --------
    >>> round(complete_K(0.5).real, 8)
    1.85407468
    """
    scalar = _is_scalar(m)
    m = _check_m(m)
    r = carlson_rf(np.zeros_like(m), 1 - m, np.ones_like(m))
    return _out(r, scalar)


def complete_E(m):
    """E(m) = R_F(0, 1-m, 1) - (m/3) R_D(0, 1-m, 1), principal branch."""
    scalar = _is_scalar(m)
    m = _check_m(m)
    zero, one = np.zeros_like(m), np.ones_like(m)
    r = carlson_rf(zero, 1 - m, one) - m / 3 * carlson_rd(zero, 1 - m, one)
    return _out(r, scalar)


def _pi_carlson(n, m):
    zero, one = np.zeros_like(m), np.ones_like(m)
    return carlson_rf(zero, 1 - m, one) + n / 3 * carlson_rj(zero, 1 - m, one, 1 - n)


def _near_ray(n):
    # wedge around the cut (1, inf) where R_J would see p = 1 - n near the
    # negative axis
    return (n.real > 1) & (np.abs(n.imag) < 0.5 * (n.real - 1) + 0.25)


def complete_Pi(n, m):
    """Pi(n, m) = R_F(0, 1-m, 1) + (n/3) R_J(0, 1-m, 1, 1-n), principal branch.

    Near the cut ``n in (1, inf)`` the duplication for R_J loses accuracy,
    so there the value is taken from

        Pi(n, m) = K(m) - Pi(m/n, m) + s (i pi / 2) / sqrt((n-1)(1-m/n)),

    with ``s = +1`` above the cut and ``s = -1`` on and below it.  On the
    cut itself this is the limit from below, the same convention as
    ``mpmath.ellippi``.

    Raises
    ------
    DomainError
        For m on the cut, or n = 1 where the integral diverges.
    """
    scalar = _is_scalar(n, m)
    n, m = np.broadcast_arrays(_as(n), _check_m(m))
    if np.any(n == 1):
        raise DomainError("characteristic n = 1")
    ray = _near_ray(n)
    if not np.any(ray):
        return _out(_pi_carlson(n, m), scalar)
    r = np.empty(n.shape, dtype=_CT)
    far = ~ray
    if np.any(far):
        r[far] = _pi_carlson(n[far], m[far])
    nr, mr = n[ray], m[ray]
    sgn = np.where(nr.imag > 0, 1, -1)
    zero, one = np.zeros_like(mr), np.ones_like(mr)
    Km = carlson_rf(zero, 1 - mr, one)
    r[ray] = Km - _pi_carlson(mr / nr, mr) + sgn * 0.5j * np.pi / np.sqrt((nr - 1) * (1 - mr / nr))
    return _out(r, scalar)


def pi_branch_corrected(n2, m):
    """Third-kind integral continued analytically across n2 in (1, inf).

    Returns the principal value when ``Im n2 > 0`` and otherwise adds
    ``i pi / sqrt((n2 - 1)(1 - m / n2))`` (principal square root).  The
    result is analytic in n2 across the real half-line (1, inf), where the
    principal branch has its cut.

    Raises
    ------
    DomainError
        If n2 is 0 or equal to m.
    """
    scalar = _is_scalar(n2, m)
    n2, m = np.broadcast_arrays(_as(n2), _as(m))
    if np.any(n2 == 0) or np.any(n2 == m):
        raise DomainError("pi_branch_corrected: n2 is 0 or equal to m")
    base = _as(complete_Pi(n2, m))
    corr = 1j * np.pi / np.sqrt((n2 - 1) * (1 - m / n2))
    r = np.where(n2.imag > 0, base, base + corr)
    return _out(r, scalar)
