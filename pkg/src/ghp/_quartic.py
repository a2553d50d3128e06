"""Vectorized Ferrari solver for monic quartics in extended precision."""

from __future__ import annotations

import numpy as np

_CT = np.clongdouble


def _cbrt(z):
    return np.where(z == 0, 0, np.exp(np.log(np.where(z == 0, 1, z)) / 3))


def solve_quartic(a, b, c, d, polish: int = 2):
    """All roots of ``x**4 + a x**3 + b x**2 + c x + d``.

    Coefficients broadcast against each other; the result has shape
    ``(..., 4)``.  Ferrari's reduction is followed by ``polish`` Newton
    steps per root on the original quartic, all in clongdouble.
    """
    a, b, c, d = np.broadcast_arrays(*(np.asarray(v, dtype=_CT) for v in (a, b, c, d)))
    # depressed quartic y^4 + p y^2 + q y + r with x = y - a/4
    p = b - 3 * a * a / 8
    q = c - a * b / 2 + a ** 3 / 8
    r = d - a * c / 4 + a * a * b / 16 - 3 * a ** 4 / 256
    # resolvent m^3 + p m^2 + (p^2/4 - r) m - q^2/8, take the largest root
    A = p
    B = (p * p - 4 * r) / 4
    C = -q * q / 8
    P = B - A * A / 3
    R = 2 * A ** 3 / 27 - A * B / 3 + C
    disc = np.sqrt(R * R / 4 + P ** 3 / 27)
    u1 = _cbrt(-R / 2 + disc)
    u2 = _cbrt(-R / 2 - disc)
    u = np.where(np.abs(u1) >= np.abs(u2), u1, u2)
    omega = _CT(-0.5 + 0.5j * np.sqrt(3))
    m = None
    for k in range(3):
        uk = u * omega ** k
        tk = np.where(uk == 0, 0, uk - P / (3 * np.where(uk == 0, 1, uk)))
        mk = tk - A / 3
        m = mk if m is None else np.where(np.abs(mk) > np.abs(m), mk, m)
    s = np.sqrt(2 * m)
    t = q / np.where(s == 0, 1, s)
    r1 = np.sqrt(-(2 * p + 2 * m + 2 * t))
    r2 = np.sqrt(-(2 * p + 2 * m - 2 * t))
    x = np.stack([(s + r1) / 2, (s - r1) / 2, (-s + r2) / 2, (-s - r2) / 2], axis=-1)
    x = x - (a / 4)[..., None]
    coef = [np.ones_like(a), a, b, c, d]
    for _ in range(polish):
        f = np.zeros_like(x)
        df = np.zeros_like(x)
        for cc in coef:
            df = df * x + f
            f = f * x + cc[..., None]
        ok = df != 0
        x = np.where(ok, x - f / np.where(ok, df, 1), x)
    return x
