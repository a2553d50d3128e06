"""Multiprecision roots of integer polynomials by Aberth-Ehrlich iteration.

The iteration runs in gmpy2 ``mpc`` arithmetic at a fixed binary precision.
Two reductions keep it affordable for the degrees met here (several hundred):

* exact zero roots are split off, and a polynomial containing only even
  powers is iterated in ``w = z**2``, halving the degree;
* the Aberth pair sum ``sum_j 1/(w_k - w_j)`` is formed in complex128.  It
  enters the correction ``N / (1 - N S)`` only at second order once the
  Newton ratio ``N`` is small, so the final accuracy is set by ``N`` alone,
  which is evaluated at full precision.

Updates are synchronous (Jacobi style), which makes runs deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from gmpy2 import mpc, mpz

from .errors import NonConvergence
from .hermite import ExactPolynomial

__all__ = ["RootSet", "find_roots", "root_residuals", "scale_roots", "default_precision", "PRECISION_CAP"]

PRECISION_CAP = 4096
RESIDUAL_THRESHOLD = 1e-20


@dataclass
class RootSet:
    """All roots of a polynomial with a residual certificate.

    Attributes
    ----------
    roots : list of gmpy2.mpc
        Roots with multiplicity, at ``precision_bits``.
    residual_bound : float
        ``max |P(z)| / (|lead| * max(1, |z|)**deg)`` over the roots.
    precision_bits : int
        Working precision of the final, successful attempt.
    iterations : int
        Aberth sweeps used by that attempt.
    """

    roots: list
    residual_bound: float
    precision_bits: int
    iterations: int = 0
    attempts: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.roots)

    def as_complex(self) -> np.ndarray:
        return np.array([complex(z) for z in self.roots], dtype=complex)

    def residuals(self, p: ExactPolynomial) -> list:
        """Per-root normalized residuals at the working precision."""
        with gmpy2.context(gmpy2.get_context(), precision=self.precision_bits):
            return root_residuals(p, self.roots)


def default_precision(degree: int) -> int:
    """Initial working precision, 64 + 8 bits per degree of the iterated polynomial."""
    return 64 + 8 * degree


def _newton_polygon_guesses(q, phase: float = 0.4) -> list:
    """Starting points on circles read off the upper Newton polygon.

    Each edge of the upper convex hull of ``(i, log|q_i|)`` spanning indices
    ``a < b`` carries ``b - a`` points on the circle of radius
    ``(|q_a| / |q_b|)**(1/(b-a))``, at fixed angular offsets.
    """
    d = len(q) - 1
    lg = [math.log(abs(c)) if c else None for c in q]
    hull = []
    for i in range(d + 1):
        if lg[i] is None:
            continue
        while len(hull) >= 2:
            i1, i2 = hull[-2], hull[-1]
            if (lg[i2] - lg[i1]) * (i - i1) <= (lg[i] - lg[i1]) * (i2 - i1):
                hull.pop()
            else:
                break
        hull.append(i)
    out = []
    for a, b in zip(hull[:-1], hull[1:]):
        r = math.exp((lg[a] - lg[b]) / (b - a))
        k = b - a
        for t in range(k):
            ang = 2 * math.pi * t / k + 2 * math.pi * a / d + phase
            out.append(complex(r * math.cos(ang), r * math.sin(ang)))
    return out


def _horner_pair(coeffs, x):
    b = mpc(0)
    dp = mpc(0)
    for c in reversed(coeffs):
        dp = dp * x + b
        b = b * x + c
    return b, dp


def _aberth(q, prec: int, maxit: int):
    d = len(q) - 1
    qm = [mpz(c) for c in q]
    w = [mpc(z) for z in _newton_polygon_guesses(q)]
    wf = np.array([complex(z) for z in w])
    active = np.ones(d, dtype=bool)
    tol = gmpy2.exp2(gmpy2.mpfr(-prec) / 2)  # below the double range for prec > 2100
    for it in range(1, maxit + 1):
        idx = np.nonzero(active)[0]
        diff = wf[idx, None] - wf[None, :]
        rows = np.arange(len(idx))
        diff[rows, idx] = 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / diff
        inv[rows, idx] = 0.0
        S = inv.sum(axis=1)
        corr = []
        for t, k in enumerate(idx):
            val, der = _horner_pair(qm, w[k])
            if der == 0:
                corr.append(mpc(tol, 0))  # nudge off a critical point
                continue
            N = val / der
            corr.append(N / (1 - N * mpc(complex(S[t]))))
        for t, k in enumerate(idx):
            w[k] = w[k] - corr[t]
            wf[k] = complex(w[k])
            if abs(corr[t]) <= tol * max(1, abs(w[k])):
                active[k] = False
        if not active.any():
            return w, it
        if not np.all(np.isfinite(wf)):
            break
    raise NonConvergence(f"Aberth did not converge in {maxit} sweeps at {prec} bits")


def root_residuals(p: ExactPolynomial, roots) -> list:
    """Normalized residuals ``|P(z)| / (|lead| max(1, |z|)**deg)``, one per root.

    Evaluated in the precision of the current gmpy2 context when the roots
    are ``mpc``; values below the double range come back as 0.0.
    """
    deg = p.degree
    lead = abs(mpz(p.lead))
    coeffs = [mpz(c) for c in p.coeffs]
    out = []
    for z in roots:
        v = mpc(0)
        for c in reversed(coeffs):
            v = v * z + c
        out.append(float(abs(v) / (lead * max(1, abs(z)) ** deg)))
    return out


def _residual(p: ExactPolynomial, roots) -> float:
    return max(root_residuals(p, roots), default=0.0)


def find_roots(
    p: ExactPolynomial,
    precision_bits: int | None = None,
    residual_threshold: float = RESIDUAL_THRESHOLD,
    max_precision: int | None = None,
    maxit: int | None = None,
) -> RootSet:
    """All complex roots of an integer polynomial, with residual certificate.

    Parameters
    ----------
    p : ExactPolynomial
        Degree at least 1.
    precision_bits : int, optional
        Initial binary precision, at least 64.  Defaults to
        ``64 + 8 * d`` with ``d`` the degree actually iterated on.
    residual_threshold : float
        Acceptance gate for the normalized residual.
    max_precision : int, optional
        Largest precision tried when doubling after a failure.  Defaults to
        the larger of 4096 and the initial precision.
    maxit : int, optional
        Sweep cap per attempt.

    Raises
    ------
    NonConvergence
        If no attempt up to ``max_precision`` converges and certifies.

    Examples
    --------
    >>> from ghp.hermite import ExactPolynomial
    >>> rs = find_roots(ExactPolynomial((-2, 0, 1)), 128)
    >>> sorted(round(float(z.real), 12) for z in rs.as_complex())
    [-1.414213562373, 1.414213562373]
    """
    if p.degree < 1:
        raise ValueError("degree must be at least 1")
    if precision_bits is not None and precision_bits < 64:
        raise ValueError("precision_bits must be at least 64")

    coeffs = list(p.coeffs)
    nzero = next(i for i, c in enumerate(coeffs) if c)
    core = coeffs[nzero:]
    even = all(c == 0 for c in core[1::2])
    q = core[0::2] if even else core
    dq = len(q) - 1

    prec = precision_bits or default_precision(dq)
    cap = max(PRECISION_CAP, prec) if max_precision is None else max(max_precision, prec)
    maxit = maxit or (200 + dq // 2)
    attempts = []
    while True:
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            try:
                if dq == 0:
                    w, its = [], 0
                else:
                    w, its = _aberth(q, prec, maxit)
                if even:
                    z = []
                    for x in w:
                        s = gmpy2.sqrt(x)
                        z.extend((s, -s))
                else:
                    z = list(w)
                z.extend(mpc(0) for _ in range(nzero))
                res = _residual(p, z)
                attempts.append((prec, its, res))
                if res < residual_threshold:
                    return RootSet(z, res, prec, its, attempts)
            except NonConvergence:
                attempts.append((prec, maxit, math.inf))
        if prec >= cap:
            raise NonConvergence(
                f"no certified root set up to {cap} bits; attempts (bits, sweeps, residual): {attempts}"
            )
        prec = min(2 * prec, cap)


def scale_roots(rs, m: int, n: int) -> np.ndarray:
    """Map roots a of H_{m,n} to alpha = a / sqrt(2m + n)."""
    a = rs.as_complex() if isinstance(rs, RootSet) else np.asarray(rs, dtype=complex)
    return a / math.sqrt(2 * m + n)
