"""Turning points, action integrals and the Boutroux beta-solver.

The spectral curve is ``y**2 = lambda**2 V(lambda)``, where

    lambda**2 V = lambda**4 + 2 alpha lambda**3 + (alpha**2 - 1) lambda**2
                  - beta lambda + nu**2 / 4,

and ``omega = y / lambda dlambda``.  The actions are

    s1 = oint_{gamma1} omega + i pi (1 - nu) / 2,
    s2 = oint_{gamma2} omega + i pi nu,

and ``S = (-i s1, -i s2)``.  Closed forms in complete elliptic integrals are
evaluated vectorized; a contour quadrature gives independent values.

Sign and parameter conventions of the closed forms were fixed against the
quadrature: the elliptic parameter inside F is ``m/(m-1)`` (that is m11 for
s1 and m21 for s2), the prefactor of s1 is ``-2i/sqrt(...)`` and that of s2
is ``+2/sqrt(...)``, and the entry ds2/dalpha carries a plus sign.  With
these the Jacobian determinant is identically ``2 pi i``.
"""

from __future__ import annotations

import itertools
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from ._quartic import solve_quartic
from .elliptic import complete_E, complete_K, complete_Pi, pi_branch_corrected
from .errors import (
    BranchSuspect,
    ContourDegenerate,
    LabelAmbiguity,
    NewtonDiverged,
    TurningPointCollision,
)

__all__ = [
    "ParameterPoint",
    "TurningQuartet",
    "ActionState",
    "base_quartet",
    "quartic_roots",
    "label_roots",
    "turning_points",
    "closed_form",
    "actions",
    "contour_oracle",
    "oracle_actions",
    "solve_beta",
    "discriminant",
    "s_values",
]

log = logging.getLogger(__name__)

COLLISION_TOL = 1e-6  # above the ~1e-8 splitting of a numerically double root
MATCH_RATIO = 3.0
_PERMS = np.array(list(itertools.permutations(range(4))))


@dataclass(frozen=True)
class ParameterPoint:
    """Point (nu, alpha, beta) of the scaled parameter space."""

    nu: float
    alpha: complex
    beta: complex


@dataclass
class TurningQuartet:
    """Labeled turning points lambda_1..lambda_4.

    Labels are inherited by nearest-neighbour matching along a continuation
    path from (0, 0), where ``lambda_1 < lambda_2 < 0 < lambda_3 < lambda_4``.
    """

    lambdas: np.ndarray
    label_provenance: str = "base"

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=complex)

    def alpha(self) -> complex:
        return complex(-self.lambdas.sum() / 2)

    def beta(self, nu: float) -> complex:
        return complex(nu ** 2 / 4 * np.sum(1 / self.lambdas))


@dataclass
class ActionState:
    """Actions and their Jacobian d(s1, s2)/d(alpha, beta)."""

    s1: complex
    s2: complex
    jacobian: np.ndarray
    source: str = "closed"
    extra: dict = field(default_factory=dict)

    @property
    def S(self) -> tuple:
        return (-1j * self.s1, -1j * self.s2)


def base_quartet(nu: float) -> np.ndarray:
    """Real turning points at alpha = beta = 0, in increasing order."""
    r = np.sqrt(1 - nu ** 2)
    l4 = np.sqrt((1 + r) / 2)
    l3 = np.sqrt((1 - r) / 2)
    return np.array([-l4, -l3, l3, l4], dtype=complex)


def discriminant(alpha, beta, nu):
    """Discriminant of the turning-point quartic, as a polynomial in (alpha, beta).

    The term linear in beta is ``4 nu^2 alpha (6 nu^2 + (1 - alpha^2)(10 - alpha^2))``;
    the sign inside the bracket was checked against a symbolic discriminant.
    """
    a, b = alpha, beta
    n2 = nu ** 2
    return (
        -27 * b ** 4
        + 4 * a * (9 - a ** 2) * b ** 3
        + 2 * (3 * n2 * (5 * a ** 2 - 6) + 2 * (a ** 2 - 1) ** 2) * b ** 2
        + 4 * n2 * a * (6 * n2 + (1 - a ** 2) * (10 - a ** 2)) * b
        + n2 * (4 * n2 ** 2 + n2 * (a ** 4 - 20 * a ** 2 - 8) + 4 * (1 - a ** 2) ** 3)
    )


# ---------------------------------------------------------------- quartic

def quartic_roots(alpha, beta, nu):
    """Roots of the turning-point quartic, vectorized, shape ``(..., 4)``.

    Ferrari's formulas in clongdouble followed by Newton polishing; no
    particular order.
    """
    al = np.asarray(alpha, dtype=np.clongdouble)
    be = np.asarray(beta, dtype=np.clongdouble)
    return solve_quartic(2 * al, al * al - 1, -be, nu * nu / 4).astype(complex)


def label_roots(roots, anchor, ratio: float = MATCH_RATIO):
    """Order ``roots`` to match ``anchor`` label by label.

    Each anchor label takes its nearest root; the assignment must be a
    bijection and every nearest distance must beat the second nearest by
    the factor ``ratio``.

    Returns
    -------
    labeled : ndarray, shape (..., 4)
    ok : ndarray of bool, shape (...)
    """
    roots = np.asarray(roots, dtype=complex)
    anchor = np.asarray(anchor, dtype=complex)
    dist = np.abs(anchor[..., :, None] - roots[..., None, :])
    order = np.argsort(dist, axis=-1)
    nearest = order[..., 0]
    d0 = np.take_along_axis(dist, order[..., :1], -1)[..., 0]
    d1 = np.take_along_axis(dist, order[..., 1:2], -1)[..., 0]
    sorted_idx = np.sort(nearest, axis=-1)
    bij = np.all(sorted_idx == np.arange(4), axis=-1)
    margin = np.all(d1 >= ratio * d0, axis=-1)
    labeled = np.take_along_axis(roots, nearest, -1)
    return labeled, bij & margin


def _min_separation(L):
    L = np.asarray(L)
    d = np.abs(L[..., :, None] - L[..., None, :])
    d = np.where(np.eye(4, dtype=bool), np.inf, d)
    return d.min(axis=(-1, -2))


def turning_points(p: ParameterPoint, anchor: TurningQuartet | None = None, ratio: float = MATCH_RATIO) -> TurningQuartet:
    """Labeled zeros of the turning-point quartic at ``p``.

    Parameters
    ----------
    p : ParameterPoint
    anchor : TurningQuartet, optional
        Labeled quartet at a nearby point; defaults to the real quartet at
        (0, 0).

    Raises
    ------
    TurningPointCollision
        Two zeros closer than ``COLLISION_TOL``.
    LabelAmbiguity
        Nearest-neighbour matching is not a clear bijection; the caller
        should subdivide its path.
    """
    r = quartic_roots(p.alpha, p.beta, p.nu)
    if _min_separation(r) < COLLISION_TOL:
        raise TurningPointCollision(f"turning points collide at alpha={p.alpha}, beta={p.beta}")
    anc = base_quartet(p.nu) if anchor is None else anchor.lambdas
    lab, ok = label_roots(r, anc, ratio)
    if not ok:
        raise LabelAmbiguity(f"ambiguous labels at alpha={p.alpha}, beta={p.beta}")
    prov = "base" if anchor is None else anchor.label_provenance + ">"
    return TurningQuartet(lab, prov[-64:])


# ---------------------------------------------------------------- closed forms

def _F(l1, l2, l3, l4, pi2):
    m = (l2 - l1) * (l4 - l3) / ((l3 - l1) * (l4 - l2))
    M = m / (m - 1)
    n1 = -(l4 - l3) / (l3 - l2)
    n2 = -(l4 - l3) * l2 / ((l3 - l2) * l4)
    return (
        -(l4 - l2) * (l3 - l2) * (3 * l1 - l2 + l3 + l4) * complete_K(M) / 4
        + (l4 - l1) * (l3 - l2) * (l1 + l2 + l3 + l4) * complete_E(M) / 4
        + (l4 - l2) * complete_Pi(n1, M)
        + 2 * l1 * l3 * (l4 - l2) * pi2(n2, M)
    )


def closed_form(L, nu):
    """Actions and Jacobian from complete elliptic integrals.

    Parameters
    ----------
    L : array_like, shape (..., 4)
        Labeled turning points.
    nu : float

    Returns
    -------
    s1, s2 : ndarray of complex
    J : ndarray, shape (..., 2, 2)
        ``[[ds1/dalpha, ds1/dbeta], [ds2/dalpha, ds2/dbeta]]``.
    """
    L = np.asarray(L, dtype=np.clongdouble)
    l1, l2, l3, l4 = (L[..., i] for i in range(4))
    F1 = _F(l1, l2, l3, l4, complete_Pi)
    F2 = _F(l4, l1, l2, l3, pi_branch_corrected)
    s1 = -2j / np.sqrt((l4 - l1) * (l3 - l2)) * F1 + 0.5j * np.pi * (1 - nu)
    s2 = 2 / np.sqrt((l4 - l3) * (l2 - l1)) * F2 + 1j * np.pi * nu

    m12 = (l2 - l1) * (l4 - l3) / ((l3 - l1) * (l4 - l2))
    m22 = 1 - m12
    m11 = 1 - 1 / m22
    m21 = 1 / m11
    J = np.empty(l1.shape + (2, 2), dtype=complex)
    J[..., 0, 0] = 2j / np.sqrt((l4 - l1) * (l3 - l2)) * (
        (l3 - l2) * (l4 - l1) * complete_E(m11) - (l1 * l2 + l3 * l4) * complete_K(m11)
    )
    J[..., 0, 1] = -2j / np.sqrt((l3 - l1) * (l4 - l2)) * complete_K(m12)
    J[..., 1, 0] = 2 / np.sqrt((l4 - l3) * (l2 - l1)) * (
        (l2 - l1) * (l4 - l3) * complete_E(m21) + (l2 * l3 + l1 * l4) * complete_K(m21)
    )
    J[..., 1, 1] = 2 / np.sqrt((l3 - l1) * (l4 - l2)) * complete_K(m22)
    return s1.astype(complex), s2.astype(complex), J


def s_values(s1, s2):
    """Map actions to S = (-i s1, -i s2)."""
    return -1j * np.asarray(s1), -1j * np.asarray(s2)


# ---------------------------------------------------------------- contour oracle

def _half_root(lam, a, b):
    # (lam - a) sqrt((lam - b)/(lam - a)): branch cut on the segment [a, b]
    return (lam - a) * np.sqrt((lam - b) / (lam - a))


def _y(lam, L):
    return _half_root(lam, L[0], L[1]) * _half_root(lam, L[2], L[3])


def _cquad(fun, a, b):
    # the requested tolerance sits at round-off level, so quadpack may warn
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(fun, a, b, complex_func=True, epsabs=1e-14, epsrel=1e-13, limit=400)
    return complex(val)


def _inside_ellipse(pt, c, u, a, b):
    z = (pt - c) / u
    return (z.real / a) ** 2 + (z.imag / b) ** 2 < 1


def _gamma1(L, g):
    c = (L[2] + L[3]) / 2
    h = (L[3] - L[2]) / 2
    for R in (1.1, 1.05, 1.02, 1.01):
        big = abs(h) * (R + 1 / R) / 2
        small = abs(h) * (R - 1 / R) / 2
        u = h / abs(h)
        others = [L[0], L[1], 0]
        if not any(_inside_ellipse(pt, c, u, big * 1.02, small * 1.02 + 1e-12) for pt in others):
            break
    else:
        raise ContourDegenerate("gamma1 ellipse cannot avoid the other cut or the pole")

    def fun(t):
        w = R * np.exp(1j * t)
        lam = c + h * (w + 1 / w) / 2
        dl = h * (1j * w - 1j / w) / 2
        return g(lam, L) * dl

    return _cquad(fun, 0, 2 * np.pi)


def _gamma2(L, g):
    m12 = (L[0] + L[1]) / 2
    m34 = (L[2] + L[3]) / 2
    c0 = (m12 + m34) / 2
    u = m34 - c0
    a = abs(u)
    u = u / a
    n = 1j * u
    for frac in (0.8, 0.6, 1.0, 0.45, 1.3, 0.3):
        b = frac * a
        ins = [_inside_ellipse(pt, c0, u, a, b) for pt in (L[1], L[2], 0)]
        outs = [_inside_ellipse(pt, c0, u, a, b) for pt in (L[0], L[3])]
        if all(ins) and not any(outs):
            break
    else:
        raise ContourDegenerate("gamma2 ellipse cannot separate the turning points")

    def lam(t):
        return c0 + a * np.cos(t) * u + b * np.sin(t) * n

    def dl(t):
        return -a * np.sin(t) * u + b * np.cos(t) * n

    up = _cquad(lambda t: -g(lam(t), L) * dl(t), 0, np.pi)
    lo = _cquad(lambda t: g(lam(t), L) * dl(t), np.pi, 2 * np.pi)
    return up + lo


def _omega(lam, L):
    return _y(lam, L) / lam


def contour_oracle(p: ParameterPoint, tq: TurningQuartet, cycle: str, integrand=None) -> complex:
    """Period of omega over ``gamma1`` or ``gamma2`` by adaptive quadrature.

    The square root is the product of two factors with cuts on the segments
    [lambda_1, lambda_2] and [lambda_3, lambda_4], normalized so that
    ``y ~ lambda**2`` at infinity; on that sheet ``y(0) = -nu/2``.

    * ``gamma1`` is a counterclockwise Joukowski ellipse with foci
      lambda_3, lambda_4.
    * ``gamma2`` is an ellipse through the midpoints of the two cuts,
      enclosing lambda_2, lambda_3 and 0; its upper half runs on the other
      sheet and its lower half on this one.

    Returned periods satisfy ``s1 = period1 + i pi (1 - nu)/2`` and
    ``s2 = period2 + i pi nu``.

    Parameters
    ----------
    integrand : callable, optional
        Replaces ``y/lambda``; used for the Jacobian.
    """
    L = np.asarray(tq.lambdas, dtype=complex)
    g = integrand or _omega
    if _min_separation(L) < 1e-6:
        raise ContourDegenerate("turning points too close for the contour")
    if cycle == "gamma1":
        return _gamma1(L, g)
    if cycle == "gamma2":
        # the contour passes on the far side of the pole at 0 from the
        # reference cycle; the residue y(0) = -nu/2 accounts for the shift
        return _gamma2(L, g) - 1j * np.pi * p.nu
    raise ValueError("cycle must be 'gamma1' or 'gamma2'")


def oracle_actions(p: ParameterPoint, tq: TurningQuartet) -> ActionState:
    """Actions and Jacobian from contour quadrature only.

    Uses ``ds/dbeta = -1/2 oint dlambda / y`` and
    ``ds/dalpha = oint lambda (lambda + alpha) / y dlambda``.
    """
    nu = p.nu
    L = np.asarray(tq.lambdas, dtype=complex)
    al = -L.sum() / 2
    s1 = contour_oracle(p, tq, "gamma1") + 0.5j * np.pi * (1 - nu)
    s2 = contour_oracle(p, tq, "gamma2") + 1j * np.pi * nu
    gb = lambda lam, L: 1 / _y(lam, L)  # noqa: E731
    ga = lambda lam, L: lam * (lam + al) / _y(lam, L)  # noqa: E731
    J = np.array(
        [
            [_gamma1(L, ga), -0.5 * _gamma1(L, gb)],
            [_gamma2(L, ga), -0.5 * _gamma2(L, gb)],
        ]
    )
    return ActionState(complex(s1), complex(s2), J, source="oracle")


# ---------------------------------------------------------------- actions

def actions(p: ParameterPoint, tq: TurningQuartet, verify: bool = False, tol: float = 1e-7) -> ActionState:
    """Actions s1, s2 and Jacobian from the closed forms.

    Parameters
    ----------
    verify : bool
        Cross-check against :func:`contour_oracle`.  On disagreement beyond
        ``tol`` a warning is logged and the oracle values are returned.
    """
    s1, s2, J = closed_form(tq.lambdas, p.nu)
    st = ActionState(complex(s1), complex(s2), np.asarray(J), source="closed")
    if verify:
        o = oracle_actions(p, tq)
        err = max(abs(st.s1 - o.s1), abs(st.s2 - o.s2), float(np.abs(st.jacobian - o.jacobian).max()))
        if err > tol:
            exc = BranchSuspect(f"closed form off by {err:.3e} at alpha={p.alpha}, beta={p.beta}")
            log.warning("%s; using contour values", exc.detail)
            o.extra["branch_suspect"] = err
            return o
        st.extra["oracle_error"] = err
    return st


# ---------------------------------------------------------------- beta solver

def _beta_step(be, s1, s2, J, max_step):
    d1, d2 = J[0, 1], J[1, 1]
    A = np.array([[d1.real, -d1.imag], [d2.real, -d2.imag]])
    x = np.linalg.solve(A, -np.array([s1.real, s2.real]))
    step = x[0] + 1j * x[1]
    if abs(step) > max_step:
        step *= max_step / abs(step)
    return step


def solve_beta(
    nu: float,
    alpha: complex,
    beta_guess: complex = 0.0,
    anchor: TurningQuartet | None = None,
    tol: float = 1e-12,
    maxit: int = 50,
    return_quartet: bool = False,
):
    """Solve Re s1 = Re s2 = 0 for beta at fixed alpha.

    Newton on (Re beta, Im beta) using the beta column of the Jacobian,
    halving the step (at most six times) whenever the residual
    ``|Re s1| + |Re s2|`` does not decrease.

    Parameters
    ----------
    anchor : TurningQuartet, optional
        Labeled quartet near ``(alpha, beta_guess)``.  When omitted, labels
        are continued from (0, 0) along the straight segment to
        ``(alpha, beta_guess)``.

    Raises
    ------
    NewtonDiverged
        No convergence within ``maxit`` steps.

    Examples
    --------
    >>> solve_beta(1/3, 0.0)
    0j
    """
    if anchor is None:
        if beta_guess == 0 and alpha != 0:
            return _solve_beta_ray(nu, alpha, tol, maxit, return_quartet)
        anchor = continue_quartet(nu, 0.0, 0.0, alpha, beta_guess)
    be = complex(beta_guess)

    def evaluate(b, anc):
        tq = turning_points(ParameterPoint(nu, alpha, b), anc)
        s1, s2, J = closed_form(tq.lambdas, nu)
        return tq, complex(s1), complex(s2), J

    try:
        tq, s1, s2, J = evaluate(be, anchor)
    except (TurningPointCollision, LabelAmbiguity) as exc:
        raise NewtonDiverged(f"bad start at alpha={alpha}: {exc.detail}") from exc
    res = abs(s1.real) + abs(s2.real)
    for _ in range(maxit):
        if res < tol:
            return (be, tq) if return_quartet else be
        step = _beta_step(be, s1, s2, J, max_step=0.5)
        for _half in range(7):
            try:
                cand = evaluate(be + step, tq)
                r2 = abs(cand[1].real) + abs(cand[2].real)
                if r2 < res:
                    break
            except (TurningPointCollision, LabelAmbiguity):
                pass
            step /= 2
        else:
            raise NewtonDiverged(f"line search failed at alpha={alpha}, beta={be}")
        be = be + step
        tq, s1, s2, J = cand
        res = r2
    if res < tol:
        return (be, tq) if return_quartet else be
    raise NewtonDiverged(f"no convergence in {maxit} steps at alpha={alpha}")


def _solve_beta_ray(nu, alpha, tol, maxit, return_quartet, steps: int = 16):
    # march alpha along the ray from 0, reusing each beta and quartet
    be, tq = 0j, TurningQuartet(base_quartet(nu))
    t, dt = 0.0, 1.0 / steps
    while t < 1.0:
        t1 = min(1.0, t + dt)
        try:
            tq1 = continue_quartet(nu, t * alpha, be, t1 * alpha, be, anchor=tq)
            be, tq = solve_beta(nu, t1 * alpha, be, anchor=tq1, tol=tol, maxit=maxit, return_quartet=True)
            t = t1
        except (NewtonDiverged, LabelAmbiguity, TurningPointCollision) as exc:
            dt /= 2
            if dt < 1e-4 / steps:
                raise NewtonDiverged(f"ray continuation stalled at t={t:.4f}: {exc}") from exc
    return (be, tq) if return_quartet else be


def continue_quartet(nu, alpha0, beta0, alpha1, beta1, anchor: TurningQuartet | None = None, max_depth: int = 30) -> TurningQuartet:
    """Carry quartet labels along the straight segment (alpha0,beta0) -> (alpha1,beta1).

    Steps are subdivided adaptively whenever labelling is ambiguous.
    """
    tq = anchor or turning_points(ParameterPoint(nu, alpha0, beta0))
    t, dt = 0.0, 1.0
    a0, b0 = complex(alpha0), complex(beta0)
    da, db = complex(alpha1) - a0, complex(beta1) - b0
    if da == 0 and db == 0:
        return tq
    depth = 0
    while t < 1.0:
        t1 = min(1.0, t + dt)
        try:
            tq = turning_points(ParameterPoint(nu, a0 + t1 * da, b0 + t1 * db), tq)
            t = t1
            dt = min(1.0, dt * 2)
            depth = max(0, depth - 1)
        except LabelAmbiguity:
            dt /= 2
            depth += 1
            if depth > max_depth:
                raise
    return tq


def solve_beta_batch(nu: float, alpha, beta0, anchors, tol: float = 1e-12, maxit: int = 40):
    """Vectorized Newton for Re s1 = Re s2 = 0 from labeled seeds.

    Parameters
    ----------
    alpha, beta0 : ndarray of complex, shape (n,)
    anchors : ndarray, shape (n, 4)
        Labeled quartets near ``(alpha, beta0)``, usually a neighbour's.

    Returns
    -------
    beta : ndarray
    L : ndarray, shape (n, 4)
        Labeled quartets at the solutions.
    ok : ndarray of bool
        Converged with unambiguous labels throughout.
    """
    alpha = np.asarray(alpha, dtype=complex)
    be = np.array(beta0, dtype=complex)
    L = np.array(anchors, dtype=complex)
    ok = np.ones(alpha.shape, dtype=bool)
    done = np.zeros(alpha.shape, dtype=bool)
    for _ in range(maxit):
        r = quartic_roots(alpha, be, nu)
        lab, good = label_roots(r, L)
        ok &= good
        L = np.where(good[:, None], lab, L)
        s1, s2, J = closed_form(L, nu)
        res = np.abs(s1.real) + np.abs(s2.real)
        done = res < tol
        act = ok & ~done
        if not act.any():
            break
        d1, d2 = J[:, 0, 1], J[:, 1, 1]
        A = np.stack([np.stack([d1.real, -d1.imag], -1), np.stack([d2.real, -d2.imag], -1)], -2)
        rhs = -np.stack([s1.real, s2.real], -1)
        det = A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0]
        safe = np.where(np.abs(det) > 0, det, 1.0)
        x0 = (rhs[:, 0] * A[:, 1, 1] - rhs[:, 1] * A[:, 0, 1]) / safe
        x1 = (A[:, 0, 0] * rhs[:, 1] - A[:, 1, 0] * rhs[:, 0]) / safe
        step = x0 + 1j * x1
        big = np.abs(step) > 0.25
        step = np.where(big, step * 0.25 / np.where(big, np.abs(step), 1.0), step)
        be = np.where(act, be + step, be)
    return be, L, ok & done
