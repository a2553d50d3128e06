"""Predicted root lattice: solve S(alpha, beta) = (pi j / E, pi k / E).

Index sets follow ``I_m = {-m+1, -m+3, ..., m-1}``, restricted by a filling
fraction sigma to ``|j| <= sigma (m - 1)``.  Points are solved by damped
Newton on four real unknowns, continued breadth-first from alpha = beta = 0.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import actions as act
from .elliptic import complete_K
from .errors import LabelAmbiguity, NewtonDiverged, OutsideK, TurningPointCollision

__all__ = [
    "LatticeConfig",
    "LatticeEntry",
    "RootLattice",
    "index_set",
    "real_jacobian",
    "solve_lattice_point",
    "build_lattice",
    "first_order_alpha",
    "first_order_spacing",
    "invert_S_batch",
    "sample_K",
]

log = logging.getLogger(__name__)


def index_set(m: int, sigma: float | None = None) -> list:
    """``I_m``, or ``I_m^sigma`` when sigma is given."""
    full = list(range(-m + 1, m, 2))
    if sigma is None:
        return full
    lim = sigma * (m - 1) + 1e-12
    return [j for j in full if abs(j) <= lim]


@dataclass(frozen=True)
class LatticeConfig:
    """Lattice parameters; E = 2m + n and nu = n / E are derived."""

    m: int
    n: int
    sigma: float = 0.9
    tol: float = 1e-12

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")
        if not 0 < self.sigma < 1:
            raise ValueError("sigma must lie in (0, 1)")

    @property
    def E(self) -> int:
        return 2 * self.m + self.n

    @property
    def nu(self) -> float:
        return self.n / self.E

    def indices(self) -> list:
        return [(j, k) for j in index_set(self.m, self.sigma) for k in index_set(self.n, self.sigma)]

    def target(self, j: int, k: int) -> tuple:
        return (math.pi * j / self.E, math.pi * k / self.E)


@dataclass
class LatticeEntry:
    alpha: complex
    beta: complex
    residual: float
    quartet: np.ndarray = field(repr=False, default=None)


@dataclass
class RootLattice:
    """Solved lattice points keyed by (j, k), with per-point failures."""

    cfg: LatticeConfig
    entries: dict
    failures: dict

    @property
    def completion_ratio(self) -> float:
        tot = len(self.entries) + len(self.failures)
        return len(self.entries) / tot if tot else 1.0

    def alphas(self) -> np.ndarray:
        return np.array([e.alpha for e in self.entries.values()], dtype=complex)

    def items(self):
        return sorted(self.entries.items())

    def closure_error(self) -> float:
        """Largest deviation from the two reflection symmetries."""
        worst = 0.0
        for (j, k), e in self.entries.items():
            o = self.entries.get((-j, -k))
            if o is not None:
                worst = max(worst, abs(o.alpha + e.alpha), abs(o.beta + e.beta))
            c = self.entries.get((j, -k))
            if c is not None:
                worst = max(worst, abs(c.alpha - e.alpha.conjugate()), abs(c.beta - e.beta.conjugate()))
        return worst


def first_order_alpha(nu: float, E: float, j, k):
    """Small-alpha grid: (1+nu)^(-1/2) [K(2nu/(1+nu)) j + i K((1-nu)/(1+nu)) k] / E.

    This is the linearisation (J22 j - J12 k) / (2E) at alpha = beta = 0,
    where J22 carries K(m22) with m22 = 2nu/(1+nu) and J12 carries K(m12)
    with m12 = (1-nu)/(1+nu).  The two parameters coincide at nu = 1/3.
    """
    a = complete_K(2 * nu / (1 + nu)).real
    b = complete_K((1 - nu) / (1 + nu)).real
    return (a * np.asarray(j) + 1j * b * np.asarray(k)) / (E * math.sqrt(1 + nu))


def first_order_spacing(nu: float, E: float) -> tuple:
    """Grid spacings (real, imaginary) of :func:`first_order_alpha` per unit index."""
    return (first_order_alpha(nu, E, 1, 0).real, first_order_alpha(nu, E, 0, 1).imag)


def real_jacobian(J: np.ndarray) -> np.ndarray:
    """4 x 4 real form of the complex 2 x 2 Jacobian.

    Unknowns are ordered (Re alpha, Im alpha, Re beta, Im beta) and
    residuals (Re s1, Im s1, Re s2, Im s2).
    """
    R = np.empty((4, 4))
    for a in range(2):
        for b in range(2):
            z = J[a, b]
            R[2 * a : 2 * a + 2, 2 * b : 2 * b + 2] = [[z.real, -z.imag], [z.imag, z.real]]
    return R


def _residual_vec(cfg, j, k, s1, s2):
    t1, t2 = cfg.target(j, k)
    # S = -i s, so S = t means s = i t
    return np.array([s1.real, s1.imag - t1, s2.real, s2.imag - t2])


def solve_lattice_point(
    cfg: LatticeConfig,
    j: int,
    k: int,
    seed: tuple,
    anchor: act.TurningQuartet | None = None,
    maxit: int = 50,
    return_quartet: bool = False,
):
    """Damped real Newton for S(alpha, beta) = (pi j / E, pi k / E).

    Parameters
    ----------
    seed : (complex, complex)
        Starting (alpha, beta) inside the Newton basin.
    anchor : TurningQuartet, optional
        Labeled quartet at the seed; continued from (0, 0) if omitted.

    Raises
    ------
    NewtonDiverged
        No convergence, or the line search stalls after six halvings.
    OutsideK
        An iterate hits a turning-point collision.

    Examples
    --------
    >>> solve_lattice_point(LatticeConfig(2, 2), 0, 0, (0j, 0j))
    (0j, 0j)
    """
    nu = cfg.nu
    a, b = complex(seed[0]), complex(seed[1])
    try:
        tq = anchor if anchor is not None else act.continue_quartet(nu, 0, 0, a, b)
        tq = act.turning_points(act.ParameterPoint(nu, a, b), tq)
    except TurningPointCollision as exc:
        raise OutsideK(f"seed for ({j},{k}) at a turning-point collision") from exc
    except LabelAmbiguity as exc:
        raise NewtonDiverged(f"seed for ({j},{k}) has ambiguous labels") from exc

    def evaluate(a_, b_, anc):
        q = act.turning_points(act.ParameterPoint(nu, a_, b_), anc)
        s1, s2, J = act.closed_form(q.lambdas, nu)
        return q, complex(s1), complex(s2), np.asarray(J)

    tq, s1, s2, J = evaluate(a, b, tq)
    F = _residual_vec(cfg, j, k, s1, s2)
    res = float(np.abs(F).max())
    for _ in range(maxit):
        if res < cfg.tol:
            break
        d = np.linalg.solve(real_jacobian(J), -F)
        da, db = complex(d[0], d[1]), complex(d[2], d[3])
        for _h in range(7):
            try:
                cand = evaluate(a + da, b + db, tq)
                F2 = _residual_vec(cfg, j, k, cand[1], cand[2])
                if np.abs(F2).max() < res:
                    break
            except TurningPointCollision as exc:
                raise OutsideK(f"Newton iterate for ({j},{k}) left K") from exc
            except LabelAmbiguity:
                pass
            da, db = da / 2, db / 2
        else:
            raise NewtonDiverged(f"line search stalled at ({j},{k})")
        a, b = a + da, b + db
        tq, s1, s2, J = cand
        F = F2
        res = float(np.abs(F).max())
    else:
        if res >= cfg.tol:
            raise NewtonDiverged(f"no convergence for ({j},{k}) in {maxit} steps")
    out = (a, b)
    return (out, tq, res) if return_quartet else out


def _linear_seed(cfg, e: LatticeEntry, dj, dk):
    _, _, J = act.closed_form(e.quartet, cfg.nu)
    ds = 1j * np.pi / cfg.E * np.array([dj, dk])
    da, db = np.linalg.solve(np.asarray(J), ds)
    return e.alpha + da, e.beta + db


def _solve_from(cfg, j, k, parent: LatticeEntry, dj, dk):
    sa, sb = _linear_seed(cfg, parent, dj, dk)
    anc = act.continue_quartet(cfg.nu, parent.alpha, parent.beta, sa, sb, act.TurningQuartet(parent.quartet))
    (a, b), tq, res = solve_lattice_point(cfg, j, k, (sa, sb), anchor=anc, return_quartet=True)
    return LatticeEntry(a, b, res, tq.lambdas)


def build_lattice(cfg: LatticeConfig, order: str = "jk") -> RootLattice:
    """Breadth-first continuation over ``I_m^sigma x I_n^sigma``.

    The root (0, 0) with S = (0, 0) is the virtual starting node.  Each
    point is seeded from an already solved neighbour by the linear step
    ``J^{-1} (i pi / E) (dj, dk)`` and inherits its turning-point labels.
    Failures are recorded per point and do not stop the sweep.

    Parameters
    ----------
    order : {"jk", "kj"}
        Which index is expanded first; results agree to Newton accuracy.
    """
    nu = cfg.nu
    J_idx = index_set(cfg.m, cfg.sigma)
    K_idx = index_set(cfg.n, cfg.sigma)
    wanted = set((j, k) for j in J_idx for k in K_idx)
    root = LatticeEntry(0j, 0j, 0.0, act.base_quartet(nu))
    entries: dict = {}
    failures: dict = {}
    steps = [(2, 0), (-2, 0), (0, 2), (0, -2)] if order == "jk" else [(0, 2), (0, -2), (2, 0), (-2, 0)]

    # nodes closest to the origin start from the virtual root
    jmin = min(abs(j) for j in J_idx) if J_idx else 0
    kmin = min(abs(k) for k in K_idx) if K_idx else 0
    starts = sorted((j, k) for (j, k) in wanted if abs(j) == jmin and abs(k) == kmin)
    queue = deque()
    for j, k in starts:
        try:
            entries[(j, k)] = _solve_from(cfg, j, k, root, j, k)
            queue.append((j, k))
        except (NewtonDiverged, OutsideK, LabelAmbiguity, TurningPointCollision) as exc:
            failures[(j, k)] = str(exc)
    seen = set(entries) | set(failures)
    while queue:
        j0, k0 = queue.popleft()
        parent = entries[(j0, k0)]
        for dj, dk in steps:
            key = (j0 + dj, k0 + dk)
            if key not in wanted or key in seen:
                continue
            seen.add(key)
            try:
                entries[key] = _solve_from(cfg, key[0], key[1], parent, dj, dk)
                queue.append(key)
            except (NewtonDiverged, OutsideK, LabelAmbiguity, TurningPointCollision) as exc:
                failures[key] = str(exc)
                log.info("lattice point %s failed: %s", key, exc)
    for key in wanted - set(entries) - set(failures):
        failures[key] = "unreachable from solved neighbours"
    return RootLattice(cfg, entries, failures)


def invert_S_batch(nu: float, targets, steps: int = 16, tol: float = 1e-12, maxit: int = 30):
    """Solve S(alpha, beta) = target for many real targets at once.

    Each target is reached along the straight segment from S = (0, 0), in
    ``steps`` stages with a few Newton iterations per stage, carrying the
    turning-point labels from the real quartet at the origin.

    Parameters
    ----------
    targets : array_like, shape (n, 2)
        Points of the rectangle Q.

    Returns
    -------
    alpha, beta : ndarray of complex
    L : ndarray, shape (n, 4)
        Labeled quartets.
    ok : ndarray of bool
        Labels stayed unambiguous and the final residual is below ``tol``.
    """
    T = np.atleast_2d(np.asarray(targets, dtype=float))
    n = len(T)
    a = np.zeros(n, dtype=complex)
    b = np.zeros(n, dtype=complex)
    L = np.tile(act.base_quartet(nu), (n, 1))
    ok = np.ones(n, dtype=bool)
    res = np.zeros(n)
    for t in np.linspace(0, 1, steps + 1)[1:]:
        goal = 1j * t * T
        for _ in range(maxit):
            r = act.quartic_roots(a, b, nu)
            lab, good = act.label_roots(r, L)
            ok &= good
            L = np.where(good[:, None], lab, L)
            s1, s2, J = act.closed_form(L, nu)
            F = np.stack([s1 - goal[:, 0], s2 - goal[:, 1]], -1)
            res = np.abs(F).max(axis=1)
            if np.all((res < tol) | ~ok):
                break
            d = np.linalg.solve(J, -F[..., None])[..., 0]
            a = np.where(ok, a + d[:, 0], a)
            b = np.where(ok, b + d[:, 1], b)
    return a, b, L, ok & (res < tol)


def sample_K(nu: float, sigma: float, count: int, rng: np.random.Generator):
    """Random points of K^sigma: uniform targets in sigma Q mapped back by S^{-1}.

    Returns
    -------
    alpha, beta, L, targets
    """
    half = np.array([(1 - nu) * np.pi / 2, nu * np.pi])
    T = (rng.uniform(-1, 1, size=(count, 2)) * sigma) * half
    a, b, L, ok = invert_S_batch(nu, T)
    if not ok.all():
        raise NewtonDiverged(f"{int((~ok).sum())} sample points did not converge")
    return a, b, L, T
