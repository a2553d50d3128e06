"""Match predicted lattice points to exact roots and fit the error exponent."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import FitDegenerate, MatchingAmbiguous
from .hermite import hermite_generalized
from .lattice import LatticeConfig, RootLattice, build_lattice
from .roots import find_roots, scale_roots

__all__ = [
    "MatchReport",
    "exact_scaled_roots",
    "match_roots",
    "fit_exponent",
    "scaling_report",
    "ScalingReport",
    "BULK_MARGIN",
]

log = logging.getLogger(__name__)

BULK_MARGIN = 0.05
AMBIGUITY_LIMIT = 0.01


@dataclass
class MatchReport:
    """Outcome of matching one lattice against the exact roots.

    Distances are in the scaled variable alpha; the ``*_unscaled`` fields
    are the same in ``a = E**0.5 * alpha``.
    """

    pairs: list
    unmatched_pred: int
    unmatched_true: int
    max_bulk_error: float
    mean_bulk_error: float
    E: int
    n_pred: int = 0
    n_bulk: int = 0
    disagreement: float = 0.0

    @property
    def match_ratio(self) -> float:
        return (self.n_pred - self.unmatched_pred) / self.n_pred if self.n_pred else 1.0

    @property
    def max_bulk_error_unscaled(self) -> float:
        return self.max_bulk_error * math.sqrt(self.E)

    @property
    def mean_bulk_error_unscaled(self) -> float:
        return self.mean_bulk_error * math.sqrt(self.E)

    def summary(self) -> dict:
        return {
            "E": self.E,
            "n_pred": self.n_pred,
            "n_bulk": self.n_bulk,
            "matched": self.n_pred - self.unmatched_pred,
            "unmatched_pred": self.unmatched_pred,
            "unmatched_true": self.unmatched_true,
            "match_ratio": self.match_ratio,
            "max_bulk_error": self.max_bulk_error,
            "mean_bulk_error": self.mean_bulk_error,
            "max_bulk_error_unscaled": self.max_bulk_error_unscaled,
            "mean_bulk_error_unscaled": self.mean_bulk_error_unscaled,
        }


def exact_scaled_roots(m: int, n: int, precision_bits: int | None = None) -> np.ndarray:
    """Roots of H_{m,n} scaled by E**-0.5, as complex128."""
    rs = find_roots(hermite_generalized(m, n), precision_bits)
    return scale_roots(rs, m, n)


def _mutual_nn(P, T):
    tp = cKDTree(np.column_stack([T.real, T.imag]))
    pp = cKDTree(np.column_stack([P.real, P.imag]))
    _, p2t = tp.query(np.column_stack([P.real, P.imag]))
    _, t2p = pp.query(np.column_stack([T.real, T.imag]))
    return {i: int(p2t[i]) for i in range(len(P)) if t2p[p2t[i]] == i}


def _greedy(P, T, k=8):
    tp = cKDTree(np.column_stack([T.real, T.imag]))
    kk = min(k, len(T))
    d, idx = tp.query(np.column_stack([P.real, P.imag]), k=kk)
    d, idx = np.atleast_2d(d).reshape(len(P), kk), np.atleast_2d(idx).reshape(len(P), kk)
    cand = sorted((d[i, c], i, int(idx[i, c])) for i in range(len(P)) for c in range(kk))
    used_p, used_t, out = set(), set(), {}
    for _, i, t in cand:
        if i in used_p or t in used_t:
            continue
        out[i] = t
        used_p.add(i)
        used_t.add(t)
    return out


def _local_spacing(P):
    if len(P) < 2:
        return np.full(len(P), np.inf)
    tree = cKDTree(np.column_stack([P.real, P.imag]))
    d, _ = tree.query(np.column_stack([P.real, P.imag]), k=2)
    return d[:, 1]


def match_roots(pred: RootLattice, true_roots, sigma: float | None = None) -> MatchReport:
    """Pair predictions with exact scaled roots.

    Mutual nearest neighbours are compared with a greedy assignment in
    order of distance; the greedy pairs are used.  A pair is accepted when
    its distance is below a third of the distance from the prediction to
    its nearest predicted neighbour.  Statistics use only bulk pairs,
    ``|j| <= (sigma - 0.05) m`` and ``|k| <= (sigma - 0.05) n``, which is
    membership in the shrunken region for a solved lattice point.

    Raises
    ------
    MatchingAmbiguous
        If the two matchings disagree on more than 1% of the predictions.
    """
    cfg = pred.cfg
    sigma = cfg.sigma if sigma is None else sigma
    keys = [k for k, _ in pred.items()]
    P = np.array([pred.entries[k].alpha for k in keys], dtype=complex)
    T = np.asarray(true_roots, dtype=complex)
    if len(P) == 0 or len(T) == 0:
        return MatchReport([], len(P), len(T), math.nan, math.nan, cfg.E, len(P), 0)
    mnn = _mutual_nn(P, T)
    gr = _greedy(P, T)
    diff = sum(1 for i, t in mnn.items() if gr.get(i) != t)
    frac = diff / len(P)
    if frac > AMBIGUITY_LIMIT:
        raise MatchingAmbiguous(f"mutual and greedy matchings disagree on {frac:.1%} of predictions")
    spacing = _local_spacing(P)
    sp = sigma - BULK_MARGIN
    pairs, bulk = [], []
    for i, t in sorted(gr.items()):
        dist = abs(P[i] - T[t])
        if dist >= spacing[i] / 3:
            continue
        j, k = keys[i]
        pairs.append((j, k, complex(P[i]), complex(T[t]), float(dist)))
        if abs(j) <= sp * cfg.m + 1e-12 and abs(k) <= sp * cfg.n + 1e-12:
            bulk.append(dist)
    bulk = np.array(bulk)
    return MatchReport(
        pairs=pairs,
        unmatched_pred=len(P) - len(pairs),
        unmatched_true=len(T) - len(pairs),
        max_bulk_error=float(bulk.max()) if len(bulk) else math.nan,
        mean_bulk_error=float(bulk.mean()) if len(bulk) else math.nan,
        E=cfg.E,
        n_pred=len(P),
        n_bulk=len(bulk),
        disagreement=frac,
    )


def fit_exponent(E, errors) -> float:
    """Least-squares slope of log(error) against log(E).

    Raises
    ------
    FitDegenerate
        Fewer than two distinct sizes, or a nonpositive error.

    Examples
    --------
    >>> round(fit_exponent([10, 20, 40], [1e-3, 1e-3, 1e-3]), 12)
    0.0
    """
    E = np.asarray(E, dtype=float)
    err = np.asarray(errors, dtype=float)
    if len(np.unique(E)) < 2:
        raise FitDegenerate("need at least two distinct sizes")
    if np.any(~np.isfinite(err)) or np.any(err <= 0):
        raise FitDegenerate("errors must be positive and finite")
    x, y = np.log(E), np.log(err)
    x0 = x - x.mean()
    return float(np.dot(x0, y - y.mean()) / np.dot(x0, x0))


@dataclass
class ScalingReport:
    exponent: float
    reports: list = field(default_factory=list)

    @property
    def E(self) -> list:
        return [r.E for r in self.reports]

    @property
    def max_errors(self) -> list:
        return [r.max_bulk_error for r in self.reports]


def scaling_report(sizes, sigma: float, roots=None) -> ScalingReport:
    """Error exponent of the bulk maximum over a family with fixed m/n.

    Parameters
    ----------
    sizes : list of (m, n)
    roots : dict, optional
        Precomputed scaled exact roots keyed by (m, n).

    Raises
    ------
    ValueError
        Sizes with different m/n ratios.
    FitDegenerate
        Fewer than two distinct sizes.
    """
    sizes = [tuple(s) for s in sizes]
    m0, n0 = sizes[0]
    if any(m * n0 != n * m0 for m, n in sizes):
        raise ValueError("sizes must share the ratio m/n")
    if len(set(sizes)) < 2:
        raise FitDegenerate("need at least two distinct sizes")
    if len(set(sizes)) < 3:
        log.warning("exponent from fewer than three sizes")
    roots = roots or {}
    reports = []
    for m, n in sizes:
        lat = build_lattice(LatticeConfig(m, n, sigma))
        tr = roots[(m, n)] if (m, n) in roots else exact_scaled_roots(m, n)
        reports.append(match_roots(lat, tr, sigma))
    expo = fit_exponent([r.E for r in reports], [r.max_bulk_error for r in reports])
    return ScalingReport(expo, reports)
