"""The elliptic region K_a: corners, boundary function psi, edges and density.

Corners are the quadrant roots of the octic

    C(alpha) = alpha^8 - 6(3 nu^2 + 1) alpha^4 + 8(1 - 9 nu^2) alpha^2
               - 3(9 nu^4 + 6 nu^2 + 1),

and the edges are the bounded arcs of the zero set of the harmonic function
psi joining adjacent corners.  psi is built from the branch x(alpha) of

    3 x^4 + 4 alpha x^3 + (alpha^2 - 1) x^2 - nu^2 / 4 = 0

that is positive for large real alpha, and y with
``y^2 = alpha^2 + 6 x alpha + 6 x^2 - 1``, ``y ~ alpha``.  Both live on the
plane cut along the diagonals [u1, u3] and [u2, u4].
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import actions as act
from ._quartic import solve_quartic
from .errors import (
    BranchJump,
    ClassificationFailure,
    CutCrossing,
    EdgeMismatch,
    LogSingular,
    NewtonDiverged,
    TraceLost,
)

__all__ = [
    "CornerSet",
    "BoundaryCurve",
    "corner_polynomial",
    "corner_polynomial_roots",
    "corner_beta",
    "branch_x",
    "branch_y",
    "branch_xy",
    "psi",
    "trace_boundary",
    "edge_beta",
    "contains",
    "shrink",
    "s_alpha_jacobian",
    "density",
    "density_grid",
]

log = logging.getLogger(__name__)

ANCHOR = 3.0


# ---------------------------------------------------------------- corners

def corner_polynomial(alpha, nu):
    """The octic C(alpha)."""
    a2 = np.asarray(alpha) ** 2
    return (
        a2 ** 4
        - 6 * (3 * nu ** 2 + 1) * a2 ** 2
        + 8 * (1 - 9 * nu ** 2) * a2
        - 3 * (9 * nu ** 4 + 6 * nu ** 2 + 1)
    )


def corner_beta(alpha, nu):
    """f(alpha) = -(alpha^2 (alpha^2 - 2) + 3 nu^2 + 1) / (6 alpha)."""
    alpha = np.asarray(alpha)
    return -(alpha ** 2 * (alpha ** 2 - 2) + 3 * nu ** 2 + 1) / (6 * alpha)


@dataclass(frozen=True)
class CornerSet:
    """Roots of C: corners u1..u4 (quadrants I..IV) and axis roots v1..v4.

    ``v1 > 0`` is real, ``v2`` lies on the positive imaginary axis,
    ``v3 = -v1`` and ``v4 = -v2``.
    """

    u: tuple
    v: tuple
    nu: float

    def labeled(self):
        return [(f"u{k + 1}", self.u[k]) for k in range(4)] + [(f"v{k + 1}", self.v[k]) for k in range(4)]


def corner_polynomial_roots(nu: float, tol: float = 1e-10) -> CornerSet:
    """Classify the eight roots of C(alpha).

    C is even, so its roots are square roots of the quartic in t = alpha^2.
    Roots are taken from numpy and polished by Newton on C itself.

    Raises
    ------
    ClassificationFailure
        Unless exactly one positive t, one negative t and one complex pair.
    """
    if not 0 < nu <= 1 / 3 + 1e-12:
        raise ValueError("nu must lie in (0, 1/3]")
    t = np.roots([1, 0, -6 * (3 * nu ** 2 + 1), 8 * (1 - 9 * nu ** 2), -3 * (9 * nu ** 4 + 6 * nu ** 2 + 1)])
    real = [z.real for z in t if abs(z.imag) <= tol * max(1, abs(z))]
    cplx = [z for z in t if abs(z.imag) > tol * max(1, abs(z))]
    pos = [r for r in real if r > tol]
    neg = [r for r in real if r < -tol]
    if len(pos) != 1 or len(neg) != 1 or len(cplx) != 2:
        raise ClassificationFailure(f"unexpected root pattern of C at nu={nu}: {t}")

    def polish(a):
        for _ in range(4):
            h = 1e-6 * max(1, abs(a))
            c = corner_polynomial(a, nu)
            dc = (corner_polynomial(a + h, nu) - corner_polynomial(a - h, nu)) / (2 * h)
            # analytic derivative of the octic
            a2 = a * a
            dc = 8 * a * a2 ** 3 - 24 * (3 * nu ** 2 + 1) * a * a2 + 16 * (1 - 9 * nu ** 2) * a
            a = a - c / dc
        return a

    v1 = polish(complex(np.sqrt(pos[0])))
    v2 = polish(complex(1j * np.sqrt(-neg[0])))
    w = np.sqrt(complex(cplx[0]))
    w = complex(abs(w.real), abs(w.imag))
    u1 = polish(w)
    v1 = complex(v1.real, 0.0)
    v2 = complex(0.0, v2.imag)
    u = (u1, -u1.conjugate(), -u1, u1.conjugate())
    v = (v1, v2, -v1, -v2)
    if not (u1.real > 0 and u1.imag > 0):
        raise ClassificationFailure("first corner not in the first quadrant")
    return CornerSet(u, v, nu)


# ---------------------------------------------------------------- branches

def _x_roots(alpha, nu):
    a = np.asarray(alpha, dtype=np.clongdouble)
    return solve_quartic(4 * a / 3, (a * a - 1) / 3, np.zeros_like(a), np.full_like(a, -nu * nu / 12)).astype(complex)


def _y_from(alpha, x):
    return np.sqrt(alpha * alpha + 6 * x * alpha + 6 * x * x - 1)


def _check_cuts(alpha, corners: CornerSet, tol=1e-8):
    u = corners.u
    for a, b in ((u[0], u[2]), (u[1], u[3])):
        d = b - a
        t = np.clip(((alpha - a) * np.conj(d)).real / abs(d) ** 2, 0, 1)
        dist = np.abs(alpha - (a + t * d))
        if np.any(dist < tol):
            raise CutCrossing("alpha lies on a diagonal branch cut")


def _continue_xy(alpha, nu, nsteps):
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    r = np.abs(alpha)
    th = np.angle(alpha)
    R = np.maximum(ANCHOR, r)
    s = np.linspace(0.0, 1.0, nsteps)[:, None]
    # geometric approach on the radial leg: steps stay small next to a
    # nearby branch point
    g = np.append(np.logspace(0, -10, nsteps - 1), 0.0)[:, None]
    path = np.concatenate(
        [
            ANCHOR + (R - ANCHOR) * s,
            R * np.exp(1j * th * s),
            (r + (R - r) * g) * np.exp(1j * th),
        ]
    )
    ok = np.ones(alpha.shape, dtype=bool)
    roots = _x_roots(path[0], nu)
    realpos = np.where(np.abs(roots.imag) < 1e-12, roots.real, -np.inf)
    x = roots[np.arange(len(alpha)), np.argmax(realpos, axis=1)]
    y = _y_from(path[0], x)
    y = np.where(y.real > 0, y, -y)
    rows = np.arange(len(alpha))
    for a in path[1:]:
        roots = _x_roots(a, nu)
        d = np.abs(roots - x[:, None])
        order = np.argsort(d, axis=1)
        d0 = d[rows, order[:, 0]]
        d1 = d[rows, order[:, 1]]
        ok &= d1 >= 3 * d0
        x = roots[rows, order[:, 0]]
        yy = _y_from(a, x)
        y = np.where(np.abs(yy - y) <= np.abs(yy + y), yy, -yy)
    return x, y, ok


def branch_xy(nu: float, alpha, corners: CornerSet | None = None):
    """Continued branches x(alpha), y(alpha), vectorized.

    The path runs from the anchor alpha = 3 along the real axis, then along
    a circle of radius ``max(3, |alpha|)``, then radially to alpha.  The
    circle lies outside all corners, and a radial leg meets a diagonal cut
    only when alpha itself is on it.  Steps are refined where root
    matching is not clear-cut.

    Raises
    ------
    CutCrossing
        If alpha is within 1e-8 of a cut.
    BranchJump
        If the matching stays ambiguous after refinement.
    """
    scalar = np.ndim(alpha) == 0
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    corners = corners or corner_polynomial_roots(nu)
    _check_cuts(alpha, corners)
    x, y, ok = _continue_xy(alpha, nu, 256)
    nsteps = 256
    while not np.all(ok):
        nsteps *= 4
        if nsteps > 16384:
            raise BranchJump("x(alpha) continuation stays ambiguous")
        bad = ~ok
        xb, yb, okb = _continue_xy(alpha[bad], nu, nsteps)
        x[bad], y[bad] = xb, yb
        ok[bad] = okb
    if scalar:
        return complex(x[0]), complex(y[0])
    return x, y


def branch_x(nu: float, alpha, corners: CornerSet | None = None):
    """x(alpha) on the cut plane, x ~ nu / (2 alpha) for large alpha."""
    return branch_xy(nu, alpha, corners)[0]


def branch_y(nu: float, alpha, corners: CornerSet | None = None):
    """y(alpha) with y^2 = alpha^2 + 6 x alpha + 6 x^2 - 1 and y ~ alpha."""
    return branch_xy(nu, alpha, corners)[1]


def _psi_from(nu, alpha, x, y):
    p1 = 1 - 2 * x * alpha - 2 * x * x
    p2 = 2 * x + alpha + y
    p3 = (x * (alpha * alpha + 5 * x * alpha + 4 * x * x - 1) + nu * y / 2) / (x * x)
    m = np.minimum(np.minimum(np.abs(p1), np.abs(p2)), np.abs(p3))
    if np.any(m < 1e-300):
        raise LogSingular("a logarithm argument in psi vanishes")
    return 0.5 * (
        (alpha * y).real
        + 0.5 * (1 - nu) * np.log(np.abs(p1))
        - np.log(np.abs(p2))
        + nu * np.log(np.abs(p3))
    )


def psi(nu: float, alpha, corners: CornerSet | None = None):
    """Harmonic boundary function psi(alpha); only Re log = ln|.| is used.

    Examples
    --------
    >>> u1 = corner_polynomial_roots(1/3).u[0]
    >>> abs(psi(1/3, u1 * (1 + 1e-7))) < 1e-6
    True
    >>> psi(1/3, 50.0) > 1000
    True
    """
    scalar = np.ndim(alpha) == 0
    a = np.atleast_1d(np.asarray(alpha, dtype=complex))
    x, y = branch_xy(nu, a, corners)
    v = _psi_from(nu, a, x, y)
    return float(v[0]) if scalar else v


class _LocalPsi:
    """psi along a curve, carrying x and y from the previous point.

    x is followed by Newton from the previous value when the Newton
    basin is clearly safe; otherwise all four roots are matched, and as a
    last resort the full path continuation is used.
    """

    def __init__(self, nu, corners, alpha0, x0=None, y0=None):
        self.nu = nu
        self.corners = corners
        if x0 is None:
            x0, y0 = branch_xy(nu, alpha0, corners)
        self.x, self.y = complex(x0), complex(y0)

    def _newton(self, alpha, x):
        c2 = alpha * alpha - 1
        q = self.nu * self.nu / 4
        for it in range(12):
            P = ((3 * x + 4 * alpha) * x + c2) * x * x - q
            dP = ((12 * x + 12 * alpha) * x + 2 * c2) * x
            if dP == 0:
                return None
            dx = P / dP
            if it == 0:
                ddP = (36 * x + 24 * alpha) * x + 2 * c2
                if 2 * abs(dx) * abs(ddP) > 0.25 * abs(dP):
                    return None
            x -= dx
            if abs(dx) <= 1e-16 * max(1.0, abs(x)):
                break
        return x

    def _pick(self, alpha, x_prev, y_prev):
        x = self._newton(alpha, x_prev)
        if x is None:
            r = _x_roots(np.array([alpha]), self.nu)[0]
            d = np.abs(r - x_prev)
            o = np.argsort(d)
            if d[o[1]] < 3 * d[o[0]]:
                return branch_xy(self.nu, alpha, self.corners)
            x = complex(r[o[0]])
        y = complex(np.sqrt(alpha * alpha + 6 * x * alpha + 6 * x * x - 1))
        if abs(y + y_prev) < abs(y - y_prev):
            y = -y
        return x, y

    def value(self, alpha, commit=False):
        alpha = complex(alpha)
        x, y = self._pick(alpha, self.x, self.y)
        if commit:
            self.x, self.y = x, y
        return float(_psi_from(self.nu, np.array([alpha]), np.array([x]), np.array([y]))[0])

    def grad(self, alpha, h=1e-7):
        gx = (self.value(alpha + h) - self.value(alpha - h)) / (2 * h)
        gy = (self.value(alpha + 1j * h) - self.value(alpha - 1j * h)) / (2 * h)
        return complex(gx, gy)


# ---------------------------------------------------------------- boundary

@dataclass
class BoundaryCurve:
    """Closed boundary of K_a as four edges.

    ``edges[k]`` runs from corner ``u[k-1]`` to ``u[k]`` (so ``edges[0]``
    joins u4 to u1), endpoints included.
    """

    edges: list
    corners: CornerSet
    nu: float
    tangents: list = None

    def polygon(self) -> np.ndarray:
        pts = [e[:-1] for e in self.edges]
        return np.concatenate(pts)

    def corner_angles(self) -> list:
        """Angle between the two edge tangents at each corner u_k."""
        return [abs(np.angle(np.exp(1j * (t_out - t_in)))) for t_in, t_out in self.tangents]


def _start_directions(nu, corners, k, radius=1e-3, nsample=720):
    """Angles at u_k where psi changes sign on a small circle, cut excluded.

    The circle is walked in both directions from the side facing away from
    the cut, carrying x locally, and stops 6 degrees short of the cut.
    """
    uk = corners.u[k]
    cut_dir = np.angle(-uk)
    gap = np.radians(6)
    # offset so that no sample sits on a symmetry line, where psi may vanish
    th = cut_dir + gap + (2 * np.pi - 2 * gap) * (np.arange(nsample + 1) + 0.37) / (nsample + 1)
    mid = nsample // 2
    pts = uk + radius * np.exp(1j * th)
    vals = np.empty(len(th))
    seeds = [None] * len(th)
    x0, y0 = branch_xy(nu, pts[mid], corners)
    for order in (range(mid, len(th)), range(mid, -1, -1)):
        lp = _LocalPsi(nu, corners, pts[mid], x0, y0)
        for i in order:
            vals[i] = lp.value(pts[i], commit=True)
            seeds[i] = (lp.x, lp.y)
    out = []
    for i in range(nsample):
        if np.sign(vals[i]) != np.sign(vals[i + 1]):
            lp = _LocalPsi(nu, corners, pts[i], *seeds[i])
            f = lambda t: lp.value(uk + radius * np.exp(1j * t))  # noqa: E731
            out.append(brentq(f, th[i], th[i + 1], xtol=1e-14))
    return np.angle(np.exp(1j * np.array(out)))


def _nearest_dir(dirs, want):
    return int(np.argmin(np.abs(np.angle(np.exp(1j * (dirs - want))))))


def _edge_tangents(nu, corners, k, radius):
    """Directions at u_k of the edges towards u_{k-1} and u_{k+1}.

    Sampled at two radii and extrapolated linearly to radius zero.
    """
    u = corners.u
    res = []
    for r in (radius, radius / 2):
        dirs = _start_directions(nu, corners, k, r)
        if len(dirs) != 3:
            raise EdgeMismatch(f"expected three zero directions at u{k + 1}, found {len(dirs)}")
        res.append(dirs)
    prev_want = np.angle(u[(k - 1) % 4] - u[k])
    next_want = np.angle(u[(k + 1) % 4] - u[k])
    out = []
    for want in (prev_want, next_want):
        d1 = res[0][_nearest_dir(res[0], want)]
        d2 = res[1][_nearest_dir(res[1], want)]
        out.append(d2 + np.angle(np.exp(1j * (d2 - d1))))
    jnext = _nearest_dir(res[0], next_want)
    return out[0], out[1], res[0][jnext]


def _trace_arc(nu, corners, start, direction, targets, step, limit, max_steps=20000):
    """Predictor-corrector along psi = 0 until a target corner or |alpha| > limit."""
    lp = _LocalPsi(nu, corners, start)
    pts = [start]
    seeds = [(lp.x, lp.y)]
    a = start
    t = np.exp(1j * direction)
    for _ in range(max_steps):
        g = lp.grad(a)
        if abs(g) == 0:
            raise TraceLost("vanishing gradient of psi")
        tang = 1j * g / abs(g)
        if (tang * np.conj(t)).real < 0:
            tang = -tang
        for target in targets:
            if abs(a - target) < 1.5 * step:
                pts.append(target)
                seeds.append(seeds[-1])
                return np.array(pts), seeds, target
        b = a + step * tang
        for _it in range(30):
            v = lp.value(b)
            gb = lp.grad(b)
            db = -v * gb / abs(gb) ** 2
            b = b + db
            if abs(db) < 1e-14:
                break
        else:
            raise TraceLost(f"corrector failed near alpha={b}")
        lp.value(b, commit=True)
        t = tang
        a = b
        pts.append(a)
        seeds.append((lp.x, lp.y))
        if abs(a) > limit:
            return np.array(pts), seeds, None
    raise TraceLost("step budget exhausted")


def _correct(lp, b):
    for _ in range(30):
        v = lp.value(b)
        g = lp.grad(b)
        db = -v * g / abs(g) ** 2
        b = b + db
        if abs(db) < 1e-15:
            break
    return b


def _resample(nu, corners, poly, seeds, npts):
    """Arc-length resampling; each point is corrected from the nearest traced seed."""
    seg = np.abs(np.diff(poly))
    s = np.concatenate([[0], np.cumsum(seg)])
    tgt = np.linspace(0, s[-1], npts)
    pts = np.interp(tgt, s, poly.real) + 1j * np.interp(tgt, s, poly.imag)
    out = [poly[0]]
    for p in pts[1:-1]:
        i = int(np.argmin(np.abs(poly[1:-1] - p))) + 1
        lp = _LocalPsi(nu, corners, poly[i], *seeds[i])
        out.append(_correct(lp, p))
    out.append(poly[-1])
    return np.array(out)


def trace_boundary(nu: float, points_per_edge: int = 64, step: float | None = None) -> BoundaryCurve:
    """Trace the four edges of K_a between adjacent corners.

    At each corner the three zero directions of psi are located on a circle
    of radius 1e-3; the two arcs that reach neighbouring corners are edges
    and the arc that escapes past ``2 max|u|`` is discarded.  Each edge is
    traced from the corner ``u_k`` towards ``u_{k+1}`` and resampled to
    ``points_per_edge`` points by arc length, each point corrected back
    onto psi = 0.

    Raises
    ------
    TraceLost, EdgeMismatch
    """
    if points_per_edge < 16:
        raise ValueError("points_per_edge must be at least 16")
    corners = corner_polynomial_roots(nu)
    u = corners.u
    umax = max(abs(c) for c in u)
    step = step or 2e-3
    radius = 1e-3
    traced = {}
    tangents = []
    for k in range(4):
        nxt = (k + 1) % 4
        prv = (k - 1) % 4
        t_in, t_out, d0 = _edge_tangents(nu, corners, k, radius)
        tangents.append((t_in, t_out))
        start = u[k] + radius * np.exp(1j * d0)
        poly, seeds, hit = _trace_arc(nu, corners, start, d0, [u[nxt], u[prv]], step, 2 * umax)
        if hit is None or abs(hit - u[nxt]) > 1e-12:
            raise EdgeMismatch(f"edge from u{k + 1} did not end at u{nxt + 1}")
        poly = np.concatenate([[u[k]], poly])
        seeds = [seeds[0]] + seeds
        traced[nxt] = _resample(nu, corners, poly, seeds, points_per_edge)
    edges = [traced[k] for k in range(4)]
    return BoundaryCurve(edges, corners, nu, tangents)


def edge_beta(nu: float, alpha_on_edge, corners: CornerSet | None = None, tol: float = 1e-9):
    """B_Delta(alpha) = x (-2 + 4 x^2 + 6 x alpha + 2 alpha^2); f(alpha) at corners."""
    corners = corners or corner_polynomial_roots(nu)
    scalar = np.ndim(alpha_on_edge) == 0
    a = np.atleast_1d(np.asarray(alpha_on_edge, dtype=complex))
    out = np.empty_like(a)
    at_corner = np.zeros(a.shape, dtype=bool)
    for c in corners.u:
        at_corner |= np.abs(a - c) < tol
    out[at_corner] = corner_beta(a[at_corner], nu)
    rest = ~at_corner
    if np.any(rest):
        x = branch_x(nu, a[rest], corners)
        ar = a[rest]
        out[rest] = x * (-2 + 4 * x * x + 6 * x * ar + 2 * ar * ar)
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------- membership

def contains(curve: BoundaryCurve, alpha, scale: float = 1.0):
    """Point-in-polygon test against the traced boundary (scaled about 0)."""
    import shapely  # noqa: PLC0415

    poly = curve.polygon() * scale
    P = shapely.Polygon(np.column_stack([poly.real, poly.imag]))
    a = np.asarray(alpha, dtype=complex)
    return shapely.contains_xy(P, a.real, a.imag)


def shrink(curve: BoundaryCurve, sigma: float) -> np.ndarray:
    """Polygon of S_a^{-1}(sigma Q) approximated by ``sigma`` times the boundary.

    Used only as a coarse bulk filter; exact K^sigma membership goes through
    the S-values.
    """
    return curve.polygon() * sigma


# ---------------------------------------------------------------- density

def s_alpha_jacobian(J):
    """Real Jacobian of S_a(alpha) = S(alpha, B(alpha)) w.r.t. (Re alpha, Im alpha).

    On R the real parts of s1, s2 vanish, so a variation d alpha forces
    ``Re(J_beta d beta) = -Re(J_alpha d alpha)``.  Solving that real 2 x 2
    system gives d beta, and ``dS = -i (J_alpha d alpha + J_beta d beta)``.
    """
    J = np.asarray(J)
    Ja = J[..., :, 0]
    Jb = J[..., :, 1]
    A = np.stack(
        [np.stack([Jb[..., 0].real, -Jb[..., 0].imag], -1), np.stack([Jb[..., 1].real, -Jb[..., 1].imag], -1)], -2
    )
    cols = []
    for da in (1.0, 1j):
        rhs = -(Ja * da).real
        db = np.linalg.solve(A, rhs[..., None])[..., 0]
        dbeta = db[..., 0] + 1j * db[..., 1]
        ds = Ja * da + Jb * dbeta[..., None]
        cols.append((-1j * ds).real)
    return np.stack(cols, -1)


def _density_value(J, nu):
    D = s_alpha_jacobian(J)
    return np.abs(np.linalg.det(D)) / (2 * nu * (1 - nu) * np.pi ** 2)


def density(nu: float, alpha, curve: BoundaryCurve | None = None, return_flag: bool = False):
    """Root density Phi_nu(alpha); zero outside K_a.

    Parameters
    ----------
    curve : BoundaryCurve, optional
        Traced boundary for the membership test; traced on demand.
    return_flag : bool
        Also return whether alpha was treated as exterior.
    """
    curve = curve or trace_boundary(nu, 64)
    if not contains(curve, alpha):
        return (0.0, True) if return_flag else 0.0
    try:
        be, tq = act.solve_beta(nu, alpha, return_quartet=True)
    except NewtonDiverged:
        return (0.0, True) if return_flag else 0.0
    _, _, J = act.closed_form(tq.lambdas, nu)
    v = float(_density_value(J, nu))
    return (v, False) if return_flag else v


def _scalar_fallback(nu, A, beta, L, solved, i, j):
    n0, n1 = A.shape
    nbrs = [(i + a, j + b) for a in (-1, 0, 1) for b in (-1, 0, 1) if (a or b)]
    nbrs = [(p, q) for p, q in nbrs if 0 <= p < n0 and 0 <= q < n1 and solved[p, q]]
    for p, q in nbrs:
        try:
            anc = act.continue_quartet(nu, A[p, q], beta[p, q], A[i, j], beta[p, q], act.TurningQuartet(L[p, q]))
            b, tq = act.solve_beta(nu, complex(A[i, j]), complex(beta[p, q]), anchor=anc, return_quartet=True)
        except (NewtonDiverged, act.LabelAmbiguity, act.TurningPointCollision):
            continue
        beta[i, j], L[i, j], solved[i, j] = b, tq.lambdas, True
        return True
    return False


def density_grid(nu: float, grid: int = 200, curve: BoundaryCurve | None = None):
    """Phi_nu on a ``grid x grid`` cell-centred lattice over the bounding box of K_a.

    beta is continued outward from alpha = 0 ring by ring (Chebyshev
    distance from the centre), each cell seeded by its inward neighbour and
    each ring solved as one vectorized Newton batch.

    Returns
    -------
    X, Y : ndarray
        Cell centres.
    phi : ndarray
        Density values, zero outside K_a.
    cell_area : float
    """
    curve = curve or trace_boundary(nu, 256)
    poly = curve.polygon()
    xr = np.abs(poly.real).max()
    yr = np.abs(poly.imag).max()
    h = np.array([2 * xr / grid, 2 * yr / grid])
    xs = (np.arange(grid) + 0.5) * h[0] - xr
    ys = (np.arange(grid) + 0.5) * h[1] - yr
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    A = X + 1j * Y
    inside = contains(curve, A)
    beta = np.zeros(A.shape, dtype=complex)
    L = np.zeros(A.shape + (4,), dtype=complex)
    solved = np.zeros(A.shape, dtype=bool)

    c = (grid - 1) / 2
    I, Jx = np.meshgrid(np.arange(grid), np.arange(grid), indexing="ij")
    di, dj = I - c, Jx - c
    ring = np.maximum(np.abs(di), np.abs(dj))
    # inward neighbour: step along every coordinate that sets the ring
    ni = np.where(np.abs(di) >= np.abs(dj), I - np.sign(di).astype(int), I)
    nj = np.where(np.abs(dj) >= np.abs(di), Jx - np.sign(dj).astype(int), Jx)

    base = act.TurningQuartet(act.base_quartet(nu))
    for r in np.unique(ring):
        sel = (ring == r) & inside
        if not sel.any():
            continue
        idx = np.nonzero(sel)
        if r == ring.min():
            for i, j in zip(*idx):
                try:
                    b, tq = act.solve_beta(nu, complex(A[i, j]), 0.0, anchor=act.continue_quartet(nu, 0, 0, A[i, j], 0, base), return_quartet=True)
                except (NewtonDiverged, act.LabelAmbiguity, act.TurningPointCollision):
                    continue
                beta[i, j], L[i, j], solved[i, j] = b, tq.lambdas, True
            continue
        pi_, pj_ = ni[idx], nj[idx]
        have = solved[pi_, pj_]
        ii, jj = idx[0][have], idx[1][have]
        if len(ii) == 0:
            continue
        b, Lq, ok = act.solve_beta_batch(nu, A[ii, jj], beta[pi_[have], pj_[have]], L[pi_[have], pj_[have]])
        beta[ii, jj], L[ii, jj] = b, Lq
        solved[ii, jj] = ok
        # near the edges turning points close up and the batch labelling gives
        # up; retry those cells one by one with adaptive label continuation
        for i, j in zip(*np.nonzero(sel & ~solved)):
            _scalar_fallback(nu, A, beta, L, solved, i, j)
    phi = np.zeros(A.shape)
    if solved.any():
        _, _, Jm = act.closed_form(L[solved], nu)
        phi[solved] = _density_value(Jm, nu)
    missing = inside & ~solved
    if np.any(missing):
        log.warning("density: %d interior cells failed to solve", int(missing.sum()))
    return X, Y, phi, float(h[0] * h[1])
