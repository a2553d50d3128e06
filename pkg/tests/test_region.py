"""Elliptic region: corners, branches, psi, traced edges, membership, density."""

import numpy as np
import pytest
import shapely
from hypothesis import given, strategies as st

from ghp import actions as act
from ghp import region as rg
from ghp.errors import ClassificationFailure, CutCrossing, GHPError, LogSingular, NewtonDiverged
from ghp.lattice import invert_S_batch

# first-quadrant corner at nu = 1/3, from mpmath.polyroots on the octic (40 digits)
U1_THIRD = 0.627152208949573 * (1 + 1j)
V1_THIRD = 1.71341169892929


def _quartic_x(x, a, nu):
    return 3 * x ** 4 + 4 * a * x ** 3 + (a * a - 1) * x * x - nu * nu / 4


def _hausdorff(P, Q):
    d = np.abs(P[:, None] - Q[None, :])
    return max(d.min(axis=1).max(), d.min(axis=0).max())


# ---------------------------------------------------------------- corners

def test_corner_values_third():
    cs = rg.corner_polynomial_roots(1 / 3)
    assert abs(cs.u[0] - U1_THIRD) < 1e-12
    assert abs(cs.v[0] - V1_THIRD) < 1e-12
    assert abs(cs.v[1] - 1j * V1_THIRD) < 1e-12


@pytest.mark.parametrize("nu", [1 / 3, 1 / 4, 1 / 5, 0.05])
def test_corner_structure(nu):
    cs = rg.corner_polynomial_roots(nu)
    u1 = cs.u[0]
    assert np.allclose(cs.u, [u1, -u1.conjugate(), -u1, u1.conjugate()], atol=0)
    assert cs.v[0].imag == 0 and cs.v[0].real > 0
    assert cs.v[1].real == 0 and cs.v[1].imag > 0
    assert cs.v[2] == -cs.v[0] and cs.v[3] == -cs.v[1]
    for _, z in cs.labeled():
        assert abs(rg.corner_polynomial(z, nu)) < 1e-12
    labels = [lab for lab, _ in cs.labeled()]
    assert labels == ["u1", "u2", "u3", "u4", "v1", "v2", "v3", "v4"]


def test_corner_domain():
    with pytest.raises(ValueError):
        rg.corner_polynomial_roots(0.5)
    with pytest.raises(ValueError):
        rg.corner_polynomial_roots(0.0)


def test_classification_failure(monkeypatch):
    monkeypatch.setattr(rg.np, "roots", lambda c: np.array([1.0, 2.0, 3.0, 4.0], dtype=complex))
    with pytest.raises(ClassificationFailure):
        rg.corner_polynomial_roots(1 / 3)


# ---------------------------------------------------------------- branches and psi

def test_anchor_branch():
    x = rg.branch_x(1 / 3, 3.0)
    roots = np.roots([3, 12, 8, 0, -1 / 36])
    pos = [r.real for r in roots if abs(r.imag) < 1e-12 and r.real > 0]
    assert len(pos) == 1
    assert abs(x - pos[0]) < 1e-14
    # leading order nu / (2 alpha) = 1/18
    assert abs(x - 1 / 18) < 0.01
    assert rg.branch_y(1 / 3, 3.0).real > 0


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_branch_residual_and_parity(re, im):
    a = complex(re, im)
    nu = 1 / 4
    try:
        x, y = rg.branch_xy(nu, a)
        xm, ym = rg.branch_xy(nu, -a)
    except CutCrossing:
        return
    assert abs(_quartic_x(x, a, nu)) < 1e-13 * max(1, abs(a) ** 2)
    assert abs(y * y - (a * a + 6 * x * a + 6 * x * x - 1)) < 1e-12
    assert abs(xm + x) < 1e-12 and abs(ym + y) < 1e-12


def test_large_alpha_asymptotics():
    nu = 1 / 3
    for th in (0.0, 0.3, 1.2):
        a = 50 * np.exp(1j * th)
        x, y = rg.branch_xy(nu, a)
        assert abs(x * a - nu / 2) < 1e-3
        assert abs(y / a - 1) < 1e-3
    a = 50.0
    assert abs(rg.psi(nu, a) - a * a / 2) < 0.15 * a * a / 2


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_psi_symmetry(re, im):
    a = complex(re, im)
    try:
        p = rg.psi(1 / 3, a)
        vals = [rg.psi(1 / 3, -a), rg.psi(1 / 3, a.conjugate())]
    except (CutCrossing, LogSingular):
        return
    assert np.allclose(vals, p, atol=1e-10)


@pytest.mark.parametrize("nu", [1 / 3, 1 / 5])
def test_psi_vanishes_at_corners(nu):
    cs = rg.corner_polynomial_roots(nu)
    for u in cs.u:
        out = u * (1 + 1e-3)  # outward, off the diagonal cuts
        vals = [abs(rg.psi(nu, out + 1e-3 * d)) for d in (1, 1j)]
        near = [abs(rg.psi(nu, out + 1e-7 * d)) for d in (1, 1j)]
        assert max(near) < max(vals)
        assert max(near) < 1e-4


def test_cut_crossing():
    cs = rg.corner_polynomial_roots(1 / 3)
    with pytest.raises(CutCrossing):
        rg.branch_x(1 / 3, 0.5 * cs.u[0])
    with pytest.raises(CutCrossing):
        rg.psi(1 / 3, 0.0)


def test_errors_carry_module():
    try:
        rg.branch_x(1 / 3, 0.0)
    except GHPError as exc:
        rec = exc.as_record()
        assert rec["error"] == "CutCrossing"


# ---------------------------------------------------------------- boundary

def test_points_per_edge_minimum():
    with pytest.raises(ValueError):
        rg.trace_boundary(1 / 3, 8)


def test_edges_close_at_corners(curve_third):
    u = curve_third.corners.u
    assert len(curve_third.edges) == 4
    for k, e in enumerate(curve_third.edges):
        assert len(e) == 256
        assert abs(e[0] - u[k - 1]) < 1e-12
        assert abs(e[-1] - u[k]) < 1e-12


def test_edges_on_zero_set(curve_third):
    nu = curve_third.nu
    for e in curve_third.edges:
        inner = e[1:-1]
        assert np.max(np.abs(rg.psi(nu, inner))) < 1e-10


def test_boundary_symmetry(curve_third):
    P = curve_third.polygon()
    assert _hausdorff(P, -P) < 1e-6
    assert _hausdorff(P, P.conj()) < 1e-6


@pytest.mark.parametrize("nu", [1 / 4, 1 / 5])
def test_boundary_other_nu(nu, traced):
    c = traced(nu, 64)
    P = c.polygon()
    assert shapely.Polygon(np.column_stack([P.real, P.imag])).is_valid
    assert _hausdorff(P, -P) < 1e-6
    for e in c.edges:
        assert np.max(np.abs(rg.psi(nu, e[1:-1]))) < 1e-10


def test_corner_angles_third(curve_third):
    for ang in curve_third.corner_angles():
        assert abs(ang - 2 * np.pi / 5) < 0.02


def test_edge_beta_at_corners_and_edges(curve_third):
    nu = curve_third.nu
    cs = curve_third.corners
    for u in cs.u:
        assert abs(rg.edge_beta(nu, u, cs) - rg.corner_beta(u, nu)) < 1e-10
        # the limit of B_Delta along the edge matches f
        assert abs(rg.edge_beta(nu, u * (1 + 1e-7), cs) - rg.corner_beta(u, nu)) < 1e-5
    for e in curve_third.edges:
        a = e[1:-1:5]
        b = rg.edge_beta(nu, a, cs)
        assert np.allclose(rg.edge_beta(nu, -a, cs), -b, atol=1e-12)
        d = act.discriminant(a, b, nu)
        # discriminant terms reach size ~ |beta|^4 + |alpha|^4, relative check
        scale = 1 + np.abs(a) ** 6 + np.abs(b) ** 4
        assert np.max(np.abs(d) / scale) < 1e-9


# ---------------------------------------------------------------- membership

def test_contains_basics(curve_third):
    assert rg.contains(curve_third, 0.0)
    assert not rg.contains(curve_third, 2.0)
    assert not rg.contains(curve_third, 1.2 * curve_third.corners.u[0])
    inner = rg.shrink(curve_third, 0.5)
    assert rg.contains(curve_third, inner).all()


@pytest.mark.slow
def test_membership_matches_action_oracle(curve_third):
    # inside K_a the Boutroux solution continued from 0 has S in Q and
    # inverts back to alpha; outside it lands on another sheet
    nu = curve_third.nu
    rng = np.random.default_rng(11)
    A = rng.uniform(-1.2, 1.2, 100) + 1j * rng.uniform(-1.2, 1.2, 100)
    P = curve_third.polygon()
    ring = shapely.LinearRing(np.column_stack([P.real, P.imag]))
    qa, qb = (1 - nu) * np.pi / 2, nu * np.pi
    S = np.full((len(A), 2), np.nan)
    for i, a in enumerate(A):
        try:
            _, tq = act.solve_beta(nu, a, return_quartet=True)
        except NewtonDiverged:
            continue
        s1, s2, _ = act.closed_form(tq.lambdas, nu)
        S[i] = [(-1j * s1).real, (-1j * s2).real]
    inq = (np.abs(S[:, 0]) <= qa) & (np.abs(S[:, 1]) <= qb)
    back, _, _, ok = invert_S_batch(nu, np.where(inq[:, None], S, 0.0), steps=64)
    oracle = inq & ok & (np.abs(back - A) < 1e-8)
    member = rg.contains(curve_third, A)
    dist = shapely.distance(ring, shapely.points(A.real, A.imag))
    far = dist > 1e-3
    assert np.array_equal(member[far], oracle[far])


# ---------------------------------------------------------------- density

def _fd_density(nu, a, h=1e-5):
    # independent oracle: central differences of S_a through solve_beta
    def S(z):
        _, tq = act.solve_beta(nu, z, return_quartet=True)
        s1, s2, _ = act.closed_form(tq.lambdas, nu)
        return np.array([(-1j * s1).real, (-1j * s2).real])

    dx = (S(a + h) - S(a - h)) / (2 * h)
    dy = (S(a + 1j * h) - S(a - 1j * h)) / (2 * h)
    return abs(np.linalg.det(np.column_stack([dx, dy]))) / (2 * nu * (1 - nu) * np.pi ** 2)


@pytest.mark.parametrize("a", [0.1 + 0.05j, -0.3 + 0.2j, 0.4 - 0.1j])
def test_density_vs_finite_differences(curve_third, a):
    nu = curve_third.nu
    assert abs(rg.density(nu, a, curve_third) - _fd_density(nu, a)) < 1e-6


def test_density_symmetry_and_exterior(curve_third):
    nu = curve_third.nu
    a = 0.23 + 0.31j
    v = rg.density(nu, a, curve_third)
    assert v > 0
    for b in (-a, a.conjugate(), -a.conjugate()):
        assert abs(rg.density(nu, b, curve_third) - v) < 1e-8
    assert rg.density(nu, 2.0 + 1j, curve_third) == 0.0
    assert rg.density(nu, 2.0 + 1j, curve_third, return_flag=True) == (0.0, True)


def test_density_at_origin_third():
    # at alpha = 0 the Jacobian is explicit in K(1/2)
    from ghp.elliptic import complete_K

    nu = 1 / 3
    _, _, J = act.closed_form(act.base_quartet(nu), nu)
    v = float(rg._density_value(J, nu))
    k = complete_K(0.5).real
    # S_a is linear near 0 with spacing K(1/2) sqrt(3/4) per pi in each direction
    expected = (np.pi / (k * np.sqrt(0.75))) ** 2 / (2 * nu * (1 - nu) * np.pi ** 2)
    assert abs(v - expected) < 1e-10
