"""Acceptance criteria 1-11.

Each test carries a ``criterion`` marker; the session ends with one
PASS/FAIL line per criterion (see ``conftest.py``).  Run alone with

    python3 -m pytest tests/test_acceptance.py -v
"""

import math
import time

import numpy as np
import pytest

from ghp import actions as act
from ghp.compare import exact_scaled_roots, fit_exponent, match_roots
from ghp.hermite import hermite_generalized
from ghp.lattice import LatticeConfig, build_lattice, first_order_alpha, invert_S_batch, sample_K
from ghp.region import (
    contains,
    corner_beta,
    corner_polynomial,
    density_grid,
    edge_beta,
    trace_boundary,
)
from ghp.roots import find_roots

NUS = (1 / 3, 1 / 4, 1 / 5)
SEED = 20240607

_cache: dict = {}


def _lattice(m, n, sigma):
    key = (m, n, sigma)
    if key not in _cache:
        _cache[key] = build_lattice(LatticeConfig(m, n, sigma))
    return _cache[key]


def _report(record_property, text):
    record_property("detail", text)
    print(text)


# ---------------------------------------------------------------- 1

@pytest.mark.criterion(1, "exact-root oracle: H_{2,2} closed form, H_{m,1} = Gauss-Hermite nodes")
def test_c01_exact_roots(record_property):
    t0 = time.perf_counter()
    r22 = find_roots(hermite_generalized(2, 2)).as_complex()
    want = [(3 / 4) ** 0.25 * np.exp(1j * math.pi * (2 * q + 1) / 4) for q in range(4)]
    err22 = max(min(abs(z - w) for z in r22) for w in want)
    err_h = 0.0
    for m in range(1, 11):
        nodes, _ = np.polynomial.hermite.hermgauss(m)
        got = np.sort(find_roots(hermite_generalized(m, 1)).as_complex().real)
        err_h = max(err_h, float(np.abs(got - np.sort(nodes)).max()))
    dt = time.perf_counter() - t0
    _report(record_property, f"H22 err {err22:.1e}, Hm1 err {err_h:.1e}, {dt:.2f} s")
    assert err22 < 1e-12
    assert err_h < 1e-10
    assert dt < 1.0


# ---------------------------------------------------------------- 2

@pytest.mark.criterion(2, "Legendre identity det J = 2 pi i on K^0.9")
def test_c02_legendre(record_property):
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    worst = 0.0
    for nu in NUS:
        _, _, L, _ = sample_K(nu, 0.9, 50, rng)
        _, _, J = act.closed_form(L, nu)
        worst = max(worst, float(np.abs(np.linalg.det(J) - 2j * np.pi).max()))
    dt = time.perf_counter() - t0
    _report(record_property, f"max |det J - 2 pi i| {worst:.1e}, {dt:.2f} s")
    assert worst < 1e-10
    assert dt < 10.0


# ---------------------------------------------------------------- 3

@pytest.mark.criterion(3, "base point S(0,0) = (0,0)")
def test_c03_base_point(record_property):
    vals = []
    for nu in NUS:
        s1, s2, _ = act.closed_form(act.base_quartet(nu), nu)
        vals.append(abs(s1) + abs(s2))
    _report(record_property, f"max |s1|+|s2| {max(vals):.1e}")
    assert max(vals) < 1e-12


# ---------------------------------------------------------------- 4

@pytest.mark.criterion(4, "closed-form actions agree with the contour oracle on K^0.8")
def test_c04_oracle(record_property):
    rng = np.random.default_rng(SEED + 4)
    nu = 1 / 4
    a, b, L, _ = sample_K(nu, 0.8, 20, rng)
    worst = 0.0
    for i in range(20):
        p, tq = act.ParameterPoint(nu, a[i], b[i]), act.TurningQuartet(L[i])
        o = act.oracle_actions(p, tq)
        s1, s2, _ = act.closed_form(L[i], nu)
        worst = max(worst, abs(o.s1 - s1), abs(o.s2 - s2))
    _report(record_property, f"max deviation {worst:.1e} at 20 points, nu = 1/4")
    assert worst < 1e-8


# ---------------------------------------------------------------- 5

@pytest.mark.criterion(5, "lattice images inside Q for (22,16), sigma = 0.9")
def test_c05_range(record_property):
    lat = _lattice(22, 16, 0.9)
    nu = lat.cfg.nu
    qa, qb = (1 - nu) * math.pi / 2, nu * math.pi
    over = 0.0
    for _, e in lat.items():
        s1, s2, _ = act.closed_form(e.quartet, nu)
        S1, S2 = -1j * s1, -1j * s2
        over = max(over, abs(S1).real - qa, abs(S2).real - qb, abs(S1.imag) - 1e-10, abs(S2.imag) - 1e-10)
    _report(record_property, f"{len(lat.entries)} points, completion {lat.completion_ratio}, max excess {over:.2e}")
    assert lat.completion_ratio == 1.0
    assert over <= lat.cfg.tol


# ---------------------------------------------------------------- 6

@pytest.mark.criterion(6, "small-alpha grid: first-order formula, square at nu = 1/3")
def test_c06_small_alpha(record_property):
    lat = _lattice(22, 16, 0.9)
    cfg = lat.cfg
    err = max(
        abs(e.alpha - first_order_alpha(cfg.nu, cfg.E, j, k))
        for (j, k), e in lat.items()
        if abs(j) <= 3 and abs(k) <= 3
    )
    # spacing ratio from the exact Jacobian at the origin, nu = 1/3
    nu = 1 / 3
    _, _, J = act.closed_form(act.base_quartet(nu), nu)
    dx = np.linalg.solve(J, [1j * math.pi / 60, 0])[0]
    dy = np.linalg.solve(J, [0, 1j * math.pi / 60])[0]
    ratio = abs(dy.imag) / abs(dx.real)
    f = first_order_alpha(nu, 60, 1, 1)
    ratio_f = f.imag / f.real
    _report(record_property, f"max grid error {err:.2e} (bound {5 / 60 ** 2:.2e}); ratio {ratio:.12f}, formula {ratio_f:.12f}")
    assert err < 5 * cfg.E ** -2
    assert abs(ratio - 1) < 1e-6 and abs(ratio_f - 1) < 1e-6
    assert abs(dx.imag) < 1e-14 and abs(dy.real) < 1e-14


# ---------------------------------------------------------------- 7

@pytest.mark.criterion(7, "root picture of H_{22,16} against the lattice, sigma = 0.8")
def test_c07_figure_one(record_property):
    t0 = time.perf_counter()
    roots = exact_scaled_roots(22, 16)
    lat = build_lattice(LatticeConfig(22, 16, 0.8))
    rep = match_roots(lat, roots)
    curve = trace_boundary(16 / 60, 128)
    inside = contains(curve, roots)
    dt = time.perf_counter() - t0
    _cache["roots", 22, 16] = roots
    ratio = rep.max_bulk_error / rep.mean_bulk_error
    _report(
        record_property,
        f"match {rep.match_ratio:.3f}, max/mean {ratio:.2f}, inside {int(inside.sum())}/{len(roots)}, {dt:.1f} s",
    )
    assert rep.match_ratio == 1.0
    assert rep.max_bulk_error < 10 * rep.mean_bulk_error
    assert len(roots) == 352 and inside.all()
    assert dt < 120


# ---------------------------------------------------------------- 8

@pytest.mark.criterion(8, "error-scaling exponent over (11,8), (22,16), (33,24)")
def test_c08_exponent(record_property):
    t0 = time.perf_counter()
    reps = []
    for m, n in ((11, 8), (22, 16), (33, 24)):
        roots = _cache.get(("roots", m, n))
        if roots is None:
            roots = exact_scaled_roots(m, n)
        reps.append(match_roots(build_lattice(LatticeConfig(m, n, 0.7)), roots, 0.7))
    E = [r.E for r in reps]
    errs = [r.max_bulk_error for r in reps]
    expo = fit_exponent(E, errs)
    dt = time.perf_counter() - t0
    scaled = [e * x ** 2 for e, x in zip(errs, E)]
    _report(record_property, f"exponent {expo:.3f}, max errors {['%.2e' % e for e in errs]}, {dt:.0f} s")
    assert -2.6 <= expo <= -1.4
    assert all(r.match_ratio == 1.0 for r in reps)
    # E^2-scaled errors stay within a factor 4 between consecutive sizes
    assert all(max(p, q) / min(p, q) <= 4 for p, q in zip(scaled, scaled[1:]))
    assert dt < 600


# ---------------------------------------------------------------- 9

@pytest.mark.criterion(9, "corner geometry: 2 pi / 5 angles, C(u_k) = 0, B(u_k) = f(u_k)")
def test_c09_corners(record_property):
    nu = 1 / 3
    curve = trace_boundary(nu, 128)
    angles = curve.corner_angles()
    dev = max(abs(a - 2 * math.pi / 5) for a in angles)
    u = curve.corners.u
    cres = max(abs(corner_polynomial(z, nu)) for z in u)
    bres = max(abs(edge_beta(nu, z, curve.corners) - corner_beta(z, nu)) for z in u)
    # B along each edge approaching the corner
    blim = max(abs(edge_beta(nu, e[-2], curve.corners) - corner_beta(e[-1], nu)) for e in curve.edges)
    _report(record_property, f"angle deviation {dev:.4f}, C residual {cres:.1e}, B-f {bres:.1e}, edge limit {blim:.1e}")
    assert dev < 0.02
    assert cres < 1e-12
    assert bres < 1e-10
    assert blim < 1e-2


# ---------------------------------------------------------------- 10

@pytest.mark.criterion(10, "density normalisation on a 200 x 200 grid, nu = 1/3")
def test_c10_density(record_property):
    X, Y, phi, area = density_grid(1 / 3, 200)
    total = float(phi.sum() * area)
    sym = max(
        float(np.abs(phi - phi[::-1, ::-1]).max()),
        float(np.abs(phi - phi[:, ::-1]).max()),
    )
    _report(record_property, f"integral {total:.5f}, min {phi.min():.1e}, symmetry {sym:.1e}")
    assert abs(total - 1) < 0.01
    assert phi.min() >= 0
    assert sym < 1e-8


# ---------------------------------------------------------------- 11

@pytest.mark.criterion(11, "symmetry suite: S under conjugation and reflection, lattice closure")
def test_c11_symmetry(record_property):
    rng = np.random.default_rng(SEED + 11)
    nu = 1 / 3
    a, b, L, T = sample_K(nu, 0.9, 20, rng)
    worst = 0.0
    for i in range(20):
        s = np.array(act.closed_form(L[i], nu)[:2])
        # S(conj a, conj b) = (S1, -S2): labels of the conjugate quartet follow
        # lambda_1 <-> lambda_1 with conjugation
        tc = act.turning_points(act.ParameterPoint(nu, a[i].conjugate(), b[i].conjugate()), act.TurningQuartet(L[i].conj()))
        sc = np.array(act.closed_form(tc.lambdas, nu)[:2])
        # S(-a, -b) = -S: the quartet maps to -lambda in reversed order
        tn = act.turning_points(act.ParameterPoint(nu, -a[i], -b[i]), act.TurningQuartet(-L[i][::-1]))
        sn = np.array(act.closed_form(tn.lambdas, nu)[:2])
        S, Sc, Sn = -1j * s, -1j * sc, -1j * sn
        worst = max(worst, abs(Sc[0] - S[0]), abs(Sc[1] + S[1]), abs(Sn[0] + S[0]), abs(Sn[1] + S[1]))
    # inverse direction: S^-1 of the transformed targets
    ac, bc, _, ok1 = invert_S_batch(nu, T * [1, -1])
    an, bn, _, ok2 = invert_S_batch(nu, -T)
    inv = max(float(np.abs(ac - a.conj()).max()), float(np.abs(an + a).max()), float(np.abs(bc - b.conj()).max()))
    lat = _lattice(22, 16, 0.9)
    closure = lat.closure_error()
    keys = set(lat.entries)
    closed = all((-j, -k) in keys and (j, -k) in keys for j, k in keys)
    _report(record_property, f"S laws {worst:.1e}, inverse {inv:.1e}, lattice closure {closure:.1e}")
    assert worst < 1e-10
    assert ok1.all() and ok2.all() and inv < 1e-10
    assert closed and closure < 1e-10
