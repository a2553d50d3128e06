"""Exact roots of H_{22,16} next to the predicted lattice and the traced region.

Writes ``figure_one_roots.csv``, ``figure_one_lattice.csv`` and
``figure_one_boundary.csv`` to the output directory, plus a PNG when
matplotlib is installed.

    python3 demos/figure_one.py [outdir]
"""

import sys
from pathlib import Path

import numpy as np

from ghp.compare import exact_scaled_roots, match_roots
from ghp.lattice import LatticeConfig, build_lattice
from ghp.region import contains, trace_boundary

M, N, SIGMA = 22, 16, 0.8


def main(outdir="."):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    nu = N / (2 * M + N)
    roots = exact_scaled_roots(M, N)
    lat = build_lattice(LatticeConfig(M, N, SIGMA))
    curve = trace_boundary(nu, 200)
    rep = match_roots(lat, roots)

    np.savetxt(out / "figure_one_roots.csv", np.column_stack([roots.real, roots.imag]), delimiter=",",
               header="re_alpha,im_alpha", comments="", fmt="%.17g")
    pred = np.array([(j, k, e.alpha.real, e.alpha.imag) for (j, k), e in lat.items()])
    np.savetxt(out / "figure_one_lattice.csv", pred, delimiter=",", header="j,k,re_alpha,im_alpha",
               comments="", fmt=["%d", "%d", "%.17g", "%.17g"])
    poly = np.append(curve.polygon(), curve.polygon()[0])
    np.savetxt(out / "figure_one_boundary.csv", np.column_stack([poly.real, poly.imag]), delimiter=",",
               header="re_alpha,im_alpha", comments="", fmt="%.17g")

    print(f"roots inside K_a: {int(contains(curve, roots).sum())}/{len(roots)}")
    print(f"lattice points: {len(lat.entries)}, match ratio {rep.match_ratio:.3f}")
    print(f"bulk error max {rep.max_bulk_error:.3e}, mean {rep.mean_bulk_error:.3e}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.plot(poly.real, poly.imag, "k-", lw=0.8)
    ax.plot(roots.real, roots.imag, "o", ms=3, mfc="none", label="roots")
    ax.plot(pred[:, 2], pred[:, 3], "+", ms=4, label="lattice")
    ax.set_aspect("equal")
    ax.legend()
    fig.savefig(out / "figure_one.png", dpi=150)


if __name__ == "__main__":
    main(*sys.argv[1:])
