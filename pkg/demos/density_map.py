"""Root density on K_a for nu = 1/3 and its normalisation.

    python3 demos/density_map.py [grid]
"""

import sys

import numpy as np

from ghp.region import density_grid


def main(grid="120"):
    X, Y, phi, area = density_grid(1 / 3, int(grid))
    print(f"integral {phi.sum() * area:.5f}")
    print(f"density at the centre {phi[phi.shape[0] // 2, phi.shape[1] // 2]:.4f}, max {phi.max():.4f}")
    np.savetxt("density_map.csv", np.column_stack([X.ravel(), Y.ravel(), phi.ravel()]), delimiter=",",
               header="re_alpha,im_alpha,phi", comments="", fmt="%.17g")


if __name__ == "__main__":
    main(*sys.argv[1:])
