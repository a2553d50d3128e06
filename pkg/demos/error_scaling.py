"""Scaled matching error against E for m:n = 11:8, sigma = 0.7.

    python3 demos/error_scaling.py
"""

from ghp.compare import scaling_report

SIZES = [(11, 8), (22, 16), (33, 24)]


def main():
    sr = scaling_report(SIZES, 0.7)
    for (m, n), r in zip(SIZES, sr.reports):
        print(f"({m},{n}) E={r.E:3d}  max {r.max_bulk_error:.3e}  mean {r.mean_bulk_error:.3e}  "
              f"max*E^2 {r.max_bulk_error * r.E ** 2:.3f}")
    print(f"fitted exponent {sr.exponent:.3f}")


if __name__ == "__main__":
    main()
