"""T(E), R(E) and the flux defect for the hyperbolic barrier."""
import argparse

import numpy as np

from pdmdirac.heun import scattering_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m0", type=float, default=1.0)
    ap.add_argument("--a", type=float, default=1.0)
    ap.add_argument("--emin", type=float, default=0.2)
    ap.add_argument("--emax", type=float, default=5.0)
    ap.add_argument("--steps", type=int, default=25)
    args = ap.parse_args()
    print("E,T,R,flux_defect")
    for E, T, R in scattering_sweep(args.m0, args.a, np.linspace(args.emin, args.emax, args.steps)):
        print(f"{E:.4f},{T:.12f},{R:.12f},{abs(T + R - 1):.2e}")


if __name__ == "__main__":
    main()
