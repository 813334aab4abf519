"""Finite-difference error of the linear-mass spectrum as the grid is refined."""
import argparse

import numpy as np

from pdmdirac.discretization import Grid
from pdmdirac.harmonic import analytic_energies, numeric_energies


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mu", type=float, default=1.0)
    ap.add_argument("--sizes", type=int, nargs="+", default=[500, 1000, 2000, 4000, 8000])
    args = ap.parse_args()
    exact = analytic_energies(args.mu, [1, 3, 5, 7])
    print("n,err_n1,err_n3,err_n5,err_n7")
    for n in args.sizes:
        spec = numeric_energies(args.mu, Grid(0.0, 20.0, n), k=4)
        err = np.abs(spec.eigenvalues.real - exact)
        print(f"{n}," + ",".join(f"{e:.6e}" for e in err))


if __name__ == "__main__":
    main()
