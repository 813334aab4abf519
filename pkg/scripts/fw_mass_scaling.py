"""Commutator deviations under m -> lambda m and under grid refinement.

Shows that the deviations do not depend on the mass scale but fall
roughly fourfold each time the spacing is halved.
"""
import argparse

from pdmdirac.discretization import Grid
from pdmdirac.foldy_wouthuysen import commutator_checks
from pdmdirac.profiles import MassProfile


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", type=float, default=1.0)
    args = ap.parse_args()
    print("m0,n,h,c1_dev,c2_dev,full_odd_residual")
    for n in (1001, 2001, 4001):
        g = Grid(-20.0, 20.0, n)
        for m0 in (2.5, 5.0, 10.0, 20.0):
            r = commutator_checks(MassProfile.hyperbolic(m0, args.a), g)
            print(f"{m0},{n},{r.h:.4f},{r.c1_deviation:.4e},{r.c2_deviation:.4e},{r.full_odd_residual:.4e}")


if __name__ == "__main__":
    main()
