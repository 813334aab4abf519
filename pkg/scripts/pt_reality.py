"""Fraction of real eigenvalues for the two discretizations of the coupled operator."""
import argparse

from pdmdirac.dirac_system import build_coupled_operator, pt_symmetry_check
from pdmdirac.discretization import Grid
from pdmdirac.potentials import schrodingerizing_potential
from pdmdirac.profiles import MassProfile


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m0", type=float, default=1.0)
    ap.add_argument("--a", type=float, default=1.0)
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 400])
    args = ap.parse_args()
    p = MassProfile.hyperbolic(args.m0, args.a)
    print("form,n,delta,real_fraction,conjugation_defect")
    for n in args.sizes:
        g = Grid.symmetric(10.0, n)
        V = schrodingerizing_potential(p, g)
        for form in ("gauge", "pointwise"):
            rep = pt_symmetry_check(build_coupled_operator(p, V, g, form=form), tol_real=1e-8)
            print(f"{form},{n},{rep.delta},{rep.real_fraction:.4f},{rep.conjugation_defect:.2e}")


if __name__ == "__main__":
    main()
