"""Linear mass m(x) = mu x: the effective harmonic oscillator on the half-line.

With xi = sqrt(mu) x and K = E^2/mu the reduced equation becomes
phi'' + (K - xi^2) phi = 0. Writing phi = exp(-xi^2/2) h(xi) and expanding
h in powers of xi gives a two-step recursion that terminates when
K = 2n + 1. The wave function must vanish at the origin, which keeps only
odd n and gives E_n = sqrt((2n + 1) mu), n = 1, 3, 5, ...
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .dirac_system import ScalarField, reduced_operator
from .discretization import Boundary, Grid, Spectrum, eigen_solve
from .errors import PreconditionError
from .profiles import MassProfile

__all__ = [
    "HermiteSeries",
    "recursion_step",
    "hermite_series",
    "hermite",
    "analytic_energies",
    "analytic_eigenfunction",
    "numeric_energies",
    "oscillator_residual",
]


def recursion_step(K, j: int, a_j):
    """a_{j+2} = (2j + 1 - K) / ((j + 1)(j + 2)) a_j.

    Works with floats, integers or :class:`fractions.Fraction` for exact
    arithmetic.
    """
    if j < 0:
        raise ValueError("j must be nonnegative")
    return (2 * j + 1 - K) * a_j / ((j + 1) * (j + 2))


@dataclass
class HermiteSeries:
    K: float
    coefficients: list
    terminated: bool

    @property
    def degree(self) -> int:
        nz = [j for j, c in enumerate(self.coefficients) if c != 0]
        return nz[-1] if nz else -1

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        out = np.zeros_like(xi)
        for c in reversed(self.coefficients):
            out = out * xi + float(c)
        return out


def hermite_series(K, n_terms: int = 40, parity: str = "odd") -> HermiteSeries:
    """Coefficients a_0..a_{n_terms-1} seeded by (a0, a1) = (0, 1) or (1, 0)."""
    if parity not in ("odd", "even"):
        raise ValueError("parity must be 'odd' or 'even'")
    a = [0] * n_terms
    j0 = 1 if parity == "odd" else 0
    a[j0] = 1
    terminated = False
    for j in range(j0, n_terms - 2, 2):
        a[j + 2] = recursion_step(K, j, a[j])
        if a[j + 2] == 0:
            terminated = True
            break
    return HermiteSeries(K, a, terminated)


def hermite(n: int, xi):
    """Physicists' Hermite polynomial H_n via H_{k+1} = 2 xi H_k - 2k H_{k-1}."""
    if n < 0 or int(n) != n:
        raise ValueError("n must be a nonnegative integer")
    xi = np.asarray(xi, dtype=float)
    h_prev, h = np.ones_like(xi), 2 * xi
    if n == 0:
        return h_prev
    for k in range(1, n):
        h_prev, h = h, 2 * xi * h - 2 * k * h_prev
    return h


def _check_odd(n):
    if int(n) != n or n < 1 or n % 2 == 0:
        raise PreconditionError(f"n must be a positive odd integer, got {n}")


def analytic_energies(mu: float, n_list) -> np.ndarray:
    """E_n = sqrt((2n + 1) mu) for odd n, ascending."""
    if mu <= 0:
        raise PreconditionError("mu must be positive")
    for n in n_list:
        _check_odd(n)
    return np.sort(np.sqrt((2 * np.asarray(n_list, dtype=float) + 1) * mu))


def _hermite_function(mu, n, x):
    """exp(-xi^2/2) H_n(xi) and its first two x-derivatives, xi = sqrt(mu) x."""
    s = math.sqrt(mu)
    xi = s * np.asarray(x, dtype=float)
    g = np.exp(-0.5 * xi * xi)
    H = hermite(n, xi)
    dH = 2 * n * hermite(n - 1, xi) if n >= 1 else np.zeros_like(xi)
    d2H = 4 * n * (n - 1) * hermite(n - 2, xi) if n >= 2 else np.zeros_like(xi)
    f = g * H
    f1 = g * (dH - xi * H)
    f2 = g * (d2H - 2 * xi * dH + (xi * xi - 1) * H)
    return f, s * f1, mu * f2


def analytic_eigenfunction(mu: float, n: int, grid: Grid) -> ScalarField:
    """A_n exp(-mu x^2/2) H_n(sqrt(mu) x), normalized on [0, grid.x_hi].

    The Gaussian carries exp(-xi^2/2) with xi = sqrt(mu) x; that is the
    only exponent for which the field solves -phi'' + mu^2 x^2 phi = E^2 phi.
    Derivatives are returned in closed form.
    """
    _check_odd(n)
    if grid.x_lo < 0:
        raise PreconditionError("the eigenfunctions live on the half-line x >= 0")
    norm2, _ = quad(lambda x: _hermite_function(mu, n, x)[0] ** 2, 0.0, grid.x_hi, limit=400, epsabs=1e-15, epsrel=1e-12)
    A = 1.0 / math.sqrt(norm2)
    f, f1, f2 = _hermite_function(mu, n, grid.nodes)
    return ScalarField(grid, A * f.astype(complex), A * f1.astype(complex), A * f2.astype(complex))


def oscillator_residual(mu: float, E: float, phi: ScalarField) -> np.ndarray:
    """-phi'' + mu^2 x^2 phi - E^2 phi."""
    x = phi.grid.nodes
    return -phi.d2() + (mu * x) ** 2 * phi.values - E * E * phi.values


def numeric_energies(mu: float, grid: Grid, k: int = 4) -> Spectrum:
    """Lowest ``k`` energies of -d^2/dx^2 + mu^2 x^2 on [0, x_hi] with Dirichlet walls.

    The returned spectrum holds E = +sqrt(lambda); residuals refer to the
    underlying eigenproblem in lambda.
    """
    if grid.x_lo != 0.0:
        raise PreconditionError("the half-line problem needs a grid starting at x = 0")
    if grid.x_hi < 10.0 / math.sqrt(mu):
        raise PreconditionError(f"x_hi={grid.x_hi} too short; need x_hi >= 10/sqrt(mu)")
    p = MassProfile.linear(mu, grid.x_hi)
    spec = eigen_solve(reduced_operator(p, grid, Boundary.DIRICHLET), k=k)
    spec.eigenvalues = np.sqrt(spec.eigenvalues.real).astype(complex)
    return spec
