"""Complex electric potentials and the effective potential of the reduced equation.

The central object is the potential V = i m'/(2m). Substituted into the
general effective potential it cancels every derivative term and every
energy-dependent term, leaving V_eff = m^2.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .discretization import Grid
from .errors import PreconditionError, SingularityError
from .profiles import MassProfile

__all__ = [
    "PotentialFunction",
    "ComplexPotentialSamples",
    "EffectivePotential",
    "schrodingerizing_function",
    "schrodingerizing_potential",
    "sampled_potential",
    "effective_potential_general",
    "effective_potential_reduced",
    "singular_nodes",
    "potential_csv",
]

SINGULAR_RATIO = 1e-12


@dataclass(frozen=True)
class PotentialFunction:
    """A potential V(x) with an optional closed-form derivative."""

    value: Callable
    derivative: Optional[Callable] = None
    name: str = ""

    def __call__(self, x):
        return np.asarray(self.value(x), dtype=complex)


@dataclass(frozen=True, eq=False)
class ComplexPotentialSamples:
    """Potential values on every grid node.

    ``derivative`` holds V' when known in closed form. Nodes listed in
    ``excluded`` were dropped by the singularity guard and carry NaN.
    """

    grid: Grid
    values: np.ndarray
    derivative: Optional[np.ndarray] = None
    excluded: tuple = ()
    function: Optional[PotentialFunction] = None

    def __post_init__(self):
        if len(self.values) != self.grid.n:
            raise PreconditionError(f"{len(self.values)} samples on a grid of {self.grid.n} nodes")
        ok = np.ones(self.grid.n, bool)
        ok[list(self.excluded)] = False
        ok[[0, -1]] = False
        if not np.all(np.isfinite(self.values[ok])):
            raise PreconditionError("potential samples are not finite at interior nodes")

    def derivative_values(self) -> tuple[np.ndarray, str]:
        """V' on the grid and where it came from (closed form or finite differences)."""
        if self.derivative is not None:
            return self.derivative, "closed_form"
        return np.gradient(self.values, self.grid.h, edge_order=2), "finite_difference"


@dataclass(frozen=True, eq=False)
class EffectivePotential:
    """Effective-potential samples plus provenance of the V' term."""

    values: np.ndarray
    derivative_source: str
    excluded: tuple = ()

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, item):
        return self.values[item]


def singular_nodes(p: MassProfile, x) -> np.ndarray:
    """Indices where m(x) < 1e-12 max|m| (treated as m = 0)."""
    m = np.abs(p.mass(x))
    return np.flatnonzero(m < SINGULAR_RATIO * m.max())


def _guard(p: MassProfile, grid: Grid, exclude_singular: bool):
    bad = singular_nodes(p, grid.nodes)
    if bad.size and not exclude_singular:
        raise SingularityError(
            f"mass vanishes at node(s) {bad.tolist()} (x={grid.nodes[bad].tolist()})",
            nodes=bad,
            positions=grid.nodes[bad],
        )
    return bad


def schrodingerizing_function(p: MassProfile) -> PotentialFunction:
    """V(x) = i m'/(2m) and V'(x) = i (m'' m - m'^2)/(2 m^2) as callables."""

    def v(x):
        return 0.5j * p.dmass(x) / p.mass(x)

    def dv(x):
        m, dm, d2m = p.mass(x), p.dmass(x), p.d2mass(x)
        return 0.5j * (d2m * m - dm * dm) / (m * m)

    return PotentialFunction(v, dv, name="i m'/(2m)")


def _sample(fn: PotentialFunction, grid: Grid, bad=()) -> ComplexPotentialSamples:
    x = grid.nodes
    keep = np.ones(grid.n, bool)
    keep[list(bad)] = False
    vals = np.full(grid.n, np.nan + 0j)
    vals[keep] = fn(x[keep])
    der = None
    if fn.derivative is not None:
        der = np.full(grid.n, np.nan + 0j)
        der[keep] = np.asarray(fn.derivative(x[keep]), dtype=complex)
    return ComplexPotentialSamples(grid, vals, der, tuple(int(i) for i in bad), fn)


def schrodingerizing_potential(
    p: MassProfile, grid: Grid, exclude_singular: bool = False
) -> ComplexPotentialSamples:
    """Sample V = i m'/(2m) on ``grid``; purely imaginary.

    A node where the mass vanishes raises :class:`SingularityError`, unless
    ``exclude_singular`` is set, in which case it is reported in
    ``excluded`` and filled with NaN.
    """
    bad = _guard(p, grid, exclude_singular)
    return _sample(schrodingerizing_function(p), grid, bad)


def sampled_potential(grid: Grid, fn: Callable, derivative: Optional[Callable] = None, name: str = "") -> ComplexPotentialSamples:
    """Samples of an arbitrary potential, e.g. zero or i sech(x)."""
    return _sample(PotentialFunction(fn, derivative, name), grid)


def effective_potential_general(
    p: MassProfile, V: ComplexPotentialSamples, E: complex, grid: Optional[Grid] = None
) -> EffectivePotential:
    """Energy-dependent effective potential of the a = 1/2 reduced equation.

    m^2 + 3/4 (m'/m)^2 - 1/2 m''/m + (2V - i m'/m) E - V^2 - i V' + i (m'/m) V,
    evaluated nodewise. Uses the closed-form V' carried by ``V`` when present.
    """
    if grid is not None and grid != V.grid:
        raise PreconditionError("potential samples live on a different grid")
    grid = V.grid
    bad = set(V.excluded) | set(_guard(p, grid, exclude_singular=True).tolist())
    if bad - set(V.excluded):
        raise SingularityError(
            f"mass vanishes at node(s) {sorted(bad - set(V.excluded))}",
            nodes=sorted(bad - set(V.excluded)),
            positions=grid.nodes[sorted(bad - set(V.excluded))],
        )
    dV, source = V.derivative_values()
    keep = np.ones(grid.n, bool)
    keep[list(bad)] = False
    x = grid.nodes[keep]
    m, dm, d2m = p.mass(x), p.dmass(x), p.d2mass(x)
    L = dm / m
    v, dv = V.values[keep], dV[keep]
    out = np.full(grid.n, np.nan + 0j)
    out[keep] = (
        m * m + 0.75 * L * L - 0.5 * d2m / m + (2 * v - 1j * L) * E - v * v - 1j * dv + 1j * L * v
    )
    return EffectivePotential(out, source, tuple(sorted(bad)))


def effective_potential_reduced(p: MassProfile, grid: Grid) -> np.ndarray:
    """V_eff = m(x)^2, real and nonnegative."""
    m = p.mass(grid.nodes)
    return m * m


def potential_csv(p: MassProfile, grid: Grid, E: float = 0.0) -> str:
    """CSV with columns x, Re V, Im V, Re V_eff, Im V_eff for V = i m'/(2m)."""
    V = schrodingerizing_potential(p, grid, exclude_singular=True)
    veff = effective_potential_general(p, V, E).values
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x [length]", "Re V [energy]", "Im V [energy]", "Re V_eff [energy^2]", "Im V_eff [energy^2]"])
    for x, v, ve in zip(grid.nodes, V.values, veff):
        w.writerow([f"{x:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}", f"{ve.real:.17g}", f"{ve.imag:.17g}"])
    return buf.getvalue()
