"""Coupled 1+1D Dirac operator with position-dependent mass.

The stationary problem reads

    [[-i d/dx + V, m], [m, i d/dx + V]] (phi1, phi2) = E (phi1, phi2)

in the representation gamma0 = sigma_x, gamma1 = -i sigma_y. Eliminating
phi2 gives a second-order equation for phi1; the substitution
phi1 = sqrt(m) phi turns it into a Schrodinger-type equation, which for
V = i m'/(2m) is simply -phi'' + m^2 phi = E^2 phi.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .discretization import (
    BandedComplexOperator,
    Boundary,
    Grid,
    Spectrum,
    Trajectory,
    diagonal_operator,
    eigen_solve,
    first_derivative_operator,
    integrate_ivp,
    second_derivative_operator,
    spinor_operator,
)
from .errors import PreconditionError, SingularityError
from .potentials import (
    ComplexPotentialSamples,
    PotentialFunction,
    effective_potential_general,
    schrodingerizing_potential,
    singular_nodes,
)
from .profiles import MassProfile, ProfileKind

__all__ = [
    "DiracRepresentation",
    "ScalarField",
    "SpinorField",
    "fd_derivative",
    "fd_second_derivative",
    "build_coupled_operator",
    "coupled_operator_from_samples",
    "linear_odd_extension",
    "reduced_operator",
    "decoupled_phi1_residual",
    "reduced_equation_residual",
    "similarity_transform",
    "reconstruct_phi2",
    "coupled_residuals",
    "integrate_coupled",
    "integrate_decoupled",
    "PTReport",
    "pt_symmetry_check",
    "discrete_decoupling_residual",
]


@dataclass(frozen=True)
class DiracRepresentation:
    gamma0: np.ndarray = field(default_factory=lambda: np.array([[0, 1], [1, 0]], dtype=complex))
    gamma1: np.ndarray = field(default_factory=lambda: np.array([[0, -1], [1, 0]], dtype=complex))

    @property
    def alpha(self) -> np.ndarray:
        return self.gamma0 @ self.gamma1

    @property
    def beta(self) -> np.ndarray:
        return self.gamma0

    def identity_defects(self) -> dict:
        """Max-abs defects of the representation identities (all exactly zero)."""
        I = np.eye(2)
        a, b = self.alpha, self.beta
        return {
            "gamma0^2 - I": float(np.abs(self.gamma0 @ self.gamma0 - I).max()),
            "gamma1^2 + I": float(np.abs(self.gamma1 @ self.gamma1 + I).max()),
            "{alpha, beta}": float(np.abs(a @ b + b @ a).max()),
            "alpha - diag(1,-1)": float(np.abs(a - np.diag([1, -1])).max()),
        }


REPRESENTATION = DiracRepresentation()
SIGMA3 = np.diag([1.0, -1.0])


# -- fields ----------------------------------------------------------------------


def fd_derivative(f: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central first derivative; NaN on the two outermost nodes at each end."""
    f = np.asarray(f)
    out = np.full(f.shape, np.nan, dtype=np.result_type(f, float))
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    return out


def fd_second_derivative(f: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central second derivative; NaN near the ends."""
    f = np.asarray(f)
    out = np.full(f.shape, np.nan, dtype=np.result_type(f, float))
    out[2:-2] = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h * h)
    return out


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Complex samples on every node of ``grid``, optionally with known derivatives."""

    grid: Grid
    values: np.ndarray
    derivative: Optional[np.ndarray] = None
    second_derivative: Optional[np.ndarray] = None
    excluded: tuple = ()

    def __post_init__(self):
        for arr in (self.values, self.derivative, self.second_derivative):
            if arr is not None and len(arr) != self.grid.n:
                raise PreconditionError(f"field of length {len(arr)} on a grid of {self.grid.n} nodes")

    def d1(self) -> np.ndarray:
        if self.derivative is not None:
            return self.derivative
        return fd_derivative(self.values, self.grid.h)

    def d2(self) -> np.ndarray:
        if self.second_derivative is not None:
            return self.second_derivative
        if self.derivative is not None:
            return fd_derivative(self.derivative, self.grid.h)
        return fd_second_derivative(self.values, self.grid.h)


@dataclass(frozen=True, eq=False)
class SpinorField:
    grid: Grid
    phi1: ScalarField
    phi2: ScalarField

    def __post_init__(self):
        if self.phi1.grid != self.grid or self.phi2.grid != self.grid:
            raise PreconditionError("spinor components live on different grids")


# -- operators ------------------------------------------------------------------


def _unknown_samples(values: np.ndarray, grid: Grid, boundary: Boundary) -> np.ndarray:
    values = np.asarray(values)
    if len(values) != grid.n:
        raise PreconditionError(f"{len(values)} samples on a grid of {grid.n} nodes")
    return values[1:-1] if Boundary(boundary) is Boundary.DIRICHLET else values


def coupled_operator_from_samples(m_values, V_values, grid: Grid, boundary=Boundary.DIRICHLET) -> BandedComplexOperator:
    """Pointwise assembly [[-iD + V, m], [m, iD + V]] from nodal samples."""
    boundary = Boundary(boundary)
    D = first_derivative_operator(grid, boundary)
    M = diagonal_operator(_unknown_samples(m_values, grid, boundary), grid, boundary)
    Vd = diagonal_operator(_unknown_samples(V_values, grid, boundary), grid, boundary)
    return spinor_operator([[-1j * D + Vd, M], [M, 1j * D + Vd]])


def build_coupled_operator(
    p: MassProfile,
    V: ComplexPotentialSamples,
    grid: Optional[Grid] = None,
    boundary=Boundary.DIRICHLET,
    form: str = "pointwise",
) -> BandedComplexOperator:
    """Discretize the coupled Dirac operator as a 2n x 2n block operator.

    Parameters
    ----------
    form : {"pointwise", "gauge"}
        ``pointwise`` adds the potential samples on the diagonal of both
        blocks. ``gauge`` splits V = i m'/(2m) + W and represents the first
        part exactly through the conjugated stencils -i sqrt(m) D m^(-1/2)
        and i m^(-1/2) D sqrt(m), adding only the remainder W on the
        diagonal. Both share the same continuum limit; the gauge form is
        similar, at the matrix level, to [[-iD, 1], [m^2, iD]], whose
        eigenvalues are +-sqrt(eig(-D^2 + m^2)).
    """
    grid = V.grid if grid is None else grid
    if grid != V.grid:
        raise PreconditionError("potential samples live on a different grid")
    boundary = Boundary(boundary)
    x = grid.unknowns(boundary)
    bad = singular_nodes(p, x)
    if bad.size:
        raise SingularityError(f"mass vanishes at unknown node(s) {bad.tolist()}", nodes=bad, positions=x[bad])
    if form == "pointwise":
        return coupled_operator_from_samples(p.mass(grid.nodes), V.values, grid, boundary)
    if form != "gauge":
        raise ValueError(f"unknown form {form!r}")
    m = p.mass(x)
    V_schr = schrodingerizing_potential(p, grid, exclude_singular=True)
    W = _unknown_samples(V.values - V_schr.values, grid, boundary)
    D = first_derivative_operator(grid, boundary)
    root = diagonal_operator(np.sqrt(m), grid, boundary)
    inv_root = diagonal_operator(1.0 / np.sqrt(m), grid, boundary)
    M = diagonal_operator(m, grid, boundary)
    Wd = diagonal_operator(W, grid, boundary)
    return spinor_operator([
        [-1j * (root @ D @ inv_root) + Wd, M],
        [M, 1j * (inv_root @ D @ root) + Wd],
    ])


def linear_odd_extension(p: MassProfile, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Mass and potential samples of the odd extension m(x) = mu x on a symmetric grid.

    Used only for the parity bookkeeping of the half-line problem; the grid
    must avoid x = 0 (take an even node count).
    """
    if p.kind is not ProfileKind.LINEAR:
        raise PreconditionError("odd extension is defined for the linear profile")
    if not grid.is_symmetric:
        raise PreconditionError("odd extension needs a grid symmetric about x = 0")
    x = grid.nodes
    if np.any(x == 0.0):
        raise SingularityError("symmetric grid contains x = 0; use an even node count", nodes=np.flatnonzero(x == 0.0), positions=[0.0])
    m = p.mu * x
    V = 0.5j / x
    return m, V


def reduced_operator(p: MassProfile, grid: Grid, boundary=Boundary.DIRICHLET) -> BandedComplexOperator:
    """-d^2/dx^2 + m(x)^2 on the unknowns of ``grid``."""
    boundary = Boundary(boundary)
    m = p.mass(grid.unknowns(boundary))
    return second_derivative_operator(grid, boundary) + diagonal_operator(m * m, grid, boundary)


# -- equations in residual form -------------------------------------------------------


def _profile_terms(p: MassProfile, grid: Grid, extra_bad=()):
    x = grid.nodes
    bad = set(singular_nodes(p, x).tolist()) | set(extra_bad)
    keep = np.ones(grid.n, bool)
    keep[list(bad)] = False
    m = np.full(grid.n, np.nan)
    dm = np.full(grid.n, np.nan)
    d2m = np.full(grid.n, np.nan)
    m[keep], dm[keep], d2m[keep] = p.mass(x[keep]), p.dmass(x[keep]), p.d2mass(x[keep])
    return m, dm, d2m, tuple(sorted(bad))


def decoupled_phi1_residual(p: MassProfile, V: ComplexPotentialSamples, E: complex, phi1: ScalarField) -> np.ndarray:
    """Nodewise residual of the second-order equation for phi1.

    -phi1'' + (m'/m) phi1' + [2EV - V^2 - iV' - i(m'/m)(E - V)] phi1 - (E^2 - m^2) phi1.
    Missing derivatives are taken from fourth-order finite differences, so
    the outermost nodes carry NaN; singular nodes raise.
    """
    if phi1.grid != V.grid:
        raise PreconditionError("field and potential live on different grids")
    bad = singular_nodes(p, V.grid.nodes)
    if bad.size:
        raise SingularityError(f"mass vanishes at node(s) {bad.tolist()}", nodes=bad, positions=V.grid.nodes[bad])
    m, dm, _, _ = _profile_terms(p, V.grid)
    L = dm / m
    v = V.values
    dv, _ = V.derivative_values()
    f, f1, f2 = phi1.values, phi1.d1(), phi1.d2()
    coeff = 2 * E * v - v * v - 1j * dv - 1j * L * (E - v)
    return -f2 + L * f1 + coeff * f - (E * E - m * m) * f


def reduced_equation_residual(p: MassProfile, V: ComplexPotentialSamples, E: complex, phi: ScalarField) -> np.ndarray:
    """Residual -phi'' + V_eff(E) phi - E^2 phi of the a = 1/2 transformed equation."""
    veff = effective_potential_general(p, V, E).values
    return -phi.d2() + veff * phi.values - E * E * phi.values


def similarity_transform(p: MassProfile, field: ScalarField, direction: str = "forward") -> ScalarField:
    """phi = m^(-1/2) phi1 (forward) or phi1 = m^(1/2) phi (inverse).

    Known derivatives are carried through the product rule with the
    closed-form mass derivatives. Nodes with vanishing mass are excluded
    (NaN) and listed in ``excluded``.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError(f"direction must be 'forward' or 'inverse', not {direction!r}")
    m, dm, d2m, bad = _profile_terms(p, field.grid, field.excluded)
    L = dm / m
    if direction == "forward":
        w = 1.0 / np.sqrt(m)
        w1 = -0.5 * L * w
        w2 = w * (0.75 * L * L - 0.5 * d2m / m)
    else:
        w = np.sqrt(m)
        w1 = 0.5 * L * w
        w2 = w * (0.5 * d2m / m - 0.25 * L * L)
    f = field.values
    d1 = d2 = None
    if field.derivative is not None:
        d1 = w1 * f + w * field.derivative
        if field.second_derivative is not None:
            d2 = w2 * f + 2 * w1 * field.derivative + w * field.second_derivative
    return ScalarField(field.grid, w * f, d1, d2, bad)


def reconstruct_phi2(p: MassProfile, V: ComplexPotentialSamples, E: complex, phi1: ScalarField) -> ScalarField:
    """phi2 = ((E - V) phi1 + i phi1') / m, with phi2' when phi1'' is available."""
    if phi1.grid != V.grid:
        raise PreconditionError("field and potential live on different grids")
    bad = singular_nodes(p, V.grid.nodes)
    if bad.size:
        raise SingularityError(f"mass vanishes at node(s) {bad.tolist()}", nodes=bad, positions=V.grid.nodes[bad])
    m, dm, _, _ = _profile_terms(p, V.grid)
    v = V.values
    dv, _ = V.derivative_values()
    f, f1 = phi1.values, phi1.d1()
    g = (E - v) * f + 1j * f1
    phi2 = g / m
    d_phi2 = None
    if phi1.derivative is not None:
        g1 = -dv * f + (E - v) * f1 + 1j * phi1.d2()
        d_phi2 = g1 / m - dm * g / (m * m)
    return ScalarField(V.grid, phi2, d_phi2)


def coupled_residuals(p: MassProfile, V: ComplexPotentialSamples, E: complex, psi: SpinorField):
    """Residuals of the two first-order equations:

    r1 = -i phi1' + m phi2 - (E - V) phi1
    r2 =  i phi2' + m phi1 - (E - V) phi2
    """
    m = p.mass(psi.grid.nodes)
    v = V.values
    f, g = psi.phi1, psi.phi2
    r1 = -1j * f.d1() + m * g.values - (E - v) * f.values
    r2 = 1j * g.d1() + m * f.values - (E - v) * g.values
    return r1, r2


# -- ODE forms --------------------------------------------------------------------


def integrate_coupled(
    p: MassProfile, V: PotentialFunction, E: complex, x_span, phi0, tol: float = 1e-12, x_eval=None
) -> Trajectory:
    """Integrate the first-order pair from phi0 = (phi1, phi2) at x_span[0]."""

    def rhs(x, y):
        m, v = p.mass(x), V(x)
        return np.array([1j * ((E - v) * y[0] - m * y[1]), -1j * ((E - v) * y[1] - m * y[0])])

    return integrate_ivp(rhs, phi0, x_span, tol=tol, x_eval=x_eval)


def integrate_decoupled(
    p: MassProfile, V: PotentialFunction, E: complex, x_span, y0, tol: float = 1e-12, x_eval=None
) -> Trajectory:
    """Integrate the second-order phi1 equation; state is (phi1, phi1')."""
    if V.derivative is None:
        raise PreconditionError("decoupled integration needs the closed-form V'")

    def rhs(x, y):
        m, dm = p.mass(x), p.dmass(x)
        L = dm / m
        v, dv = V(x), complex(V.derivative(x))
        coeff = 2 * E * v - v * v - 1j * dv - 1j * L * (E - v)
        return np.array([y[1], L * y[1] + coeff * y[0] - (E * E - m * m) * y[0]])

    return integrate_ivp(rhs, y0, x_span, tol=tol, x_eval=x_eval)


# -- PT symmetry -----------------------------------------------------------------------


@dataclass
class PTReport:
    delta: float
    gamma: str
    n_eigenvalues: int = 0
    n_real: int = 0
    n_conjugate_pairs: int = 0
    n_complex: int = 0
    max_im_eig: float = 0.0
    conjugation_defect: float = 0.0
    spectrum: Optional[Spectrum] = field(default=None, repr=False)

    @property
    def real_fraction(self) -> float:
        return self.n_real / max(self.n_eigenvalues, 1)

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "gamma": self.gamma,
            "n_eigenvalues": self.n_eigenvalues,
            "n_real": self.n_real,
            "n_conjugate_pairs": self.n_conjugate_pairs,
            "n_complex": self.n_complex,
            "max_im_eig": self.max_im_eig,
            "conjugation_defect": self.conjugation_defect,
        }


def _parity_matrix(H: BandedComplexOperator, gamma: str) -> sp.csr_matrix:
    N = H.n_unknowns
    flip = sp.csr_matrix((np.ones(N), (np.arange(N), np.arange(N)[::-1])), shape=(N, N))
    if gamma == "identity":
        G = np.eye(H.block_size)
    elif gamma == "sigma3":
        if H.block_size != 2:
            raise PreconditionError("sigma3 involution needs a spinor operator")
        G = SIGMA3
    else:
        raise ValueError(f"unknown spinor involution {gamma!r}")
    return sp.kron(sp.csr_matrix(G), flip, format="csr")


def pt_symmetry_check(
    H: BandedComplexOperator, gamma: str = "identity", spectrum: bool = True, tol_real: float = 1e-8
) -> PTReport:
    """Matrix-level PT test: Delta = max |Pi Gamma conj(H) Gamma Pi - H|.

    Pi reverses node order (x -> -x), Gamma is the spinor involution
    (``identity`` or ``sigma3``) and conj is elementwise. With
    ``spectrum`` the full spectrum is computed and summarized.
    """
    if not H.grid.is_symmetric:
        raise PreconditionError("PT check needs a grid symmetric about x = 0")
    P = _parity_matrix(H, gamma)
    A = H.matrix
    diff = (P @ A.conj() @ P - A).tocoo()
    delta = float(np.max(np.abs(diff.data))) if diff.nnz else 0.0
    report = PTReport(delta=delta, gamma=gamma)
    if spectrum:
        spec = eigen_solve(H, tol_real=tol_real)
        report.spectrum = spec
        report.n_eigenvalues = len(spec)
        report.n_real = spec.n_real
        report.n_conjugate_pairs = spec.n_conjugate_pairs
        report.n_complex = sum(c == "complex" for c in spec.classification)
        report.max_im_eig = spec.max_im
        report.conjugation_defect = spec.conjugation_defect()
    return report


# -- discrete decoupling -------------------------------------------------------------------


def discrete_decoupling_residual(
    p: MassProfile, V: ComplexPotentialSamples, E: complex, phi1, boundary=Boundary.DIRICHLET
) -> np.ndarray:
    """Matrix-level counterpart of the phi1 elimination for the pointwise operator.

    With phi2 = M^-1 (E - V + iD) phi1 taken from the first block row, the
    second row becomes (E - V - iD) M^-1 (E - V + iD) phi1 - M phi1 = 0.
    ``phi1`` holds values on the unknowns; the residual is returned there.
    """
    grid = V.grid
    boundary = Boundary(boundary)
    x = grid.unknowns(boundary)
    m = p.mass(x)
    v = _unknown_samples(V.values, grid, boundary)
    D = first_derivative_operator(grid, boundary)
    phi1 = np.asarray(phi1)
    phi2 = ((E - v) * phi1 + 1j * D.apply(phi1)) / m
    return (E - v) * phi2 - 1j * D.apply(phi2) - m * phi1
