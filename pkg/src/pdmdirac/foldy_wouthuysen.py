"""von Roos kinetic operators and the Foldy-Wouthuysen generator for a position-dependent mass.

All operators act on the unknowns of a grid with p = -i d/dx discretized by
the central first-difference stencil. Products of non-commuting factors are
formed as sparse matrix products in the written order, so operator
identities can be compared entry by entry.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .dirac_system import REPRESENTATION
from .discretization import (
    BandedComplexOperator,
    Boundary,
    Grid,
    diagonal_operator,
    first_derivative_operator,
    spinor_operator,
)
from .errors import PreconditionError, SingularityError
from .potentials import singular_nodes
from .profiles import MassProfile, ProfileKind

__all__ = [
    "OrderingParams",
    "TABLE1",
    "momentum_operator",
    "von_roos_keo",
    "li_kuhn_keo",
    "s_operator",
    "beta_mass_operator",
    "alpha_p_operator",
    "CommutatorReport",
    "commutator_checks",
    "mass_scale_sweep",
    "nonrelativistic_hamiltonian",
]


@dataclass(frozen=True)
class OrderingParams:
    """Exponents of m^alpha p m^beta p m^gamma; they must sum to -1."""

    alpha: float
    beta: float
    gamma: float
    name: str = ""

    def __post_init__(self):
        total = self.alpha + self.beta + self.gamma
        if abs(total + 1.0) > 1e-12:
            raise PreconditionError(f"ordering exponents sum to {total}, expected -1")

    def swapped(self) -> "OrderingParams":
        return OrderingParams(self.gamma, self.beta, self.alpha, self.name)


TABLE1 = {
    "BenDaniel-Duke": OrderingParams(0.0, -1.0, 0.0, "BenDaniel-Duke"),
    "Gora-Williams": OrderingParams(-1.0, 0.0, 0.0, "Gora-Williams"),
    "Zhu-Kroemer": OrderingParams(-0.5, 0.0, -0.5, "Zhu-Kroemer"),
    "Li-Kuhn": OrderingParams(0.0, -0.5, -0.5, "Li-Kuhn"),
}


def _positive_mass(p: MassProfile, grid: Grid, boundary: Boundary) -> np.ndarray:
    x = grid.unknowns(boundary)
    m = np.asarray(p.mass(x), dtype=float)
    bad = singular_nodes(p, x)
    if bad.size or np.any(m <= 0):
        bad = np.union1d(bad, np.flatnonzero(m <= 0))
        raise SingularityError(f"mass is not positive at unknown node(s) {bad.tolist()}", nodes=bad, positions=x[bad])
    return m


def momentum_operator(grid: Grid, boundary=Boundary.DIRICHLET) -> BandedComplexOperator:
    """p = -i d/dx."""
    return -1j * first_derivative_operator(grid, boundary)


def von_roos_keo(p: MassProfile, ordering: OrderingParams, grid: Grid, boundary=Boundary.DIRICHLET) -> BandedComplexOperator:
    """(1/4) [m^a p m^b p m^c + m^c p m^b p m^a] for ordering (a, b, c)."""
    boundary = Boundary(boundary)
    m = _positive_mass(p, grid, boundary)
    P = momentum_operator(grid, boundary)

    def power(e):
        return diagonal_operator(m**e, grid, boundary)

    Ma, Mb, Mc = power(ordering.alpha), power(ordering.beta), power(ordering.gamma)
    return 0.25 * (Ma @ P @ Mb @ P @ Mc + Mc @ P @ Mb @ P @ Ma)


def li_kuhn_keo(p: MassProfile, grid: Grid, boundary=Boundary.DIRICHLET) -> BandedComplexOperator:
    """Li-Kuhn kinetic operator written out band by band.

    With u = m^(-1/2) on the unknowns (zero beyond Dirichlet walls, wrapped
    on a periodic grid), (1/4)(u p u p + p u p u) has only the diagonal and
    the offsets +-2:

        K[j, j]     =  2 u_j (u_{j-1} + u_{j+1}) / (16 h^2)
        K[j, j+-2]  = -(u_j u_{j+-1} + u_{j+-1} u_{j+-2}) / (16 h^2)
    """
    boundary = Boundary(boundary)
    m = _positive_mass(p, grid, boundary)
    u = m**-0.5
    N = len(u)
    periodic = boundary is Boundary.PERIODIC
    if periodic:
        def at(k):
            return np.roll(u, -k)
    else:
        padded = np.concatenate([np.zeros(2), u, np.zeros(2)])

        def at(k):
            return padded[2 + k:2 + k + N]

    c = 1.0 / (16.0 * grid.h**2)
    diag = 2.0 * u * (at(-1) + at(1)) * c
    up = -(u * at(1) + at(1) * at(2)) * c
    down = -(u * at(-1) + at(-1) * at(-2)) * c
    rows, cols, vals = [np.arange(N)], [np.arange(N)], [diag]
    j = np.arange(N)
    for shift, band in ((2, up), (-2, down)):
        k = j + shift
        keep = slice(None) if periodic else (k >= 0) & (k < N)
        rows.append(j[keep])
        cols.append(k[keep] % N)
        vals.append(band[keep])
    mat = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
    return BandedComplexOperator(grid, mat.tocsr(), boundary)


def nonrelativistic_hamiltonian(p: MassProfile, V_real, grid: Grid, boundary=Boundary.DIRICHLET) -> BandedComplexOperator:
    """Li-Kuhn kinetic operator plus a real potential on the diagonal."""
    boundary = Boundary(boundary)
    V = np.asarray(V_real)
    if np.iscomplexobj(V):
        if np.any(V.imag != 0):
            raise PreconditionError("the non-relativistic potential must be real")
        V = V.real
    if V.ndim == 0:
        V = np.full(grid.n_unknowns(boundary), float(V))
    return li_kuhn_keo(p, grid, boundary) + diagonal_operator(V, grid, boundary)


# -- FW generator and commutators --------------------------------------------------


def _spinor(mat2x2: np.ndarray, scalar: BandedComplexOperator) -> BandedComplexOperator:
    return spinor_operator([[None if mat2x2[i, j] == 0 else complex(mat2x2[i, j]) * scalar for j in range(2)] for i in range(2)])


def s_operator(p: MassProfile, grid: Grid, boundary=Boundary.DIRICHLET) -> BandedComplexOperator:
    """S = -(i/2) m^(-1/2) beta alpha p m^(-1/2).

    With p = -i D this is -(1/2) beta alpha (x) (m^(-1/2) D m^(-1/2)):
    zero diagonal blocks and off-diagonal blocks +-(1/(2m)) d/dx - m'/(4 m^2)
    in the continuum. The matrix is Hermitian because D is real and
    antisymmetric while beta alpha is real and antisymmetric.
    """
    boundary = Boundary(boundary)
    m = _positive_mass(p, grid, boundary)
    U = diagonal_operator(m**-0.5, grid, boundary)
    D = first_derivative_operator(grid, boundary)
    ba = REPRESENTATION.beta @ REPRESENTATION.alpha
    return _spinor(-0.5 * ba, U @ D @ U)


def beta_mass_operator(p: MassProfile, grid: Grid, boundary=Boundary.DIRICHLET) -> BandedComplexOperator:
    boundary = Boundary(boundary)
    m = _positive_mass(p, grid, boundary)
    return _spinor(REPRESENTATION.beta, diagonal_operator(m, grid, boundary))


def alpha_p_operator(grid: Grid, boundary=Boundary.DIRICHLET) -> BandedComplexOperator:
    return _spinor(REPRESENTATION.alpha, momentum_operator(grid, boundary))


def _window_indices(grid: Grid, boundary: Boundary, window, reach: int = 4) -> np.ndarray:
    lo, hi = window
    if not hi > lo:
        raise PreconditionError(f"window {window} is empty")
    x = grid.unknowns(boundary)
    idx = np.flatnonzero((x >= lo) & (x <= hi))
    if idx.size < 5:
        raise PreconditionError(f"window {window} holds {idx.size} nodes; need at least 5")
    if boundary is Boundary.DIRICHLET and (idx[0] < reach or idx[-1] > len(x) - 1 - reach):
        raise PreconditionError(f"window {window} comes within {reach} nodes of the boundary")
    return idx


def _window_norm(op: BandedComplexOperator, idx: np.ndarray) -> float:
    """Largest entry magnitude among rows and columns inside the window."""
    N = op.n_unknowns
    sel = np.concatenate([idx + b * N for b in range(op.block_size)])
    sub = op.matrix[sel][:, sel]
    return float(np.abs(sub.data).max()) if sub.nnz else 0.0


def _even_odd(op: BandedComplexOperator, beta: BandedComplexOperator):
    flipped = beta @ op @ beta
    return 0.5 * (op + flipped), 0.5 * (op - flipped)


@dataclass
class CommutatorReport:
    """Relative window-restricted deviations of the FW commutator identities.

    ``c1_deviation``: |i [S, beta m] + alpha p| / |alpha p|.
    ``c2_deviation``: |-(1/2)[S,[S, beta m]] + K beta| / |K beta|, with K the Li-Kuhn
    kinetic operator (the sign produced by the algebra).
    ``c2_plus_sign_deviation``: the same against +K beta, kept for comparison.
    ``full_even_deviation`` and ``full_odd_residual`` refer to the transformed
    H' = H + i[S,H] - (1/2)[S,[S,H]] with H = beta m + alpha p: the distance of
    its even part from beta (m + K) and the size of its odd part, both
    relative to |alpha p|.
    """

    c1_deviation: float
    c2_deviation: float
    c2_plus_sign_deviation: float
    full_even_deviation: float
    full_odd_residual: float
    window: tuple
    h: float
    n_window: int
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "c1_deviation": self.c1_deviation,
            "c2_deviation": self.c2_deviation,
            "c2_plus_sign_deviation": self.c2_plus_sign_deviation,
            "full_even_deviation": self.full_even_deviation,
            "full_odd_residual": self.full_odd_residual,
            "window": list(self.window),
            "h": self.h,
            "n_window": self.n_window,
            **self.meta,
        }


def commutator_checks(p: MassProfile, grid: Grid, window=(-2.0, 2.0), boundary=Boundary.DIRICHLET) -> CommutatorReport:
    """Compare C1 = [S, beta m] and C2 = -(1/2)[S,[S, beta m]] with their FW targets."""
    boundary = Boundary(boundary)
    idx = _window_indices(grid, boundary, window)
    S = s_operator(p, grid, boundary)
    Bm = beta_mass_operator(p, grid, boundary)
    Ap = alpha_p_operator(grid, boundary)
    K = li_kuhn_keo(p, grid, boundary)
    Kb = _spinor(REPRESENTATION.beta, K)
    beta = _spinor(REPRESENTATION.beta, diagonal_operator(np.ones(grid.n_unknowns(boundary)), grid, boundary))

    C1 = S.commutator(Bm)
    C2 = -0.5 * S.commutator(C1)
    ap_norm = _window_norm(Ap, idx)
    kb_norm = _window_norm(Kb, idx)
    c1 = _window_norm(1j * C1 + Ap, idx) / ap_norm
    c2 = _window_norm(C2 + Kb, idx) / kb_norm
    c2_plus = _window_norm(C2 - Kb, idx) / kb_norm

    H = Bm + Ap
    C1h = S.commutator(H)
    Hp = H + 1j * C1h - 0.5 * S.commutator(C1h)
    even, odd = _even_odd(Hp, beta)
    full_even = _window_norm(even - Bm - Kb, idx) / ap_norm
    full_odd = _window_norm(odd, idx) / ap_norm
    return CommutatorReport(c1, c2, c2_plus, full_even, full_odd, tuple(float(w) for w in window), grid.h, int(idx.size))


def _scaled(p: MassProfile, factor: float) -> MassProfile:
    if p.kind is ProfileKind.HYPERBOLIC:
        return MassProfile.hyperbolic(p.m0 * factor, p.a, p.x_lo, p.x_hi)
    if p.kind is ProfileKind.LINEAR:
        return MassProfile.linear(p.mu * factor, p.x_hi)
    m, dm, d2m = p.funcs
    return MassProfile.custom(
        lambda x: factor * m(x), lambda x: factor * dm(x), lambda x: factor * d2m(x),
        p.domain, label=f"{factor}*{p.label}", validate=False,
    )


def mass_scale_sweep(p: MassProfile, grid: Grid, window=(-2.0, 2.0), factors=(1, 2, 4, 8), boundary=Boundary.DIRICHLET) -> list[dict]:
    """commutator_checks for the profile with its mass scaled by each factor."""
    rows = []
    for f in factors:
        q = _scaled(p, float(f))
        rep = commutator_checks(q, grid, window, boundary)
        rows.append({"factor": float(f), "mass_scale": _mass_scale(q), **rep.to_dict()})
    return rows


def _mass_scale(p: MassProfile) -> float:
    if p.kind is ProfileKind.HYPERBOLIC:
        return p.m0
    if p.kind is ProfileKind.LINEAR:
        return p.mu
    return float(np.max(p.mass(np.linspace(*p.domain, 101))))
