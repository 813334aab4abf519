"""Uniform grids, banded complex operators, eigensolves and ODE integration.

Layout conventions
------------------
* ``Boundary.DIRICHLET`` operators act on the interior nodes only
  (``n - 2`` unknowns per component); the boundary values are pinned to
  zero and :meth:`BandedComplexOperator.embed` pads them back in.
* ``Boundary.PERIODIC`` operators act on all ``n`` nodes and identify
  node ``n`` with node ``0``, so the period is ``n * h``.
* Spinor operators (``block_size == 2``) are stored component-major:
  the unknown vector is ``[phi1 (all unknowns), phi2 (all unknowns)]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .errors import EigenSolveError, IntegrationError, PreconditionError

__all__ = [
    "Boundary",
    "Grid",
    "BandedComplexOperator",
    "Spectrum",
    "Trajectory",
    "diagonal_operator",
    "identity_operator",
    "second_derivative_operator",
    "first_derivative_operator",
    "spinor_operator",
    "eigen_solve",
    "classify_eigenvalues",
    "integrate_ivp",
    "MAX_DENSE_DIM",
]

# desk-scale caps for the dense path, keyed by block size
MAX_DENSE_DIM = {1: 4096, 2: 8192}


class Boundary(str, Enum):
    DIRICHLET = "dirichlet"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``n`` nodes on [x_lo, x_hi] (both ends included)."""

    x_lo: float
    x_hi: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise PreconditionError(f"grid needs n >= 3 nodes, got {self.n}")
        if not self.x_hi > self.x_lo:
            raise PreconditionError(f"grid needs x_hi > x_lo, got [{self.x_lo}, {self.x_hi}]")

    @classmethod
    def symmetric(cls, half_width: float, n: int) -> "Grid":
        return cls(-float(half_width), float(half_width), n)

    @classmethod
    def periodic(cls, x_lo: float, length: float, n: int) -> "Grid":
        """Grid whose periodic wrap reproduces a period of ``length``."""
        return cls(float(x_lo), float(x_lo) + length * (n - 1) / n, n)

    @property
    def h(self) -> float:
        return (self.x_hi - self.x_lo) / (self.n - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        x = self.x_lo + self.h * np.arange(self.n)
        x[-1] = self.x_hi
        if self.x_lo == -self.x_hi:
            # exact mirror symmetry, needed for bitwise parity checks
            x = 0.5 * (x - x[::-1])
        return x

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    @property
    def is_symmetric(self) -> bool:
        x = self.nodes
        return bool(np.array_equal(x, -x[::-1]))

    def unknowns(self, boundary: Boundary) -> np.ndarray:
        """Node positions carrying unknowns under ``boundary``."""
        return self.interior if Boundary(boundary) is Boundary.DIRICHLET else self.nodes

    def n_unknowns(self, boundary: Boundary) -> int:
        return self.n - 2 if Boundary(boundary) is Boundary.DIRICHLET else self.n


@dataclass(frozen=True, eq=False)
class BandedComplexOperator:
    """Sparse banded complex matrix tied to a grid and boundary rule."""

    grid: Grid
    matrix: sp.csr_matrix
    boundary: Boundary = Boundary.DIRICHLET
    block_size: int = 1
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        object.__setattr__(self, "matrix", sp.csr_matrix(self.matrix, dtype=complex))
        if self.block_size not in (1, 2):
            raise PreconditionError("block_size must be 1 or 2")
        d = self.dim
        if self.matrix.shape != (d, d):
            raise PreconditionError(f"matrix shape {self.matrix.shape} does not match dimension {d}")

    @property
    def n_unknowns(self) -> int:
        return self.grid.n_unknowns(self.boundary)

    @property
    def dim(self) -> int:
        return self.block_size * self.n_unknowns

    @property
    def positions(self) -> np.ndarray:
        return self.grid.unknowns(self.boundary)

    @property
    def bandwidth(self) -> int:
        """Largest stencil reach within any block, counting periodic wrap as short."""
        coo = self.matrix.tocoo()
        if coo.nnz == 0:
            return 0
        N = self.n_unknowns
        d = np.abs((coo.row % N) - (coo.col % N))
        if self.boundary is Boundary.PERIODIC:
            d = np.minimum(d, N - d)
        return int(d.max())

    @property
    def bands(self) -> dict:
        """Nonzero diagonals as {offset: values} (scalar operators only)."""
        dia = self.matrix.todia()
        return {int(k): dia.data[i] for i, k in enumerate(dia.offsets)}

    def _coerce(self, other) -> "BandedComplexOperator":
        if not isinstance(other, BandedComplexOperator):
            raise TypeError(f"cannot combine operator with {type(other).__name__}")
        if other.grid != self.grid or other.boundary != self.boundary or other.block_size != self.block_size:
            raise PreconditionError("operators live on different grids, boundaries or block sizes")
        return other

    def _new(self, matrix) -> "BandedComplexOperator":
        return BandedComplexOperator(self.grid, matrix, self.boundary, self.block_size)

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v)
        if v.shape[0] != self.dim:
            raise PreconditionError(f"vector of length {v.shape[0]} applied to operator of dimension {self.dim}")
        return self.matrix @ v

    def __matmul__(self, other):
        if isinstance(other, BandedComplexOperator):
            return self._new(self.matrix @ self._coerce(other).matrix)
        return self.apply(other)

    def __add__(self, other):
        return self._new(self.matrix + self._coerce(other).matrix)

    def __sub__(self, other):
        return self._new(self.matrix - self._coerce(other).matrix)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return self._new(self.matrix * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self._new(-self.matrix)

    def adjoint(self) -> "BandedComplexOperator":
        return self._new(self.matrix.conj().T)

    def commutator(self, other) -> "BandedComplexOperator":
        return self @ other - other @ self

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def block(self, i: int, j: int) -> sp.csr_matrix:
        N = self.n_unknowns
        return self.matrix[i * N:(i + 1) * N, j * N:(j + 1) * N]

    def embed(self, v) -> np.ndarray:
        """Pad unknown values with zero boundary values, one row per component."""
        v = np.asarray(v)
        comps = v.reshape(self.block_size, self.n_unknowns)
        if self.boundary is Boundary.PERIODIC:
            return comps if self.block_size > 1 else comps[0]
        out = np.zeros((self.block_size, self.grid.n), dtype=v.dtype)
        out[:, 1:-1] = comps
        return out if self.block_size > 1 else out[0]

    def max_abs_difference(self, other) -> float:
        diff = (self.matrix - self._coerce(other).matrix).tocoo()
        return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0

    def to_triplets(self, stream) -> None:
        """Write ``row col re im`` lines, one per stored nonzero (debug format)."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        for r, c, z in zip(coo.row[order], coo.col[order], coo.data[order]):
            stream.write(f"{r} {c} {z.real:.17g} {z.imag:.17g}\n")


def identity_operator(grid: Grid, boundary=Boundary.DIRICHLET) -> BandedComplexOperator:
    N = grid.n_unknowns(boundary)
    return BandedComplexOperator(grid, sp.identity(N, dtype=complex, format="csr"), boundary)


def diagonal_operator(values, grid: Grid, boundary=Boundary.DIRICHLET) -> BandedComplexOperator:
    """Pointwise multiplication; ``values`` may be given on all nodes or on the unknowns."""
    values = np.asarray(values)
    N = grid.n_unknowns(boundary)
    if values.shape[0] == grid.n and N != grid.n:
        values = values[1:-1]
    if values.shape[0] != N:
        raise PreconditionError(f"{values.shape[0]} samples for {N} unknowns")
    return BandedComplexOperator(grid, sp.diags(values.astype(complex), 0, format="csr"), boundary)


def _stencil(grid: Grid, boundary, coeffs: dict) -> BandedComplexOperator:
    boundary = Boundary(boundary)
    N = grid.n_unknowns(boundary)
    diags, offsets = [], []
    for k, c in coeffs.items():
        diags.append(np.full(N - abs(k), c, dtype=complex))
        offsets.append(k)
        if boundary is Boundary.PERIODIC and k != 0:
            wrap = k - N if k > 0 else k + N
            diags.append(np.full(N - abs(wrap), c, dtype=complex))
            offsets.append(wrap)
    return BandedComplexOperator(grid, sp.diags(diags, offsets, shape=(N, N), format="csr"), boundary)


def second_derivative_operator(grid: Grid, boundary=Boundary.DIRICHLET) -> BandedComplexOperator:
    """Three-point stencil (-1, 2, -1)/h^2 for -d^2/dx^2."""
    h2 = grid.h**2
    return _stencil(grid, boundary, {-1: -1.0 / h2, 0: 2.0 / h2, 1: -1.0 / h2})


def first_derivative_operator(grid: Grid, boundary=Boundary.DIRICHLET) -> BandedComplexOperator:
    """Central stencil (-1, 0, +1)/(2h) for d/dx."""
    c = 1.0 / (2.0 * grid.h)
    return _stencil(grid, boundary, {-1: -c, 1: c})


def spinor_operator(blocks: Sequence[Sequence]) -> BandedComplexOperator:
    """Assemble a 2x2 block operator; ``None`` entries are zero blocks."""
    ref = next(b for row in blocks for b in row if b is not None)
    mats = [[None if b is None else ref._coerce(b).matrix for b in row] for row in blocks]
    N = ref.n_unknowns
    for i in range(2):
        for j in range(2):
            if mats[i][j] is None:
                mats[i][j] = sp.csr_matrix((N, N), dtype=complex)
    return BandedComplexOperator(ref.grid, sp.bmat(mats, format="csr"), ref.boundary, block_size=2)


# -- spectra -------------------------------------------------------------------


@dataclass
class Spectrum:
    """Eigenvalues sorted by real part, with residual norms and classification."""

    eigenvalues: np.ndarray
    residuals: np.ndarray
    classification: list
    eigenvectors: Optional[np.ndarray] = None
    tol_real: float = 1e-8

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def n_real(self) -> int:
        return sum(c == "real" for c in self.classification)

    @property
    def n_conjugate_pairs(self) -> int:
        return sum(c == "conjugate-pair" for c in self.classification) // 2

    @property
    def real_fraction(self) -> float:
        return self.n_real / max(len(self), 1)

    @property
    def max_im(self) -> float:
        return float(np.max(np.abs(self.eigenvalues.imag))) if len(self) else 0.0

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals)) if len(self) else 0.0

    def conjugation_defect(self) -> float:
        """max over eigenvalues of the distance from conj(lambda) to the spectrum."""
        w = self.eigenvalues
        if len(w) == 0:
            return 0.0
        worst = 0.0
        for chunk in np.array_split(np.arange(len(w)), max(1, len(w) // 512)):
            d = np.abs(np.conj(w[chunk])[:, None] - w[None, :]).min(axis=1)
            worst = max(worst, float(d.max()))
        return worst


def classify_eigenvalues(w: np.ndarray, tol_real: float = 1e-8) -> list:
    """Label each eigenvalue ``real``, ``conjugate-pair`` or ``complex``.

    An eigenvalue is real iff |Im| < tol_real * max(1, |lambda|).
    """
    w = np.asarray(w, dtype=complex)
    scale = tol_real * np.maximum(1.0, np.abs(w))
    labels = []
    for i, lam in enumerate(w):
        if abs(lam.imag) < scale[i]:
            labels.append("real")
            continue
        d = np.abs(w - np.conj(lam))
        d[i] = np.inf
        labels.append("conjugate-pair" if d.min() <= scale[i] else "complex")
    return labels


def _is_real_symmetric_tridiagonal(A: sp.csr_matrix) -> bool:
    if np.any(A.data.imag != 0):
        return False
    coo = A.tocoo()
    if coo.nnz and np.max(np.abs(coo.row - coo.col)) > 1:
        return False
    return (A - A.T).count_nonzero() == 0


def eigen_solve(
    op: BandedComplexOperator,
    k: Optional[int] = None,
    mode: str = "real",
    tol_real: float = 1e-8,
    residual_tol: float = 1e-8,
    vectors: bool = True,
) -> Spectrum:
    """Eigenpairs of a (generally non-Hermitian) banded operator.

    Parameters
    ----------
    op : BandedComplexOperator
    k : int, optional
        Number of eigenpairs to keep; all of them when omitted.
    mode : {"real", "abs_real"}
        Keep the ``k`` smallest real parts, or the ``k`` smallest |Re|.
    tol_real : float
        Relative threshold for calling an eigenvalue real.
    residual_tol : float
        Largest admissible ||H v - lambda v|| / ||v||.

    Real symmetric tridiagonal input takes a dedicated Hermitian path;
    everything else goes through the dense general eigensolver, which
    is capped at desk scale (:data:`MAX_DENSE_DIM`).
    """
    if mode not in ("real", "abs_real"):
        raise ValueError(f"unknown mode {mode!r}")
    A = op.matrix
    n = op.dim
    k = n if k is None else int(k)
    if not 1 <= k <= n:
        raise PreconditionError(f"k={k} outside 1..{n}")
    tridiagonal = _is_real_symmetric_tridiagonal(A) and mode == "real"
    if not tridiagonal and n > MAX_DENSE_DIM[op.block_size]:
        raise PreconditionError(f"dimension {n} exceeds the dense cap {MAX_DENSE_DIM[op.block_size]}")
    try:
        if tridiagonal:
            d = A.diagonal().real
            e = A.diagonal(1).real
            w, v = sla.eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1))
            w = w.astype(complex)
        else:
            dense = A.toarray()
            if (A - A.conj().T).count_nonzero() == 0:
                w, v = sla.eigh(dense)
                w = w.astype(complex)
            else:
                w, v = sla.eig(dense)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenSolveError(f"eigensolver failed: {exc}", state={"dim": n, "mode": mode}) from exc

    key = np.abs(w.real) if mode == "abs_real" else w.real
    order = np.lexsort((w.imag, key))[:k]
    w, v = w[order], v[:, order]
    order = np.lexsort((w.imag, w.real))
    w, v = w[order], v[:, order]

    res = np.linalg.norm(A @ v - v * w, axis=0) / np.linalg.norm(v, axis=0)
    if np.any(~np.isfinite(res)) or res.max() > residual_tol:
        raise EigenSolveError(
            f"residual contract violated: max residual {res.max():.3e} > {residual_tol:.1e}",
            state={"dim": n, "max_residual": float(res.max()), "eigenvalues": w},
        )
    return Spectrum(
        eigenvalues=w,
        residuals=res,
        classification=classify_eigenvalues(w, tol_real),
        eigenvectors=v if vectors else None,
        tol_real=tol_real,
    )


# -- ODE integration ---------------------------------------------------------------


@dataclass
class Trajectory:
    x: np.ndarray
    y: np.ndarray  # shape (len(x), state dimension)
    nfev: int = 0


def integrate_ivp(
    f: Callable,
    y0,
    x_span: tuple[float, float],
    tol: float = 1e-10,
    x_eval=None,
    method: str = "DOP853",
) -> Trajectory:
    """Adaptive integration of y' = f(x, y) for complex states.

    ``x_eval`` is sorted along the direction of integration; the returned
    trajectory follows that order. Step-size collapse raises
    :class:`IntegrationError` carrying the position reached.
    """
    y0 = np.atleast_1d(np.asarray(y0, dtype=complex))
    x0, x1 = map(float, x_span)
    if x_eval is not None:
        x_eval = np.asarray(x_eval, dtype=float)
        x_eval = np.sort(x_eval) if x1 >= x0 else np.sort(x_eval)[::-1]
    sol = solve_ivp(
        f, (x0, x1), y0, method=method, t_eval=x_eval, rtol=tol, atol=tol, dense_output=False
    )
    if sol.status != 0:
        where = float(sol.t[-1]) if sol.t.size else x0
        raise IntegrationError(f"integration stopped at x={where}: {sol.message}", location=where)
    if not np.all(np.isfinite(sol.y)):
        raise IntegrationError("non-finite state encountered", location=float(sol.t[-1]))
    return Trajectory(x=sol.t, y=sol.y.T, nfev=sol.nfev)
