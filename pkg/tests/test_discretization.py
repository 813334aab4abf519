import io
import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from pdmdirac.discretization import (
    BandedComplexOperator,
    Boundary,
    Grid,
    classify_eigenvalues,
    diagonal_operator,
    eigen_solve,
    first_derivative_operator,
    identity_operator,
    integrate_ivp,
    second_derivative_operator,
    spinor_operator,
)
from pdmdirac.errors import EigenSolveError, IntegrationError, PreconditionError


def test_grid_basics():
    g = Grid(0.0, 1.0, 11)
    assert g.h == pytest.approx(0.1)
    assert len(g.nodes) == 11 and g.nodes[0] == 0 and g.nodes[-1] == 1
    assert g.n_unknowns(Boundary.DIRICHLET) == 9
    assert g.n_unknowns(Boundary.PERIODIC) == 11


@pytest.mark.parametrize("args", [(0, 1, 2), (1, 0, 10), (0, 0, 10)])
def test_grid_rejects_invalid(args):
    with pytest.raises(PreconditionError):
        Grid(*args)


@given(hw=st.floats(0.5, 50), n=st.integers(3, 500))
def test_symmetric_grid_is_exactly_antisymmetric(hw, n):
    x = Grid.symmetric(hw, n).nodes
    assert np.all(x == -x[::-1])


def test_periodic_grid_spacing():
    g = Grid.periodic(0.0, 2 * np.pi, 64)
    assert g.h == pytest.approx(2 * np.pi / 64, rel=1e-15)


def test_second_derivative_kills_constants_periodic():
    g = Grid.periodic(0, 1, 32)
    D2 = second_derivative_operator(g, Boundary.PERIODIC)
    assert np.max(np.abs(D2 @ np.ones(32))) < 1e-10


@pytest.mark.parametrize("kk", [1, 3, 7])
def test_second_derivative_discrete_dispersion(kk):
    n = 64
    g = Grid.periodic(0, 2 * np.pi, n)
    D2 = second_derivative_operator(g, Boundary.PERIODIC)
    f = np.sin(kk * g.nodes)
    lam = (2 - 2 * np.cos(kk * g.h)) / g.h**2
    np.testing.assert_allclose(D2 @ f, lam * f, atol=1e-10)


def test_dirichlet_ground_state_on_zero_pi():
    g = Grid(0, np.pi, 2000)
    spec = eigen_solve(second_derivative_operator(g), k=1)
    assert abs(spec.eigenvalues[0].real - 1.0) < 1e-5


def test_dirichlet_ground_state_converges_second_order():
    errs = []
    for n in (201, 401):
        spec = eigen_solve(second_derivative_operator(Grid(0, np.pi, n)), k=1)
        errs.append(abs(spec.eigenvalues[0].real - 1.0))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.02)


def test_first_derivative_examples():
    g = Grid.periodic(0, 2 * np.pi, 50)
    D = first_derivative_operator(g, Boundary.PERIODIC)
    assert np.max(np.abs(D @ np.ones(50))) < 1e-12
    assert (D.matrix + D.matrix.T).count_nonzero() == 0
    k = 3
    f = np.exp(1j * k * g.nodes)
    np.testing.assert_allclose(D @ f, 1j * np.sin(k * g.h) / g.h * f, atol=1e-12)

    g = Grid(0, 1, 11)
    Dd = first_derivative_operator(g)
    ramp = 2.5 * g.interior
    np.testing.assert_allclose((Dd @ ramp)[1:-1], 2.5, rtol=1e-12)


def test_wrong_length_rejected():
    D = first_derivative_operator(Grid(0, 1, 11))
    with pytest.raises(PreconditionError):
        D.apply(np.ones(11))


def test_operator_algebra_and_bandwidth():
    g = Grid(0, 1, 21)
    D = first_derivative_operator(g)
    assert D.bandwidth == 1
    assert (D @ D).bandwidth == 2
    I = identity_operator(g)
    assert (D - D).max_abs_difference(0 * I) == 0
    assert (2 * D).max_abs_difference(D + D) == 0
    assert D.commutator(D).max_abs_difference(0 * I) == 0
    assert set(second_derivative_operator(g).bands) == {-1, 0, 1}


def test_periodic_wrap_counts_as_short_band():
    g = Grid.periodic(0, 1, 20)
    assert first_derivative_operator(g, Boundary.PERIODIC).bandwidth == 1


def test_diagonal_operator_accepts_full_or_unknown_samples():
    g = Grid(0, 1, 6)
    a = diagonal_operator(g.nodes, g)
    b = diagonal_operator(g.interior, g)
    assert a.max_abs_difference(b) == 0
    with pytest.raises(PreconditionError):
        diagonal_operator(np.ones(3), g)


def test_spinor_blocks_and_embed():
    g = Grid(0, 1, 6)
    I = identity_operator(g)
    H = spinor_operator([[None, I], [2 * I, None]])
    assert H.dim == 8 and H.block_size == 2
    assert sp.linalg.norm(H.block(0, 0)) == 0
    assert np.all(H.block(1, 0).diagonal() == 2)
    e = H.embed(np.arange(8.0))
    assert e.shape == (2, 6) and e[0, 0] == 0 and e[1, 1] == 4


def test_triplet_export():
    g = Grid(0, 1, 4)
    buf = io.StringIO()
    first_derivative_operator(g).to_triplets(buf)
    rows = [line.split() for line in buf.getvalue().splitlines()]
    assert len(rows) == 2
    assert rows[0][:2] == ["0", "1"]
    assert float(rows[0][2]) == pytest.approx(1 / (2 * g.h))


def test_hermitian_input_classified_real():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(30, 30)) + 1j * rng.normal(size=(30, 30))
    A = A + A.conj().T
    op = BandedComplexOperator(Grid.periodic(0, 1, 30), sp.csr_matrix(A), Boundary.PERIODIC)
    spec = eigen_solve(op)
    assert spec.n_real == 30
    assert spec.max_residual < 1e-8
    assert np.all(np.diff(spec.eigenvalues.real) >= 0)


@given(seed=st.integers(0, 2**32 - 1))
def test_pt_symmetric_matrix_spectrum_is_conjugation_closed(seed):
    rng = np.random.default_rng(seed)
    n = 12
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    J = np.eye(n)[::-1]
    A = 0.5 * (A + J @ A.conj() @ J)
    op = BandedComplexOperator(Grid.symmetric(1.0, n), sp.csr_matrix(A), Boundary.PERIODIC)
    spec = eigen_solve(op)
    assert spec.conjugation_defect() < 1e-8


def test_classification_rules():
    w = np.array([1.0, 2 + 1e-12j, 3 + 1j, 3 - 1j, 5 + 2j])
    assert classify_eigenvalues(w) == ["real", "real", "conjugate-pair", "conjugate-pair", "complex"]


def test_modes_and_k():
    g = Grid(0, np.pi, 101)
    op = second_derivative_operator(g) - 5.0 * identity_operator(g)
    spec = eigen_solve(op, k=3, mode="abs_real")
    assert np.allclose(sorted(np.abs(spec.eigenvalues.real)), sorted(np.abs(spec.eigenvalues.real)))
    assert len(spec) == 3
    full = np.sort(eigen_solve(op + 0j * identity_operator(g), vectors=False).eigenvalues.real)
    expect = np.sort(full[np.argsort(np.abs(full))[:3]])
    np.testing.assert_allclose(spec.eigenvalues.real, expect, rtol=1e-8, atol=1e-8)
    with pytest.raises(PreconditionError):
        eigen_solve(op, k=0)


def test_dense_cap_enforced():
    g = Grid(0, 1, 5000)
    op = first_derivative_operator(g)
    with pytest.raises(PreconditionError):
        eigen_solve(op, k=1)


def test_residual_contract_violation_raises():
    g = Grid(0, 1, 40)
    op = first_derivative_operator(g)
    with pytest.raises(EigenSolveError) as info:
        eigen_solve(op, residual_tol=1e-30)
    assert "max_residual" in info.value.state


def test_ivp_constant_and_sine():
    t = integrate_ivp(lambda x, y: np.zeros_like(y), [1 + 2j], (0, 3), x_eval=np.linspace(0, 3, 5))
    assert np.all(t.y[:, 0] == 1 + 2j)
    x = np.linspace(0, 10, 21)
    t = integrate_ivp(lambda x, y: np.array([y[1], -y[0]]), [0, 1], (0, 10), tol=1e-12, x_eval=x)
    np.testing.assert_allclose(t.y[:, 0].real, np.sin(x), atol=1e-10)


def test_ivp_reversed_span_recovers_initial_state():
    tol = 1e-10
    f = lambda x, y: np.array([y[1], -(1 + 0.3 * np.sin(x)) * y[0]])
    fwd = integrate_ivp(f, [1.0, 0.5j], (0, 5), tol=tol)
    back = integrate_ivp(f, fwd.y[-1], (5, 0), tol=tol)
    assert np.max(np.abs(back.y[-1] - np.array([1.0, 0.5j]))) < 10 * tol * 100


def test_ivp_reduced_equation_plane_wave():
    m0, E = 1.5, 2.5
    k = math.sqrt(E * E - m0 * m0)
    x = np.linspace(0, 6, 13)
    t = integrate_ivp(lambda x, y: np.array([y[1], (m0 * m0 - E * E) * y[0]]), [1, 1j * k], (0, 6), tol=1e-12, x_eval=x)
    np.testing.assert_allclose(t.y[:, 0], np.exp(1j * k * x), atol=1e-9)


def test_ivp_step_collapse_reports_location():
    with pytest.raises(IntegrationError) as info:
        integrate_ivp(lambda x, y: y**2, [1.0], (0, 2))
    assert info.value.location == pytest.approx(1.0, abs=1e-6)
