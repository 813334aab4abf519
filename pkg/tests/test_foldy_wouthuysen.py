import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdmdirac.discretization import Boundary, Grid, eigen_solve
from pdmdirac.errors import PreconditionError, SingularityError
from pdmdirac.foldy_wouthuysen import (
    TABLE1,
    OrderingParams,
    alpha_p_operator,
    beta_mass_operator,
    commutator_checks,
    li_kuhn_keo,
    mass_scale_sweep,
    momentum_operator,
    nonrelativistic_hamiltonian,
    s_operator,
    von_roos_keo,
)
from pdmdirac.profiles import MassProfile

HYP5 = MassProfile.hyperbolic(5.0, 1.0)
GRID = Grid(-20, 20, 2001)


def test_table_orderings_satisfy_constraint():
    assert set(TABLE1) == {"BenDaniel-Duke", "Gora-Williams", "Zhu-Kroemer", "Li-Kuhn"}
    for o in TABLE1.values():
        assert o.alpha + o.beta + o.gamma == -1
    assert (TABLE1["BenDaniel-Duke"].alpha, TABLE1["BenDaniel-Duke"].beta, TABLE1["BenDaniel-Duke"].gamma) == (0, -1, 0)
    assert (TABLE1["Li-Kuhn"].alpha, TABLE1["Li-Kuhn"].beta, TABLE1["Li-Kuhn"].gamma) == (0, -0.5, -0.5)


def test_constraint_violation_rejected():
    with pytest.raises(PreconditionError):
        OrderingParams(0.0, 0.0, 0.0)


@pytest.mark.parametrize("boundary", [Boundary.DIRICHLET, Boundary.PERIODIC])
def test_orderings_coincide_for_constant_mass(boundary):
    g = Grid.periodic(-10, 20, 200) if boundary is Boundary.PERIODIC else Grid(-10, 10, 201)
    p = MassProfile.constant(4.0, (-10, 10))
    ops = [von_roos_keo(p, o, g, boundary) for o in TABLE1.values()]
    for op in ops[1:]:
        assert ops[0].max_abs_difference(op) == 0.0


def test_orderings_coincide_for_generic_constant_mass_to_rounding():
    g = Grid(-10, 10, 201)
    p = MassProfile.constant(1.7, (-10, 10))
    ops = [von_roos_keo(p, o, g) for o in TABLE1.values()]
    scale = np.abs(ops[0].matrix.data).max()
    for op in ops[1:]:
        assert ops[0].max_abs_difference(op) < 4 * np.finfo(float).eps * scale


def test_constant_mass_periodic_spectrum_is_free_particle():
    n, m0 = 64, 4.0
    g = Grid.periodic(0, 2 * np.pi, n)
    p = MassProfile.constant(m0, (0, 2 * np.pi))
    K = von_roos_keo(p, TABLE1["Zhu-Kroemer"], g, Boundary.PERIODIC)
    w = np.sort(eigen_solve(K).eigenvalues.real)
    kd = np.sin(np.arange(n) * g.h) / g.h
    np.testing.assert_allclose(w, np.sort(kd**2 / (2 * m0)), atol=1e-10)


def test_ben_daniel_duke_is_half_p_inverse_mass_p():
    g = Grid(-5, 5, 101)
    P = momentum_operator(g)
    from pdmdirac.discretization import diagonal_operator

    inv = diagonal_operator(1 / HYP5.mass(g.interior), g)
    ref = 0.5 * (P @ inv @ P)
    bdd = von_roos_keo(HYP5, TABLE1["BenDaniel-Duke"], g)
    assert bdd.max_abs_difference(ref) <= 1e-12 * np.abs(ref.matrix.data).max()


@given(al=st.floats(-2, 2), be=st.floats(-2, 2))
def test_von_roos_symmetric_under_alpha_gamma_swap(al, be):
    o = OrderingParams(al, be, -1 - al - be)
    g = Grid(-3, 3, 41)
    a = von_roos_keo(HYP5, o, g)
    b = von_roos_keo(HYP5, o.swapped(), g)
    assert a.max_abs_difference(b) <= 1e-12 * np.abs(a.matrix.data).max()


@pytest.mark.parametrize("boundary", [Boundary.DIRICHLET, Boundary.PERIODIC])
def test_li_kuhn_band_assembly_equals_operator_product(boundary):
    g = Grid.periodic(-20, 40, 400) if boundary is Boundary.PERIODIC else GRID
    a = von_roos_keo(HYP5, TABLE1["Li-Kuhn"], g, boundary)
    b = li_kuhn_keo(HYP5, g, boundary)
    assert set(b.bands) == {-2, 0, 2} or boundary is Boundary.PERIODIC
    assert a.max_abs_difference(b) <= 1e-12 * np.abs(b.matrix.data).max()


def test_nonrelativistic_hamiltonian():
    g = Grid.periodic(-20, 40, 300)
    V = 0.3 * np.cos(g.nodes)
    H = nonrelativistic_hamiltonian(HYP5, V, g, Boundary.PERIODIC)
    assert H.max_abs_difference(H.adjoint()) == 0.0
    K = von_roos_keo(HYP5, TABLE1["Li-Kuhn"], g, Boundary.PERIODIC)
    from pdmdirac.discretization import diagonal_operator

    assert H.max_abs_difference(K + diagonal_operator(V, g, Boundary.PERIODIC)) < 1e-12 * np.abs(H.matrix.data).max()
    with pytest.raises(PreconditionError):
        nonrelativistic_hamiltonian(HYP5, 1j * np.ones(300), g, Boundary.PERIODIC)


def test_singular_mass_rejected():
    g = Grid(0, 5, 11)
    with pytest.raises(SingularityError):
        von_roos_keo(MassProfile.linear(1.0), TABLE1["Li-Kuhn"], g, Boundary.PERIODIC)
    with pytest.raises(SingularityError):
        s_operator(MassProfile.linear(1.0), g, Boundary.PERIODIC)


def test_s_operator_constant_mass_and_hermiticity():
    m0 = 4.0
    g = Grid.periodic(0, 10, 50)
    p = MassProfile.constant(m0, (0, 10))
    S = s_operator(p, g, Boundary.PERIODIC)
    P = momentum_operator(g, Boundary.PERIODIC)
    # -(i/2m0) beta alpha p with beta alpha = [[0, -1], [1, 0]]
    assert S.block(0, 0).nnz == 0 and S.block(1, 1).nnz == 0
    np.testing.assert_allclose(S.block(0, 1).toarray(), (0.5j / m0) * P.toarray(), atol=1e-15)
    np.testing.assert_allclose(S.block(1, 0).toarray(), (-0.5j / m0) * P.toarray(), atol=1e-15)
    assert S.max_abs_difference(S.adjoint()) == 0.0
    assert S.max_abs_difference(-S.adjoint()) > 0.0


def test_s_operator_off_diagonal_continuum_form():
    # block (0,1) acting on f equals f'/(2m) - m' f/(4 m^2) up to O(h^2)
    g = Grid(-3, 3, 2001)
    S = s_operator(HYP5, g)
    x = g.interior
    f = np.exp(-x * x)
    df = -2 * x * f
    m, dm = HYP5.mass(x), HYP5.dmass(x)
    got = S.block(0, 1) @ f
    ref = df / (2 * m) - dm * f / (4 * m * m)
    assert np.max(np.abs(got - ref)[5:-5]) < 1e-5


def test_constant_mass_commutators_exact():
    g = Grid.periodic(-20, 40, 400)
    p = MassProfile.constant(4.0, (-20, 20))
    rep = commutator_checks(p, g, (-2, 2), Boundary.PERIODIC)
    assert rep.c1_deviation == 0.0
    assert rep.c2_deviation < 1e-15
    assert rep.full_even_deviation < 1e-15
    assert rep.c2_plus_sign_deviation == pytest.approx(2.0, rel=1e-12)


def test_hyperbolic_commutator_deviations_small_and_second_order():
    a = commutator_checks(HYP5, GRID)
    b = commutator_checks(HYP5, Grid(-20, 20, 4001))
    assert a.c1_deviation < 1e-2 and a.c2_deviation < 1e-2
    assert a.c1_deviation / b.c1_deviation == pytest.approx(4.0, rel=0.05)
    assert a.c2_deviation / b.c2_deviation == pytest.approx(4.0, rel=0.05)


def test_mass_scale_sweep_leaves_relative_deviations_invariant():
    rows = mass_scale_sweep(HYP5, GRID, factors=(1, 2, 4))
    c1 = [r["c1_deviation"] for r in rows]
    c2 = [r["c2_deviation"] for r in rows]
    np.testing.assert_allclose(c1, c1[0], rtol=1e-8)
    np.testing.assert_allclose(c2, c2[0], rtol=1e-8)
    # the odd remainder of the full transformed Hamiltonian falls as m^-2
    odd = [r["full_odd_residual"] for r in rows]
    np.testing.assert_allclose(np.array(odd[:-1]) / np.array(odd[1:]), 4.0, rtol=1e-6)
    assert [r["mass_scale"] for r in rows] == [5.0, 10.0, 20.0]


def test_window_guards():
    with pytest.raises(PreconditionError):
        commutator_checks(HYP5, GRID, (0.0, 0.03))
    with pytest.raises(PreconditionError):
        commutator_checks(HYP5, GRID, (1.0, -1.0))
    with pytest.raises(PreconditionError):
        commutator_checks(HYP5, Grid(-2, 2, 101), (-2, 2))


def test_building_blocks():
    g = Grid(-1, 1, 11)
    Bm = beta_mass_operator(HYP5, g)
    Ap = alpha_p_operator(g)
    assert Bm.block(0, 0).nnz == 0 and np.allclose(Bm.block(0, 1).diagonal(), HYP5.mass(g.interior))
    assert Ap.block(0, 1).nnz == 0
    np.testing.assert_array_equal(Ap.block(1, 1).toarray(), -Ap.block(0, 0).toarray())
