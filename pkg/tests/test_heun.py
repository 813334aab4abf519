import math

import numpy as np
import pytest
import sympy as s
from hypothesis import given
from hypothesis import strategies as st

from pdmdirac.discretization import Grid
from pdmdirac.errors import PreconditionError
from pdmdirac.heun import (
    FrobeniusSeries,
    cosh_coordinate_map,
    free_state,
    frobenius_at_one,
    heun_coefficients,
    hyperbolic_coefficients,
    integrate_heun,
    inverse_map,
    map_to_heun,
    matching_half_width,
    scattering_sweep,
    transmission,
    wronskian,
)


@pytest.mark.parametrize("trial", ["poly", "exp"])
def test_change_of_variables_symbolically(trial):
    """-F'' + m0^2 sech(ax) F - E^2 F in x equals -a^2 (xi^2 - 1) times the monic xi-form."""
    x, a, m0, E = s.symbols("x a m0 E", positive=True)
    xi = s.symbols("xi", positive=True)
    F = xi**3 + 2 * xi if trial == "poly" else s.exp(xi / 3)
    P = xi / (xi**2 - 1)
    Q = ((E / a) ** 2 * xi - (m0 / a) ** 2) / (xi * (xi**2 - 1))
    monic = s.diff(F, xi, 2) + P * s.diff(F, xi) + Q * F
    in_x = F.subs(xi, s.cosh(a * x))
    lhs = -s.diff(in_x, x, 2) + m0**2 / s.cosh(a * x) * in_x - E**2 * in_x
    rhs = (-(a**2) * (xi**2 - 1) * monic).subs(xi, s.cosh(a * x))
    for xv, av, mv, ev in [("3/10", 1, 1, 1), ("17/10", "1/2", 2, 3), ("-9/10", 2, "3/10", "7/10")]:
        vals = {k: s.Rational(v) for k, v in zip((x, a, m0, E), (xv, av, mv, ev))}
        assert abs((lhs - rhs).subs(vals).evalf(40)) < 1e-30


@given(m0=st.floats(0.1, 5), a=st.floats(0.1, 3), E=st.floats(0, 10), xi=st.floats(1.01, 8))
def test_mapped_heun_reproduces_hyperbolic_equation(m0, a, E, xi):
    params = map_to_heun(m0, a, E)
    P1, Q1 = heun_coefficients(params, xi)
    P2, Q2 = hyperbolic_coefficients(m0, a, E, xi)
    assert abs(P1 - P2) < 1e-12 * abs(P2)
    assert abs(Q1 - Q2) <= 1e-12 * (abs(Q2) + (E / a) ** 2 + (m0 / a) ** 2)


def test_map_parameters_and_fuchsian_relation():
    p = map_to_heun(2.0, 0.5, 3.0)
    assert (p.gamma, p.delta, p.epsilon, p.d) == (0.0, 0.5, 0.5, -1.0)
    assert p.alpha == 6j and p.beta == -6j
    assert p.q == 16.0
    assert p.alpha * p.beta == 36.0
    assert p.fuchsian_residual < 1e-12
    z = map_to_heun(1.0, 1.0, 0.0)
    assert z.alpha == 0 and z.beta == 0 and z.q == 1.0
    with pytest.raises(PreconditionError):
        map_to_heun(1.0, 0.0, 1.0)


def test_first_derivative_coefficient_at_two():
    P, _ = heun_coefficients(map_to_heun(1, 1, 1), 2.0)
    assert P == pytest.approx(2 / 3, rel=1e-15)


def test_coordinate_maps():
    assert cosh_coordinate_map(0.0, 1.0) == 1.0
    assert cosh_coordinate_map(1.0, 1.0) == pytest.approx(1.5430806348152437, rel=1e-15)
    x = np.linspace(0, 10, 101)
    np.testing.assert_allclose(inverse_map(cosh_coordinate_map(x, 1.3), 1.3), x, atol=1e-12, rtol=1e-12)
    assert inverse_map(2.0, 1.0, "negative") < 0
    with pytest.raises(PreconditionError):
        inverse_map(0.9, 1.0)
    with pytest.raises(ValueError):
        inverse_map(2.0, 1.0, "left")


def ode_residual(params, f, y):
    P, Q = heun_coefficients(params, y)
    return f(y, 2) + P * f(y, 1) + Q * f(y)


@pytest.mark.parametrize("s_", [0.0, 0.5])
@pytest.mark.parametrize("mae", [(1, 1, 1), (2.0, 0.5, 3.0), (0.3, 2.0, 0.7)])
def test_series_solves_equation_in_half_disk(s_, mae):
    params = map_to_heun(*mae)
    f = frobenius_at_one(params, s_, 80)
    assert f.coefficients[0] == 1
    for y in (1.5, 1.25, 1.05, 0.95, 0.75, 0.5):
        scale = abs(f(y, 2)) + abs(f(y)) + 1
        assert abs(ode_residual(params, f, y)) < 1e-10 * scale


def test_half_exponent_branch_factorizes():
    params = map_to_heun(1, 1, 1)
    f = frobenius_at_one(params, 0.5, 40)
    y = 1.3
    analytic = np.polyval(f.coefficients[::-1], y - 1)
    assert f(y) == pytest.approx((y - 1) ** 0.5 * analytic, rel=1e-14)


def test_wronskian_follows_abel_formula():
    params = map_to_heun(1, 1, 1)
    f0, f1 = frobenius_at_one(params, 0.0, 100), frobenius_at_one(params, 0.5, 100)
    for y in (1.05, 1.2, 1.45, 0.7):
        W = wronskian(f0, f1, y)
        assert W * np.sqrt(complex(y * y - 1)) == pytest.approx(1 / math.sqrt(2), rel=1e-10)
    assert min(abs(wronskian(f0, f1, y)) for y in np.linspace(1.01, 1.49, 25)) > 0.5


@pytest.mark.parametrize("s_", [0.0, 0.5])
def test_series_matches_integrator_at_one_point_two(s_):
    params = map_to_heun(1, 1, 1)
    f = frobenius_at_one(params, s_, 100)
    y0 = 1 + 1e-6
    t = integrate_heun(params, [f(y0), f(y0, 1)], (y0, 1.2), tol=1e-13, y_eval=[1.2])
    assert abs(t.y[-1, 0] - f(1.2)) < 1e-8


def test_truncation_error_shrinks_with_order():
    params = map_to_heun(1, 1, 1)
    ref = frobenius_at_one(params, 0.0, 200)(1.45)
    errs = [abs(frobenius_at_one(params, 0.0, N)(1.45) - ref) for N in (10, 20, 40)]
    assert errs[0] > errs[1] > errs[2]


def test_series_guards():
    params = map_to_heun(1, 1, 1)
    with pytest.raises(PreconditionError):
        frobenius_at_one(params, 0.3)
    with pytest.raises(PreconditionError):
        frobenius_at_one(params, 0.0, 201)
    f = frobenius_at_one(params, 0.0, 10)
    with pytest.raises(PreconditionError):
        f(2.1)
    with pytest.raises(ValueError):
        f(1.2, 3)
    assert isinstance(f, FrobeniusSeries) and f.order == 10 and f.radius == 1.0


def transfer_matrix_transmission(m0, a, E, L=30.0, n=60000):
    """Independent oracle: piecewise-constant slices with exact plane-wave matching."""
    edges = np.linspace(-L, L, n + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    k = np.sqrt((E * E - m0 * m0 / np.cosh(a * mid)).astype(complex))
    ks = np.concatenate([[E], k, [E]])
    M = np.eye(2, dtype=complex)
    for j, x in enumerate(edges):
        k1, k2 = ks[j], ks[j + 1]
        # continuity of psi, psi' at x: coefficients (A, B) of exp(+-ikx)
        left = np.array([[np.exp(1j * k1 * x), np.exp(-1j * k1 * x)], [1j * k1 * np.exp(1j * k1 * x), -1j * k1 * np.exp(-1j * k1 * x)]])
        right = np.array([[np.exp(1j * k2 * x), np.exp(-1j * k2 * x)], [1j * k2 * np.exp(1j * k2 * x), -1j * k2 * np.exp(-1j * k2 * x)]])
        M = np.linalg.solve(right, left) @ M
    # (t, 0) = M (1, r)
    r = -M[1, 0] / M[1, 1]
    t = M[0, 0] + M[0, 1] * r
    return abs(t) ** 2, abs(r) ** 2


@pytest.mark.parametrize("E", [0.6, 1.0, 1.5])
def test_transmission_matches_transfer_matrix_oracle(E):
    T, R = transmission(1.0, 1.0, E)
    To, Ro = transfer_matrix_transmission(1.0, 1.0, E)
    assert T == pytest.approx(To, rel=1e-4, abs=1e-7)


def test_scattering_properties():
    rows = scattering_sweep(1.0, 1.0, np.linspace(0.2, 5, 49))
    E, T, R = rows.T
    assert np.max(np.abs(T + R - 1)) < 1e-6
    assert np.all(np.diff(T) > 0)
    assert np.all((T > 0) & (T <= 1 + 1e-9))
    assert transmission(1.0, 1.0, math.sqrt(10))[0] > 0.99


def test_scattering_trivial_and_guards():
    assert transmission(0.0, 1.0, 1.0) == (1.0, 0.0)
    with pytest.raises(PreconditionError):
        transmission(1.0, 1.0, 1.0, x_match=5.0)
    with pytest.raises(PreconditionError):
        transmission(1.0, 1.0, 0.0)
    assert matching_half_width(2.0) == pytest.approx(math.acosh(1e12) / 2)


def test_free_state_massless_is_plane_wave():
    g = Grid(-10, 10, 201)
    phi = free_state(0.0, 1.0, 1.7, g)
    np.testing.assert_allclose(phi.values, np.exp(1j * 1.7 * g.nodes), atol=1e-8)


def test_free_state_transparent_at_high_energy():
    g = Grid(-10, 10, 401)
    phi = free_state(1.0, 1.0, 10.0, g)
    mod = np.abs(phi.values)
    assert mod.max() / mod.min() - 1 < 1e-2


def test_free_state_far_field_wavenumber():
    E = 1.3
    g = Grid(25, 35, 101)
    phi = free_state(1.0, 1.0, E, g)
    k = phi.derivative / (1j * phi.values)
    assert np.max(np.abs(k - E)) < 1e-6
    with pytest.raises(PreconditionError):
        free_state(1.0, 1.0, -1.0, g)


def test_free_state_satisfies_equation():
    E, m0, a = 1.3, 1.0, 1.0
    g = Grid(-8, 8, 1601)
    phi = free_state(m0, a, E, g)
    fd = np.gradient(phi.derivative, g.h)
    ref = (m0 * m0 / np.cosh(a * g.nodes) - E * E) * phi.values
    assert np.max(np.abs(fd - ref)[2:-2]) < 1e-3
