"""Hyperbolic mass m(x) = m0 sqrt(sech(a x)): Heun-class equation and scattering.

With xi = cosh(a x), E_ = E/a and mu0 = m0/a the reduced equation
-phi'' + m0^2 sech(a x) phi = E^2 phi becomes

    phi'' + (1/2/(xi + 1) + 1/2/(xi - 1)) phi' + (E_^2 xi - mu0^2) / (xi (xi^2 - 1)) phi = 0,

a general Heun equation with singular points 0, 1, -1 and infinity.
Near xi = 1 it has Frobenius solutions with exponents 0 and 1/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dirac_system import ScalarField
from .discretization import Grid, integrate_ivp
from .errors import PreconditionError

__all__ = [
    "HeunParameters",
    "FrobeniusSeries",
    "map_to_heun",
    "heun_coefficients",
    "hyperbolic_coefficients",
    "cosh_coordinate_map",
    "inverse_map",
    "frobenius_at_one",
    "wronskian",
    "integrate_heun",
    "matching_half_width",
    "free_state",
    "transmission",
    "scattering_sweep",
]

BARRIER_CUTOFF = 1e-12


@dataclass(frozen=True)
class HeunParameters:
    """y'' + (gamma/y + delta/(y-1) + epsilon/(y-d)) y' + (alpha beta y - q)/(y(y-1)(y-d)) y = 0."""

    gamma: complex
    delta: complex
    epsilon: complex
    d: complex
    q: complex
    alpha: complex
    beta: complex

    @property
    def fuchsian_residual(self) -> float:
        return abs(self.alpha + self.beta + 1 - (self.gamma + self.delta + self.epsilon))

    def to_dict(self) -> dict:
        def c(z):
            z = complex(z)
            return [z.real, z.imag]

        return {k: c(getattr(self, k)) for k in ("gamma", "delta", "epsilon", "d", "q", "alpha", "beta")}


def map_to_heun(m0: float, a: float, E: float) -> HeunParameters:
    """Heun parameters reproducing the hyperbolic-mass equation term by term.

    gamma = 0, delta = epsilon = 1/2, d = -1, alpha = +i E/a, beta = -i E/a
    and q = (m0/a)^2, so that alpha beta = (E/a)^2.
    """
    if a <= 0:
        raise PreconditionError("width parameter a must be positive")
    e = E / a
    mu0 = m0 / a
    return HeunParameters(gamma=0.0, delta=0.5, epsilon=0.5, d=-1.0, q=mu0 * mu0, alpha=1j * e, beta=-1j * e)


def heun_coefficients(params: HeunParameters, y):
    """(P, Q) with the Heun equation written as H'' + P H' + Q H = 0."""
    y = np.asarray(y, dtype=complex)
    P = params.gamma / y + params.delta / (y - 1) + params.epsilon / (y - params.d)
    Q = (params.alpha * params.beta * y - params.q) / (y * (y - 1) * (y - params.d))
    return P, Q


def hyperbolic_coefficients(m0: float, a: float, E: float, xi):
    """(P, Q) of the hyperbolic-mass equation written directly in xi = cosh(a x)."""
    xi = np.asarray(xi, dtype=complex)
    e2, mu2 = (E / a) ** 2, (m0 / a) ** 2
    P = 0.5 / (xi + 1) + 0.5 / (xi - 1)
    Q = (e2 * xi - mu2) / (xi * (xi + 1) * (xi - 1))
    return P, Q


def cosh_coordinate_map(x, a: float):
    return np.cosh(a * np.asarray(x, dtype=float))


def inverse_map(xi, a: float, branch: str = "positive"):
    """x = arccosh(xi)/a on the chosen branch; xi < 1 is rejected."""
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 1):
        raise PreconditionError("xi = cosh(a x) must be >= 1")
    x = np.arccosh(xi) / a
    if branch == "positive":
        return x
    if branch == "negative":
        return -x
    raise ValueError("branch must be 'positive' or 'negative'")


@dataclass
class FrobeniusSeries:
    """(y - 1)^s * sum_k c_k (y - 1)^k around the regular singular point y = 1."""

    exponent: float
    coefficients: np.ndarray
    radius: float
    expansion_point: float = 1.0

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, y, derivative: int = 0):
        """Series value or its first/second derivative at ``y``.

        Branch for y < 1 with s = 1/2: principal complex power of (y - 1).
        """
        t = np.asarray(y, dtype=complex) - self.expansion_point
        if np.any(np.abs(t) >= self.radius):
            raise PreconditionError(f"|y - 1| must stay below the convergence radius {self.radius}")
        r = self.exponent + np.arange(len(self.coefficients))
        c = self.coefficients
        if derivative == 0:
            w = c
        elif derivative == 1:
            w = c * r
            r = r - 1
        elif derivative == 2:
            w = c * r * (r - 1)
            r = r - 2
        else:
            raise ValueError("derivative must be 0, 1 or 2")
        tt = np.atleast_1d(t)[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            powers = np.where(w[None, :] == 0, 0.0, np.power(tt, r[None, :]))
        out = powers @ w
        return out.reshape(np.shape(t)) if np.ndim(t) else out[0]


def frobenius_at_one(params: HeunParameters, exponent: float, order: int = 60) -> FrobeniusSeries:
    """Local solution at y = 1 with characteristic exponent 0 or 1 - delta.

    Multiplying the Heun equation by y (y - 1)(y - d) and setting t = y - 1
    gives polynomial coefficients

        A(t) = c t + (1 + c) t^2 + t^3,                       c = 1 - d
        B(t) = delta c + (gamma c + delta (1 + c) + epsilon) t + (gamma + delta + epsilon) t^2
        C(t) = (alpha beta - q) + alpha beta t

    and a three-term recurrence for the coefficients with c_0 = 1.
    """
    if order < 1 or order > 200:
        raise PreconditionError("order must be in 1..200")
    g, dl, ep, d = params.gamma, params.delta, params.epsilon, params.d
    ab = params.alpha * params.beta
    cc = 1 - d
    a1, a2, a3 = cc, 1 + cc, 1.0
    b0 = dl * cc
    b1 = g * cc + dl * (1 + cc) + ep
    b2 = g + dl + ep
    C0, C1 = ab - params.q, ab
    s = exponent
    if abs(a1 * s * (s - 1) + b0 * s) > 1e-14:
        raise PreconditionError(f"{s} is not a characteristic exponent at y = 1")
    coef = np.zeros(order + 1, dtype=complex)
    coef[0] = 1.0
    for k in range(1, order + 1):
        r = s + k
        lead = a1 * r * (r - 1) + b0 * r
        if abs(lead) < 1e-14:
            raise PreconditionError(f"indicial clash at order {k}")
        r1 = r - 1
        acc = (a2 * r1 * (r1 - 1) + b1 * r1 + C0) * coef[k - 1]
        if k >= 2:
            r2 = r - 2
            acc += (a3 * r2 * (r2 - 1) + b2 * r2 + C1) * coef[k - 2]
        coef[k] = -acc / lead
    others = [abs(0 - 1), abs(complex(d) - 1)]
    return FrobeniusSeries(float(exponent), coef, min(others))


def wronskian(f: FrobeniusSeries, g: FrobeniusSeries, y):
    return f(y) * g(y, 1) - f(y, 1) * g(y)


def integrate_heun(params: HeunParameters, y0, y_span, tol: float = 1e-12, y_eval=None):
    """Integrate the Heun equation; state is (H, H')."""

    def rhs(y, u):
        P, Q = heun_coefficients(params, y)
        return np.array([u[1], -P * u[1] - Q * u[0]])

    return integrate_ivp(rhs, y0, y_span, tol=tol, x_eval=y_eval)


# -- free states and scattering ------------------------------------------------------


def matching_half_width(a: float) -> float:
    """Smallest |x| beyond which sech(a x) < 1e-12, i.e. the barrier is negligible."""
    return math.acosh(1.0 / BARRIER_CUTOFF) / a


def _barrier_rhs(m0, a, E):
    def rhs(x, y):
        return np.array([y[1], (m0 * m0 / np.cosh(a * x) - E * E) * y[0]])

    return rhs


def _scatter(m0, a, E, x_match, tol, x_eval=None):
    """Integrate from the transmitted wave on the right to x = -x_match."""
    k = E
    y0 = np.array([np.exp(1j * k * x_match), 1j * k * np.exp(1j * k * x_match)])
    traj = integrate_ivp(_barrier_rhs(m0, a, E), y0, (x_match, -x_match), tol=tol, x_eval=x_eval)
    xl = -x_match
    if x_eval is None:
        phi, dphi = traj.y[-1]
    else:
        end = integrate_ivp(_barrier_rhs(m0, a, E), y0, (x_match, xl), tol=tol)
        phi, dphi = end.y[-1]
    A = (1j * k * phi + dphi) / (2j * k) * np.exp(-1j * k * xl)
    B = (1j * k * phi - dphi) / (2j * k) * np.exp(1j * k * xl)
    return A, B, traj


def _validate_window(m0, a, x_match):
    if x_match is None:
        return matching_half_width(a)
    if m0 * m0 / math.cosh(a * x_match) >= BARRIER_CUTOFF * m0 * m0:
        raise PreconditionError(
            f"matching window |x| = {x_match} too small: barrier still above 1e-12 m0^2 there"
        )
    return float(x_match)


def transmission(m0: float, a: float, E: float, x_match: float | None = None, tol: float = 1e-11) -> tuple[float, float]:
    """Transmission and reflection coefficients of the barrier m0^2 sech(a x).

    Plane waves are matched where m0^2 sech(a x) < 1e-12 m0^2.
    """
    if E <= 0:
        raise PreconditionError("scattering needs E > 0")
    if m0 == 0:
        return 1.0, 0.0
    x_match = _validate_window(m0, a, x_match)
    A, B, _ = _scatter(m0, a, E, x_match, tol)
    T = 1.0 / abs(A) ** 2
    R = abs(B) ** 2 / abs(A) ** 2
    return float(T), float(R)


def scattering_sweep(m0: float, a: float, energies) -> np.ndarray:
    """Rows (E, T, R) for each energy."""
    return np.array([(E, *transmission(m0, a, E)) for E in energies])


def free_state(m0: float, a: float, E: float, grid: Grid, tol: float = 1e-11) -> ScalarField:
    """Scattering solution with unit incoming amplitude from the left.

    Solves -phi'' + m0^2 sech(a x) phi = E^2 phi by integrating from a
    purely transmitted wave on the right. The field is divided by the
    incoming amplitude, so far to the left it reads exp(iEx) + r exp(-iEx)
    and far to the right t exp(iEx).
    """
    if E <= 0:
        raise PreconditionError("free states need E > 0")
    x_match = matching_half_width(a) if m0 != 0 else 1.0
    x_match = max(x_match, abs(grid.x_lo), abs(grid.x_hi))
    A, _, traj = _scatter(m0, a, E, x_match, tol, x_eval=grid.nodes)
    y = traj.y[::-1] / A  # integration ran right to left
    phi, dphi = y[:, 0], y[:, 1]
    x = grid.nodes
    d2phi = (m0 * m0 / np.cosh(a * x) - E * E) * phi
    return ScalarField(grid, phi, dphi, d2phi)
