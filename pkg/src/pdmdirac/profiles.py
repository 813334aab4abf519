"""Mass distributions m(x) with closed-form first and second derivatives.

Three kinds are supported:

* ``linear``: m(x) = mu * x on [0, x_hi]. The node x = 0 is a boundary
  singularity (m vanishes) and is part of the declared domain.
* ``hyperbolic``: m(x) = m0 * sqrt(sech(a x)), a soliton-like profile.
* ``custom``: any callable triple (m, m', m'') on a declared interval.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, PreconditionError

__all__ = [
    "ProfileKind",
    "MassProfile",
    "mass_at",
    "dmass_at",
    "d2mass_at",
    "derivative_consistency",
]


class ProfileKind(str, Enum):
    LINEAR = "linear"
    HYPERBOLIC = "hyperbolic"
    CUSTOM = "custom"


@dataclass(frozen=True)
class MassProfile:
    """Immutable mass distribution on a closed interval [x_lo, x_hi].

    Build instances through :meth:`linear`, :meth:`hyperbolic`,
    :meth:`custom` or :meth:`constant` rather than the raw constructor.
    """

    kind: ProfileKind
    x_lo: float
    x_hi: float
    mu: float = 0.0
    m0: float = 0.0
    a: float = 0.0
    funcs: Optional[tuple] = field(default=None, repr=False, compare=False)
    label: str = ""

    def __post_init__(self):
        if not self.x_hi > self.x_lo:
            raise PreconditionError(f"empty domain [{self.x_lo}, {self.x_hi}]")
        if self.kind is ProfileKind.LINEAR and self.mu <= 0:
            raise PreconditionError("linear profile needs mu > 0")
        if self.kind is ProfileKind.HYPERBOLIC and (self.m0 <= 0 or self.a <= 0):
            raise PreconditionError("hyperbolic profile needs m0 > 0 and a > 0")
        if self.kind is ProfileKind.CUSTOM and (self.funcs is None or len(self.funcs) != 3):
            raise PreconditionError("custom profile needs the triple (m, dm, d2m)")

    # -- constructors -----------------------------------------------------
    @classmethod
    def linear(cls, mu: float, x_hi: float = 20.0) -> "MassProfile":
        return cls(ProfileKind.LINEAR, 0.0, float(x_hi), mu=float(mu))

    @classmethod
    def hyperbolic(cls, m0: float, a: float, x_lo: float = -20.0, x_hi: float = 20.0) -> "MassProfile":
        return cls(ProfileKind.HYPERBOLIC, float(x_lo), float(x_hi), m0=float(m0), a=float(a))

    @classmethod
    def custom(
        cls,
        m: Callable,
        dm: Callable,
        d2m: Callable,
        domain: tuple[float, float],
        label: str = "custom",
        validate: bool = True,
    ) -> "MassProfile":
        """Profile from user callables. Derivatives must be supplied.

        With ``validate`` the derivatives are compared against finite
        differences of ``m`` at interior probe points.
        """
        p = cls(ProfileKind.CUSTOM, float(domain[0]), float(domain[1]), funcs=(m, dm, d2m), label=label)
        if validate:
            err = derivative_consistency(p)
            if err > 1e-6:
                raise PreconditionError(
                    f"supplied derivatives disagree with finite differences (rel. error {err:.3e})"
                )
        return p

    @classmethod
    def constant(cls, m0: float, domain: tuple[float, float] = (-20.0, 20.0)) -> "MassProfile":
        m0 = float(m0)
        return cls.custom(
            lambda x: np.full_like(np.asarray(x, dtype=float), m0),
            lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            domain,
            label=f"constant(m0={m0})",
            validate=False,
        )

    @classmethod
    def from_dict(cls, spec: dict) -> "MassProfile":
        """Build from the JSON form used by configuration files."""
        kind = spec["kind"]
        if kind == "linear":
            return cls.linear(spec["mu"], spec.get("xhi", 20.0))
        if kind == "hyperbolic":
            return cls.hyperbolic(spec["m0"], spec["a"], spec.get("xlo", -20.0), spec.get("xhi", 20.0))
        if kind == "constant":
            return cls.constant(spec["m0"], (spec.get("xlo", -20.0), spec.get("xhi", 20.0)))
        raise PreconditionError(f"unknown profile kind {kind!r}")

    def to_dict(self) -> dict:
        if self.kind is ProfileKind.LINEAR:
            return {"kind": "linear", "mu": self.mu, "xhi": self.x_hi}
        if self.kind is ProfileKind.HYPERBOLIC:
            return {"kind": "hyperbolic", "m0": self.m0, "a": self.a, "xlo": self.x_lo, "xhi": self.x_hi}
        return {"kind": "custom", "label": self.label, "xlo": self.x_lo, "xhi": self.x_hi}

    # -- evaluation ---------------------------------------------------------
    @property
    def domain(self) -> tuple[float, float]:
        return (self.x_lo, self.x_hi)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        bad = (x < self.x_lo) | (x > self.x_hi) | ~np.isfinite(x)
        if np.any(bad):
            first = float(np.atleast_1d(x)[np.argmax(np.atleast_1d(bad))])
            raise DomainError(f"x={first} outside profile domain [{self.x_lo}, {self.x_hi}]")
        return x

    def mass(self, x):
        x = self._check(x)
        if self.kind is ProfileKind.LINEAR:
            return self.mu * x
        if self.kind is ProfileKind.HYPERBOLIC:
            return self.m0 * np.sqrt(1.0 / np.cosh(self.a * x))
        return np.asarray(self.funcs[0](x), dtype=float)

    def dmass(self, x):
        x = self._check(x)
        if self.kind is ProfileKind.LINEAR:
            return np.full_like(x, self.mu)
        if self.kind is ProfileKind.HYPERBOLIC:
            return -0.5 * self.a * self.mass(x) * np.tanh(self.a * x)
        return np.asarray(self.funcs[1](x), dtype=float)

    def d2mass(self, x):
        x = self._check(x)
        if self.kind is ProfileKind.LINEAR:
            return np.zeros_like(x)
        if self.kind is ProfileKind.HYPERBOLIC:
            # m'' = m (a^2/4 tanh^2 - a^2/2 sech^2)
            t = np.tanh(self.a * x)
            s = 1.0 / np.cosh(self.a * x)
            return self.mass(x) * self.a**2 * (0.25 * t * t - 0.5 * s * s)
        return np.asarray(self.funcs[2](x), dtype=float)

    def log_derivative(self, x):
        """m'/m, the combination that recurs in every effective potential."""
        return self.dmass(x) / self.mass(x)


def mass_at(p: MassProfile, x):
    return p.mass(x)


def dmass_at(p: MassProfile, x):
    return p.dmass(x)


def d2mass_at(p: MassProfile, x):
    return p.d2mass(x)


def derivative_consistency(p: MassProfile, n_probe: int = 17) -> float:
    """Largest relative mismatch between supplied and finite-difference derivatives.

    Uses Richardson-extrapolated central differences at ``n_probe`` interior
    points. The scale for the relative error is max(|exact|, |m|/width) so
    that vanishing derivatives do not blow up the ratio.
    """
    width = p.x_hi - p.x_lo
    xs = np.linspace(p.x_lo, p.x_hi, n_probe + 2)[1:-1]
    h = 1e-3 * min(width, 1.0)
    xs = xs[(xs - 2 * h > p.x_lo) & (xs + 2 * h < p.x_hi)]

    def d1(f, x, h):
        return (f(x + h) - f(x - h)) / (2 * h)

    def d2(f, x, h):
        return (f(x + h) - 2 * f(x) + f(x - h)) / h**2

    worst = 0.0
    for x in xs:
        m = float(p.mass(x))
        fd1 = (4 * d1(p.mass, x, h / 2) - d1(p.mass, x, h)) / 3
        fd2 = (4 * d2(p.mass, x, h / 2) - d2(p.mass, x, h)) / 3
        ex1, ex2 = float(p.dmass(x)), float(p.d2mass(x))
        s1 = max(abs(ex1), abs(m) / width, 1e-300)
        s2 = max(abs(ex2), abs(m) / width**2, 1e-300)
        worst = max(worst, abs(fd1 - ex1) / s1, abs(fd2 - ex2) / s2)
    return worst
