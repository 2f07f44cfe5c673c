"""Location of the unique positive equilibrium.

At an equilibrium, R and L can be eliminated, leaving one scalar equation for
the effector level T:

    (b1*b2*b3 / (g1*g2)) * T - [f1(T) + (b1/g1) * f2(T)] = 0

The left side is strictly increasing (positive linear term minus non-increasing
terms), negative at T = 0, and positive for large T, so the root exists, is
unique, and bisection-style solving is globally convergent.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import ModelInstance
from .search import expand_bracket, solve_increasing

__all__ = ["EquilibriumPoint", "root_residual", "equilibrium_root", "assemble_equilibrium", "find_equilibrium"]

DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class EquilibriumPoint:
    """The equilibrium (R0, L0, T0) plus the scalar-equation residual at T0."""

    R0: float
    L0: float
    T0: float
    residual: float

    def as_array(self):
        import numpy as np

        return np.array([self.R0, self.L0, self.T0])


def root_residual(model: ModelInstance, T: float) -> float:
    """Left-hand side of the scalar equilibrium equation at T."""
    p = model.params
    return (p.b1 * p.b2 * p.b3 / (p.g1 * p.g2)) * T - (model.f1(T) + (p.b1 / p.g1) * model.f2(T))


def equilibrium_root(model: ModelInstance, tol: float = DEFAULT_TOL) -> float:
    """Unique T0 > 0 solving the equilibrium equation to |residual| <= tol.

    The bracket [0, 2**k] is expanded by doubling until the residual turns
    positive (k capped at 200), then refined by a bisection/regula-falsi
    hybrid down to ``tol`` on the residual and 1e-12 absolute on T.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    fn = lambda T: root_residual(model, T)
    lo, hi, f_lo, f_hi = expand_bracket(fn, 0.0, hi0=1.0, max_doublings=200)
    if lo == hi:
        return lo
    T0, _ = solve_increasing(fn, lo, hi, ftol=tol, xtol=1e-12, f_lo=f_lo, f_hi=f_hi)
    return T0


def assemble_equilibrium(model: ModelInstance, T0: float) -> EquilibriumPoint:
    """Lift a root T0 to the full state: R0 = f1(T0)/b1, L0 = (b3/g2)*T0."""
    p = model.params
    return EquilibriumPoint(
        R0=model.f1(T0) / p.b1,
        L0=(p.b3 / p.g2) * T0,
        T0=T0,
        residual=abs(root_residual(model, T0)),
    )


def find_equilibrium(model: ModelInstance, tol: float = DEFAULT_TOL) -> EquilibriumPoint:
    """Solve for T0 and assemble the equilibrium point in one call."""
    return assemble_equilibrium(model, equilibrium_root(model, tol))
