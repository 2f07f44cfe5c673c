"""Construction of one-parameter model families crossing a Hopf bifurcation.

The construction pins the equilibrium: fix the effector level T0 and equal
clearing rates b1 = b2 = b3 = b, then choose

    g2 = b^3 * T0 / (g1*f1(T0) + b*f2(T0))

so that T0 solves the equilibrium equation for every g1.  Along this slice the
Routh-Hurwitz discriminant

    theta0(g1) = b^3 * [ (T0*(2b)*f2'(T0) + g1*(-T0*f1'(T0))) / (g1*f1(T0) + b*f2(T0)) - 8 ]

is non-decreasing in g1 with limits theta0(0+) < 0 (for an active f2) and
b^3*(M(T0) - 8) at infinity.  When M(T0) > 8 the discriminant therefore sweeps
through zero and inverting it in g1 yields a family parameterized by
mu = theta0, with the bifurcation at mu = 0 and transversality derivative

    alpha'(0) = 1 / (2*[a1^2 + a2 - g2*f2'(T0)]) > 0.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BracketError
from .model import FeedbackSpec, ModelInstance, ModelParameters
from .stability import M_of_T
from .search import solve_increasing

__all__ = [
    "HopfFamily",
    "g2_from_equilibrium",
    "theta0_of_g1",
    "invert_theta0",
    "alpha_prime_at_zero",
    "family_member",
    "build_family",
    "hill_T0_for_slope_fraction",
]

_G1_FLOOR = 1e-12
_G1_CAP = 1e300


@dataclass(frozen=True)
class HopfFamily:
    """A tabulated one-parameter family with its equilibrium pinned at T0."""

    b: float
    T0: float
    f1: FeedbackSpec
    f2: FeedbackSpec
    mu_range: tuple[float, float]  # open interval of reachable discriminants
    mu_grid: tuple[float, ...]
    g1_of_mu: tuple[float, ...]
    alpha_prime0: float
    members: tuple[ModelInstance, ...]


def g2_from_equilibrium(
    b1: float, b2: float, b3: float, g1: float, T0: float, f1: FeedbackSpec, f2: FeedbackSpec
) -> float:
    """The g2 that places the equilibrium effector level exactly at T0."""
    if min(b1, b2, b3, g1, T0) <= 0:
        raise ValueError("all rates and T0 must be positive")
    denom = g1 * f1(T0) + b1 * f2(T0)
    return b1 * b2 * b3 * T0 / denom


def theta0_of_g1(b: float, T0: float, f1: FeedbackSpec, f2: FeedbackSpec, g1: float) -> float:
    """Discriminant along the pinned-equilibrium slice b1 = b2 = b3 = b."""
    if min(b, T0, g1) <= 0:
        raise ValueError("b, T0 and g1 must be positive")
    denom = g1 * f1(T0) + b * f2(T0)
    num = T0 * (2.0 * b) * f2.deriv(T0) + g1 * (-T0 * f1.deriv(T0))
    return b**3 * (num / denom - 8.0)


def _mu_bounds(b: float, T0: float, f1: FeedbackSpec, f2: FeedbackSpec) -> tuple[float, float]:
    lo = theta0_of_g1(b, T0, f1, f2, _G1_FLOOR)
    hi = b**3 * (M_of_T(f1, T0) - 8.0)
    return lo, hi


def invert_theta0(
    b: float, T0: float, f1: FeedbackSpec, f2: FeedbackSpec, mu: float, *, tol_rel: float = 1e-12
) -> float:
    """The g1 at which the pinned-slice discriminant equals mu.

    ``mu`` must lie strictly inside the reachable range
    (theta0(g1 -> 0), b^3*(M(T0) - 8)); monotonicity of theta0 in g1 makes
    bisection-style inversion global.
    """
    mu_lo, mu_hi = _mu_bounds(b, T0, f1, f2)
    if not (mu_lo < mu < mu_hi):
        raise ValueError(
            f"mu={mu} outside the reachable discriminant range ({mu_lo}, {mu_hi}); "
            "the family needs M(T0) > 8 and an f2 active at T0"
        )
    ftol = tol_rel * max(abs(mu), b**3)
    fn = lambda g1: theta0_of_g1(b, T0, f1, f2, g1) - mu

    lo, f_lo = _G1_FLOOR, mu_lo - mu
    hi = 1.0
    for _ in range(2000):
        f_hi = fn(hi)
        if f_hi > 0.0:
            break
        if f_hi == 0.0:
            return hi
        lo, f_lo = hi, f_hi
        hi *= 2.0
        if hi > _G1_CAP:
            raise BracketError(f"no g1 <= {_G1_CAP} reaches mu={mu}; mu is too close to the supremum")
    g1, _ = solve_increasing(fn, lo, hi, ftol=ftol, f_lo=f_lo, f_hi=f_hi)
    return g1


def alpha_prime_at_zero(b: float, g2: float, f2_deriv_at_T0: float) -> float:
    """Speed of the eigenvalue pair real part in mu at the bifurcation.

    With a1 = 3b and a2 = 3b^2 on the equal-rates slice this is
    1 / (2*[a1^2 + a2 - g2*f2'(T0)]), positive because f2' <= 0.
    """
    a1 = 3.0 * b
    a2 = 3.0 * b * b
    return 1.0 / (2.0 * (a1 * a1 + a2 - g2 * f2_deriv_at_T0))


def family_member(b: float, T0: float, f1: FeedbackSpec, f2: FeedbackSpec, g1: float) -> ModelInstance:
    """Assemble the full model for one g1 on the pinned-equilibrium slice."""
    g2 = g2_from_equilibrium(b, b, b, g1, T0, f1, f2)
    return ModelInstance(params=ModelParameters(b, b, b, g1, g2), f1=f1, f2=f2)


def build_family(b: float, T0: float, f1: FeedbackSpec, f2: FeedbackSpec, mu_grid) -> HopfFamily:
    """One model per mu in ``mu_grid``, each with discriminant exactly mu.

    Requires M(T0) > 8 (otherwise no positive mu is reachable) and an f2 that
    is active at T0, i.e. f2(T0) > 0 or f2'(T0) < 0; with an inert f2 the
    discriminant does not depend on g1 at all and nothing can be inverted.
    """
    m0 = M_of_T(f1, T0)
    if not m0 > 8.0:
        raise ValueError(f"M(T0) = {m0} <= 8: no destabilizing parameters exist at T0={T0}")
    if f2(T0) == 0.0 and f2.deriv(T0) == 0.0:
        raise ValueError("f2 is inert at T0 (f2(T0) = f2'(T0) = 0); the discriminant cannot be swept")
    mu_grid = tuple(float(m) for m in mu_grid)
    g1s = tuple(invert_theta0(b, T0, f1, f2, mu) for mu in mu_grid)
    members = tuple(family_member(b, T0, f1, f2, g1) for g1 in g1s)

    g1_crit = invert_theta0(b, T0, f1, f2, 0.0)
    g2_crit = g2_from_equilibrium(b, b, b, g1_crit, T0, f1, f2)
    return HopfFamily(
        b=b,
        T0=T0,
        f1=f1,
        f2=f2,
        mu_range=_mu_bounds(b, T0, f1, f2),
        mu_grid=mu_grid,
        g1_of_mu=g1s,
        alpha_prime0=alpha_prime_at_zero(b, g2_crit, f2.deriv(T0)),
        members=members,
    )


def hill_T0_for_slope_fraction(f1: FeedbackSpec, fraction: float = 0.95) -> float:
    """T0 at which a Hill f1 reaches M(T0) = fraction * n.

    Near-saturation (fraction close to 1) maximizes the instability margin
    M(T0) - 8 available to the family.
    """
    if f1.kind != "hill":
        raise ValueError("T0 selection helper is defined for Hill feedbacks only")
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie in (0, 1)")
    _, beta, n = f1.params
    # M = n*u/(1+u) = fraction*n  <=>  u = beta*T^n = fraction/(1-fraction)
    return (fraction / ((1.0 - fraction) * beta)) ** (1.0 / n)
