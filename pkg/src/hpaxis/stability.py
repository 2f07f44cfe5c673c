"""Local stability analysis at the equilibrium.

The characteristic polynomial of the Jacobian at the equilibrium is

    lambda^3 + c2*lambda^2 + c1*lambda + c0,
    c2 = a1,  c1 = a2 - g2*f2'(T0),  c0 = a3 - g2*[b1*f2'(T0) + g1*f1'(T0)]

with a1 = b1+b2+b3, a2 = b1*b2+b1*b3+b2*b3, a3 = b1*b2*b3.  All coefficients
are positive, so by Routh-Hurwitz the equilibrium is stable exactly when
c2*c1 > c0, i.e. when the discriminant

    theta0 = c0 - c1*c2 = a3 - a1*a2 + g2*[(b2+b3)*f2'(T0) - g1*f1'(T0)]

is negative.  At theta0 = 0 the spectrum is a negative real root plus a pure
imaginary pair: the bifurcation configuration.

The normalized feedback slope M(T) = -T*f1'(T)/f1(T) gives a parameter-free
verdict: if M stays below 8 no choice of positive rates can destabilize the
equilibrium, while sup M > 8 makes instability reachable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibria import EquilibriumPoint
from .errors import NumericalError
from .model import FeedbackSpec, ModelInstance
from .search import log_grid_max

__all__ = [
    "StabilityReport",
    "SlopeVerdict",
    "coefficient_sums",
    "theta0",
    "characteristic_coefficients",
    "cubic_roots",
    "companion_roots",
    "classify_local",
    "M_of_T",
    "sup_M",
]

SLOPE_THRESHOLD = 8.0


@dataclass(frozen=True)
class StabilityReport:
    """Discriminant, spectrum and verdict for one equilibrium."""

    theta0: float
    a1: float
    a2: float
    a3: float
    eigenvalues: tuple[complex, complex, complex]
    verdict: str  # "stable" | "unstable" | "critical"
    critical_tol: float

    @property
    def max_real_part(self) -> float:
        return max(z.real for z in self.eigenvalues)


@dataclass(frozen=True)
class SlopeVerdict:
    """Parameter-independent verdict from the supremum of M(T)."""

    sup_m: float
    argmax_t: float
    classification: str  # "always-stable" | "boundary" | "instability-possible"


def coefficient_sums(params) -> tuple[float, float, float]:
    """Elementary symmetric sums (a1, a2, a3) of the clearing rates."""
    b1, b2, b3 = params.b1, params.b2, params.b3
    return b1 + b2 + b3, b1 * b2 + b1 * b3 + b2 * b3, b1 * b2 * b3


def theta0(model: ModelInstance, equilibrium: EquilibriumPoint) -> float:
    """Routh-Hurwitz discriminant; the equilibrium is stable iff theta0 < 0."""
    p = model.params
    a1, a2, a3 = coefficient_sums(p)
    T0 = equilibrium.T0
    return a3 - a1 * a2 + p.g2 * ((p.b2 + p.b3) * model.f2.deriv(T0) - p.g1 * model.f1.deriv(T0))


def characteristic_coefficients(model: ModelInstance, equilibrium: EquilibriumPoint) -> tuple[float, float, float]:
    """(c2, c1, c0) of the monic characteristic cubic at the equilibrium."""
    p = model.params
    a1, a2, a3 = coefficient_sums(p)
    T0 = equilibrium.T0
    f1p = model.f1.deriv(T0)
    f2p = model.f2.deriv(T0)
    return a1, a2 - p.g2 * f2p, a3 - p.g2 * (p.b1 * f2p + p.g1 * f1p)


def _polish_root(z: complex, c2: float, c1: float, c0: float) -> complex:
    # a few Newton steps push the closed-form roots to machine accuracy
    for _ in range(4):
        f = ((z + c2) * z + c1) * z + c0
        df = (3.0 * z + 2.0 * c2) * z + c1
        if df == 0:
            break
        step = f / df
        z -= step
        if abs(step) <= 1e-17 * (1.0 + abs(z)):
            break
    return z


def cubic_roots(c2: float, c1: float, c0: float) -> np.ndarray:
    """All roots of lambda^3 + c2*lambda^2 + c1*lambda + c0.

    Closed-form (trigonometric for three real roots, Cardano otherwise)
    followed by Newton polishing; a conjugate pair is returned exactly
    conjugate.
    """
    # depressed cubic y^3 + p*y + q with lambda = y - c2/3
    shift = c2 / 3.0
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2**3 / 27.0 - c2 * c1 / 3.0 + c0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc <= 0.0:
        # three real roots
        m = 2.0 * math.sqrt(max(-p / 3.0, 0.0))
        if m == 0.0:
            ys = [0.0, 0.0, 0.0]
        else:
            arg = min(1.0, max(-1.0, 3.0 * q / (p * m)))
            phi = math.acos(arg) / 3.0
            ys = [m * math.cos(phi - 2.0 * math.pi * k / 3.0) for k in range(3)]
        roots = [complex(y - shift, 0.0) for y in ys]
    else:
        sq = math.sqrt(disc)
        u = -q / 2.0 + sq
        v = -q / 2.0 - sq
        cu = math.copysign(abs(u) ** (1.0 / 3.0), u)
        cv = math.copysign(abs(v) ** (1.0 / 3.0), v)
        y1 = cu + cv
        real = complex(y1 - shift, 0.0)
        re = -y1 / 2.0 - shift
        im = math.sqrt(3.0) / 2.0 * abs(cu - cv)
        roots = [real, complex(re, im), complex(re, -im)]

    roots = [_polish_root(z, c2, c1, c0) for z in roots]
    # enforce exact conjugacy of the non-real pair
    imags = [abs(z.imag) for z in roots]
    k = int(np.argmin(imags))
    others = [roots[i] for i in range(3) if i != k]
    if any(abs(z.imag) > 0 for z in others):
        z = others[0] if others[0].imag > 0 else others[1]
        pair = (complex(z.real, abs(z.imag)), complex(z.real, -abs(z.imag)))
        roots = [complex(roots[k].real, 0.0), *pair]
    if any(not (math.isfinite(z.real) and math.isfinite(z.imag)) for z in roots):
        raise NumericalError("cubic root extraction produced non-finite values")
    return np.array(roots, dtype=complex)


def companion_roots(c2: float, c1: float, c0: float) -> np.ndarray:
    """Companion-matrix fallback for the same cubic (numpy eigensolver)."""
    return np.roots([1.0, c2, c1, c0])


def default_critical_tol(a1: float, a2: float) -> float:
    # theta0 scales with cubes of the rates; keep the dead band scale-aware
    return 1e-9 * max(1.0, a1 * a2)


def classify_local(
    model: ModelInstance,
    equilibrium: EquilibriumPoint,
    critical_tol: float | None = None,
) -> StabilityReport:
    """Spectrum plus verdict at the equilibrium.

    The verdict follows the sign of theta0, with a +-critical_tol dead band
    around zero mapped to "critical".  In the critical band the non-real pair
    satisfies |Re| <= critical_tol / (2*c1), an exact consequence of the
    characteristic cubic's coefficient identities.
    """
    a1, a2, a3 = coefficient_sums(model.params)
    if critical_tol is None:
        critical_tol = default_critical_tol(a1, a2)
    c2, c1, c0 = characteristic_coefficients(model, equilibrium)
    th = c0 - c1 * c2
    eigs = cubic_roots(c2, c1, c0)
    order = np.argsort(eigs.real)
    eigs = eigs[order]
    if abs(th) <= critical_tol:
        verdict = "critical"
    elif th < 0:
        verdict = "stable"
    else:
        verdict = "unstable"
    return StabilityReport(
        theta0=th,
        a1=a1,
        a2=a2,
        a3=a3,
        eigenvalues=tuple(complex(z) for z in eigs),
        verdict=verdict,
        critical_tol=critical_tol,
    )


def M_of_T(f1: FeedbackSpec, T: float) -> float:
    """Normalized logarithmic slope -T*f1'(T)/f1(T), nonnegative for T > 0."""
    if T <= 0:
        raise ValueError(f"M(T) requires T > 0, got {T}")
    if f1.kind == "hill":
        # closed form n*u/(1+u) with u = beta*T**n, evaluated in log space so
        # that deep saturation does not hit 0/0
        K, beta, n = f1.params
        log_u = math.log(beta) + n * math.log(T)
        if log_u < -700.0:
            return n * math.exp(log_u)
        if log_u > 700.0:
            return n
        u = math.exp(log_u)
        return n * u / (1.0 + u)
    value = f1(T)
    if value <= 0:
        raise ValueError(f"M(T) requires f1(T) > 0, got f1({T}) = {value}")
    return -T * f1.deriv(T) / value


def sup_M(
    f1: FeedbackSpec,
    t_max: float = 1e3,
    grid_size: int = 10_000,
    boundary_tol: float = 1e-9,
) -> SlopeVerdict:
    """Supremum of M over (0, t_max] and the resulting stability class.

    Hill feedbacks bypass the scan: M increases to its supremum n as T grows,
    so sup M = n exactly (approached, not attained).  Other kinds are scanned
    on a log-spaced grid and refined by golden section around the best cell.
    """
    if f1.kind == "hill":
        sup_m, argmax = f1.params[2], math.inf
    elif f1.kind == "constant":
        sup_m, argmax = 0.0, math.nan
    else:
        argmax, sup_m = log_grid_max(lambda t: M_of_T(f1, t), t_max, grid_size)
    if abs(sup_m - SLOPE_THRESHOLD) <= boundary_tol:
        cls = "boundary"
    elif sup_m < SLOPE_THRESHOLD:
        cls = "always-stable"
    else:
        cls = "instability-possible"
    return SlopeVerdict(sup_m=float(sup_m), argmax_t=float(argmax), classification=cls)
