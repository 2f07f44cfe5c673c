"""Core model definitions for the three-hormone feedback cascade.

The state is (R, L, T): releasing-hormone, tropic-hormone and effector-hormone
concentrations.  Production of R and L is inhibited by T through non-increasing
nonlinearities f1 and f2; the classical single-feedback oscillator is the
special case f2 == 0.

    dR/dt = -b1*R + f1(T)
    dL/dt =  g1*R - b2*L + f2(T)
    dT/dt =  g2*L - b3*T

All rate constants are strictly positive.  Rates are conventionally expressed
in 1/min; the declared unit is carried as metadata and never converted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import AdmissibilityError, ConfigError

__all__ = [
    "FeedbackSpec",
    "ModelParameters",
    "ModelInstance",
    "State",
    "eval_hill",
    "hill_derivative",
    "hill_feedback",
    "constant_feedback",
    "custom_feedback",
    "vector_field",
    "jacobian",
    "model_from_dict",
    "model_to_dict",
    "load_model",
]

# largest exponent for which exp() stays inside double range, with margin
_LOG_HUGE = 700.0


def _check_hill_params(K: float, beta: float, n: float) -> None:
    if not (K > 0 and beta > 0 and n > 0):
        raise ValueError(f"Hill parameters must be positive, got K={K}, beta={beta}, n={n}")


def eval_hill(K: float, beta: float, n: float, T: float) -> float:
    """Saturating inhibition K / (1 + beta*T**n).

    Evaluated through log-space for large beta*T**n so that strong saturation
    underflows to the correct limit 0 instead of overflowing.
    """
    _check_hill_params(K, beta, n)
    if T < 0:
        raise ValueError(f"concentration must be nonnegative, got T={T}")
    if T == 0.0:
        return K
    log_u = math.log(beta) + n * math.log(T)
    if log_u > _LOG_HUGE:
        return K * math.exp(-log_u)
    return K / (1.0 + math.exp(log_u))


def hill_derivative(K: float, beta: float, n: float, T: float) -> float:
    """d/dT of ``eval_hill``; always <= 0."""
    _check_hill_params(K, beta, n)
    if T < 0:
        raise ValueError(f"concentration must be nonnegative, got T={T}")
    if T == 0.0:
        if n > 1.0:
            return 0.0
        if n == 1.0:
            return -K * beta
        return -math.inf
    log_u = math.log(beta) + n * math.log(T)
    if log_u > _LOG_HUGE:
        return -(n * K / T) * math.exp(-log_u)
    u = math.exp(log_u)
    return -(n * K / T) * (u / (1.0 + u)) * (1.0 / (1.0 + u))


@dataclass(frozen=True)
class FeedbackSpec:
    """A non-increasing feedback nonlinearity together with its derivative.

    ``kind`` is one of ``"hill"`` (params ``(K, beta, n)``), ``"constant"``
    (params ``(c,)``) or ``"custom"`` (callables supplied by the caller).
    ``strictly_positive`` records whether f stays > 0 on [0, inf), which the
    releasing-hormone feedback must.
    """

    kind: str
    params: tuple = ()
    strictly_positive: bool = True
    fn: Callable[[float], float] | None = field(default=None, repr=False, compare=False)
    dfn: Callable[[float], float] | None = field(default=None, repr=False, compare=False)

    def __call__(self, T: float) -> float:
        if self.kind == "hill":
            K, beta, n = self.params
            return eval_hill(K, beta, n, T)
        if self.kind == "constant":
            return self.params[0]
        return float(self.fn(T))

    def deriv(self, T: float) -> float:
        if self.kind == "hill":
            K, beta, n = self.params
            return hill_derivative(K, beta, n, T)
        if self.kind == "constant":
            return 0.0
        return float(self.dfn(T))

    def describe(self) -> dict:
        """Loss-free dict form (for config round trips and report audit trails)."""
        if self.kind == "hill":
            K, beta, n = self.params
            return {"kind": "hill", "K": K, "beta": beta, "n": n}
        if self.kind == "constant":
            return {"kind": "constant", "c": self.params[0]}
        return {"kind": "custom", "strictly_positive": self.strictly_positive}


def hill_feedback(K: float, beta: float, n: float) -> FeedbackSpec:
    """Hill-type feedback K/(1 + beta*T**n); admissible by construction."""
    _check_hill_params(K, beta, n)
    return FeedbackSpec(kind="hill", params=(float(K), float(beta), float(n)), strictly_positive=True)


def constant_feedback(c: float) -> FeedbackSpec:
    """Constant production term; c = 0 recovers a missing feedback."""
    if c < 0 or not math.isfinite(c):
        raise ValueError(f"constant feedback must be finite and nonnegative, got {c}")
    return FeedbackSpec(kind="constant", params=(float(c),), strictly_positive=c > 0)


def custom_feedback(
    fn: Callable[[float], float],
    dfn: Callable[[float], float],
    *,
    strictly_positive: bool = True,
    check: bool = True,
    t_max: float = 1e3,
    grid_size: int = 10_000,
) -> FeedbackSpec:
    """Wrap user-supplied f and f' as an admissible feedback.

    Positivity and monotonicity are semantic properties of arbitrary callables,
    so they are checked by sampling ``grid_size`` points on [0, t_max] rather
    than proven.  Both the function and its analytic derivative must be given;
    no automatic differentiation is attempted.
    """
    spec = FeedbackSpec(kind="custom", params=(), strictly_positive=strictly_positive, fn=fn, dfn=dfn)
    if check:
        grid = np.linspace(0.0, t_max, grid_size)
        for T in grid:
            v, d = float(fn(T)), float(dfn(T))
            if strictly_positive and not v > 0:
                raise AdmissibilityError(f"f({T}) = {v} is not strictly positive")
            if v < 0:
                raise AdmissibilityError(f"f({T}) = {v} is negative")
            if d > 0:
                raise AdmissibilityError(f"f'({T}) = {d} is positive; feedback must be non-increasing")
    return spec


@dataclass(frozen=True)
class ModelParameters:
    """The five positive rate constants: clearing rates b1..b3, feedforward gains g1, g2."""

    b1: float
    b2: float
    b3: float
    g1: float
    g2: float

    def __post_init__(self):
        for name in ("b1", "b2", "b3", "g1", "g2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"rate constant {name} must be finite and > 0, got {v}")


class State(NamedTuple):
    """A point (R, L, T) of the nonnegative octant."""

    R: float
    L: float
    T: float


@dataclass(frozen=True)
class ModelInstance:
    """A fully specified cascade: rate constants plus the two feedbacks.

    f1 (inhibition of R production) must be strictly positive so that hormone
    production never shuts down completely; f2 (inhibition of L production)
    only needs to be nonnegative and may be identically zero, which reproduces
    the classical single-feedback oscillator exactly.
    """

    params: ModelParameters
    f1: FeedbackSpec
    f2: FeedbackSpec
    rate_unit: str = "1/min"

    def __post_init__(self):
        if not self.f1.strictly_positive:
            raise AdmissibilityError("f1 must be strictly positive on [0, inf)")

    @property
    def classical(self) -> bool:
        """True when f2 is identically zero."""
        return self.f2.kind == "constant" and self.f2.params[0] == 0.0


def vector_field(model: ModelInstance, state) -> np.ndarray:
    """Time derivative (dR/dt, dL/dt, dT/dt) at ``state``."""
    R, L, T = state
    p = model.params
    return np.array(
        [
            -p.b1 * R + model.f1(T),
            p.g1 * R - p.b2 * L + model.f2(T),
            p.g2 * L - p.b3 * T,
        ]
    )


def jacobian(model: ModelInstance, state) -> np.ndarray:
    """3x3 Jacobian of the vector field at ``state``."""
    T = state[2]
    p = model.params
    return np.array(
        [
            [-p.b1, 0.0, model.f1.deriv(T)],
            [p.g1, -p.b2, model.f2.deriv(T)],
            [0.0, p.g2, -p.b3],
        ]
    )


# ---------------------------------------------------------------------------
# structured-document loading

_FEEDBACK_KEYS = {"hill": {"K", "beta", "n"}, "constant": {"c"}}


def _feedback_from_dict(doc, where: str) -> FeedbackSpec:
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object, got {type(doc).__name__}")
    kind = doc.get("kind")
    if kind not in _FEEDBACK_KEYS:
        raise ConfigError(f"{where}: kind must be one of {sorted(_FEEDBACK_KEYS)}, got {kind!r}")
    expected = _FEEDBACK_KEYS[kind]
    extra = set(doc) - expected - {"kind"}
    missing = expected - set(doc)
    if extra or missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}, unknown keys {sorted(extra)}")
    try:
        if kind == "hill":
            return hill_feedback(float(doc["K"]), float(doc["beta"]), float(doc["n"]))
        return constant_feedback(float(doc["c"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def model_from_dict(doc: dict) -> ModelInstance:
    """Build a model from the structured key-value document format.

    Expected fields: b1, b2, b3, g1, g2 (rates), f1 and f2 (feedback objects
    with ``kind`` plus kind-specific parameters) and an optional ``rate_unit``
    string, recorded verbatim.
    """
    if not isinstance(doc, dict):
        raise ConfigError(f"model definition must be an object, got {type(doc).__name__}")
    known = {"b1", "b2", "b3", "g1", "g2", "f1", "f2", "rate_unit"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown model fields: {sorted(unknown)}")
    missing = {"b1", "b2", "b3", "g1", "g2", "f1", "f2"} - set(doc)
    if missing:
        raise ConfigError(f"missing model fields: {sorted(missing)}")
    try:
        params = ModelParameters(*(float(doc[k]) for k in ("b1", "b2", "b3", "g1", "g2")))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    f1 = _feedback_from_dict(doc["f1"], "f1")
    f2 = _feedback_from_dict(doc["f2"], "f2")
    if not f1.strictly_positive:
        raise ConfigError("f1 must be strictly positive (a constant f1 needs c > 0)")
    rate_unit = doc.get("rate_unit", "1/min")
    if not isinstance(rate_unit, str):
        raise ConfigError("rate_unit must be a string")
    return ModelInstance(params=params, f1=f1, f2=f2, rate_unit=rate_unit)


def model_to_dict(model: ModelInstance) -> dict:
    """Inverse of :func:`model_from_dict` for hill/constant feedbacks."""
    p = model.params
    return {
        "b1": p.b1,
        "b2": p.b2,
        "b3": p.b3,
        "g1": p.g1,
        "g2": p.g2,
        "f1": model.f1.describe(),
        "f2": model.f2.describe(),
        "rate_unit": model.rate_unit,
    }


def load_model(path) -> ModelInstance:
    """Load a model definition from a JSON document on disk."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed model file {path}: {exc}") from exc
    return model_from_dict(doc)
