"""Trajectory integration with an adaptive embedded Runge-Kutta 5(4) pair.

Two interchangeable kernels implement the same stepper: a compiled extension
(``hpaxis._kernel``, built from Cython) covering the parametric hill/constant
feedbacks, and a pure-Python fallback (``hpaxis._kernel_py``) that also
handles arbitrary custom feedback callables.  The compiled kernel is selected
at import when available; ``backend="python"``/``"compiled"`` forces a side.

Defaults are deliberately tight (rtol 1e-9, atol 1e-12): the discriminants of
interest are of order 1e-4, so instabilities grow slowly and sloppy tolerances
mask the divergence.  Output collects every accepted step plus a configurable
equidistant grid filled in by the stepper's 4th-order dense interpolant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernel_py
from .model import ModelInstance

try:
    from . import _kernel

    HAVE_COMPILED = True
except ImportError:  # pure-Python install
    _kernel = None
    HAVE_COMPILED = False

__all__ = ["Trajectory", "integrate", "HAVE_COMPILED"]

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12

_KIND_CODES = {"constant": 0, "hill": 1}


@dataclass(frozen=True)
class Trajectory:
    """An integrated orbit: strictly increasing times with (R, L, T) rows."""

    times: np.ndarray
    states: np.ndarray
    rtol: float
    atol: float
    accepted_steps: int
    rejected_steps: int
    backend: str

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def R(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def L(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def T(self) -> np.ndarray:
        return self.states[:, 2]


def _feedback_code(fb):
    kind = _KIND_CODES.get(fb.kind)
    if kind is None:
        return None
    if fb.kind == "hill":
        K, beta, n = fb.params
        return kind, K, beta, n, 0.0
    return kind, 0.0, 1.0, 1.0, fb.params[0]


def _python_rhs(model: ModelInstance):
    # trial RK stages may probe slightly negative T; the feedbacks are
    # extended continuously by their value at 0 (accepted states never
    # leave the octant thanks to the rejection rule)
    p = model.params
    f1, f2 = model.f1, model.f2
    b1, b2, b3, g1, g2 = p.b1, p.b2, p.b3, p.g1, p.g2

    def rhs(y):
        T = y[2] if y[2] > 0.0 else 0.0
        return np.array([-b1 * y[0] + f1(T), g1 * y[0] - b2 * y[1] + f2(T), g2 * y[1] - b3 * y[2]])

    return rhs


def integrate(
    model: ModelInstance,
    x0,
    t_end: float,
    *,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    max_step: float = math.inf,
    grid_points: int = 2001,
    backend: str = "auto",
) -> Trajectory:
    """Integrate the model from ``x0`` over [0, t_end].

    ``grid_points`` sets the equidistant dense-output grid (in addition to the
    accepted steps); ``backend`` is ``"auto"``, ``"compiled"`` or ``"python"``.
    Raises ``ValueError`` for an invalid initial state and
    :class:`~hpaxis.errors.StepSizeUnderflow` when the tolerance budget cannot
    be met.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (3,):
        raise ValueError(f"initial state must have 3 components, got shape {x0.shape}")
    if not np.isfinite(x0).all() or (x0 < 0).any():
        raise ValueError(f"initial state must be finite and in the nonnegative octant, got {x0}")
    if not (t_end > 0 and math.isfinite(t_end)):
        raise ValueError(f"t_end must be positive and finite, got {t_end}")
    if rtol <= 0 or atol <= 0:
        raise ValueError("rtol and atol must be positive")
    if grid_points >= 2:
        t_grid = np.linspace(0.0, t_end, grid_points)
    else:
        t_grid = np.empty(0)

    f1c = _feedback_code(model.f1)
    f2c = _feedback_code(model.f2)
    compiled_ok = HAVE_COMPILED and f1c is not None and f2c is not None
    if backend == "auto":
        use_compiled = compiled_ok
    elif backend == "compiled":
        if not compiled_ok:
            raise ValueError(
                "compiled backend unavailable"
                + ("" if HAVE_COMPILED else " (extension not built)")
                + ("" if f1c and f2c else "; custom feedbacks need the python backend")
            )
        use_compiled = True
    elif backend == "python":
        use_compiled = False
    else:
        raise ValueError(f"unknown backend {backend!r}")

    p = model.params
    if use_compiled:
        out = _kernel.integrate_model(
            p.b1, p.b2, p.b3, p.g1, p.g2, *f1c, *f2c, x0, t_end, rtol, atol, max_step, t_grid
        )
        chosen = "compiled"
    else:
        out = _kernel_py.integrate_adaptive(_python_rhs(model), x0, t_end, rtol, atol, max_step, t_grid)
        chosen = "python"
    t_steps, y_steps, t_dense, y_dense, n_acc, n_rej = out

    times = np.concatenate([t_steps, t_dense])
    states = np.concatenate([y_steps, y_dense.reshape(-1, 3)])
    order = np.argsort(times, kind="stable")
    times = times[order]
    states = states[order]
    keep = np.ones(len(times), dtype=bool)
    keep[1:] = np.diff(times) > 0.0
    return Trajectory(
        times=times[keep],
        states=states[keep],
        rtol=rtol,
        atol=atol,
        accepted_steps=n_acc,
        rejected_steps=n_rej,
        backend=chosen,
    )
