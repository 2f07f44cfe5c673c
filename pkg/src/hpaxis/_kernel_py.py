"""Pure-Python adaptive Dormand-Prince 5(4) kernel.

Reference implementation of the integration core; `hpaxis._kernel` is the
compiled twin with identical arithmetic for the parametric feedback kinds.
Kept free of per-model knowledge: the right-hand side arrives as a callable
on 3-vectors.

Step acceptance enforces, besides the embedded error estimate, the model's
positivity: a trial state with any component below -atol is rejected and
retried with a halved step, because clipping would distort the dynamics while
the exact flow never leaves the nonnegative octant.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import StepSizeUnderflow

# Dormand-Prince 5(4) tableau
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
A71, A73, A74, A75, A76 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# 5th-order minus embedded 4th-order weights
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)
# continuous-extension weights (4th-order interpolant)
D1 = -12715105075.0 / 11282082432.0
D3 = 87487479700.0 / 32700410799.0
D4 = -10690763975.0 / 1880347072.0
D5 = 701980252875.0 / 199316789632.0
D6 = -1453857185.0 / 822651844.0
D7 = 69997945.0 / 29380423.0

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 10.0
_ORDER_EXP = 0.2  # 1/(order of the propagating method)


def _rms(v: np.ndarray) -> float:
    return math.sqrt(float(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) / 3.0)


def _initial_step(f, y0, f0, t_end, rtol, atol, max_step):
    sc = atol + rtol * np.abs(y0)
    d0 = _rms(y0 / sc)
    d1 = _rms(f0 / sc)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * (d0 / d1)
    h0 = min(h0, t_end, max_step)
    y1 = y0 + h0 * f0
    f1 = f(y1)
    d2 = _rms((f1 - f0) / sc) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** _ORDER_EXP
    return min(100.0 * h0, h1, max_step, t_end)


def integrate_adaptive(f, x0, t_end, rtol, atol, max_step, t_grid):
    """Integrate dy/dt = f(y) over [0, t_end] with dense sampling on t_grid.

    Returns ``(t_steps, y_steps, t_dense, y_dense, n_accepted, n_rejected)``
    where the step arrays hold all accepted steps (including t = 0) and the
    dense arrays hold interpolated values at the grid times in (0, t_end].
    """
    y = np.asarray(x0, dtype=float).copy()
    t = 0.0
    k1 = np.asarray(f(y), dtype=float)

    t_steps = [0.0]
    y_steps = [y.copy()]
    t_dense: list[float] = []
    y_dense: list[np.ndarray] = []
    gi = int(np.searchsorted(t_grid, 0.0, side="right"))

    h = _initial_step(f, y, k1, t_end, rtol, atol, max_step)
    n_accepted = 0
    n_rejected = 0
    last_rejected = False

    while t < t_end:
        # stretch near-final steps onto t_end so no micro-gap is left behind
        h = min(h, max_step)
        if 1.01 * h >= t_end - t:
            h = t_end - t
            is_last = True
        else:
            is_last = False
        if h <= 1e-14 * max(1.0, t) or t + h == t:
            raise StepSizeUnderflow(f"step size {h} unusable at t={t} (accepted {n_accepted})")

        k2 = f(y + h * (A21 * k1))
        k3 = f(y + h * (A31 * k1 + A32 * k2))
        k4 = f(y + h * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = f(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = f(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        y1 = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6)

        if not np.isfinite(y1).all() or (y1 < -atol).any():
            # positivity violation or blow-up: retry with a halved step
            n_rejected += 1
            last_rejected = True
            h *= 0.5
            continue

        k7 = np.asarray(f(y1), dtype=float)
        err_vec = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y1))
        err = _rms(err_vec / sc)

        if err > 1.0:
            n_rejected += 1
            last_rejected = True
            h *= max(_FAC_MIN, _SAFETY * err ** (-_ORDER_EXP))
            continue

        # accepted: build the continuous extension and drain grid points
        t_new = t_end if is_last else t + h
        if gi < len(t_grid) and t_grid[gi] <= t_new:
            ydiff = y1 - y
            bspl = h * k1 - ydiff
            rcont4 = ydiff - h * k7 - bspl
            rcont5 = h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7)
            while gi < len(t_grid) and t_grid[gi] <= t_new:
                theta = (t_grid[gi] - t) / h
                theta1 = 1.0 - theta
                yd = y + theta * (ydiff + theta1 * (bspl + theta * (rcont4 + theta1 * rcont5)))
                t_dense.append(float(t_grid[gi]))
                y_dense.append(yd)
                gi += 1

        t = t_new
        y = y1
        k1 = k7
        n_accepted += 1
        t_steps.append(t)
        y_steps.append(y.copy())

        if err == 0.0:
            fac = _FAC_MAX
        else:
            fac = min(_FAC_MAX, max(_FAC_MIN, _SAFETY * err ** (-_ORDER_EXP)))
        if last_rejected:
            fac = min(fac, 1.0)
        h *= fac
        last_rejected = False

    t_dense_arr = np.array(t_dense) if t_dense else np.empty(0)
    y_dense_arr = np.array(y_dense) if y_dense else np.empty((0, 3))
    return (
        np.array(t_steps),
        np.array(y_steps),
        t_dense_arr,
        y_dense_arr,
        n_accepted,
        n_rejected,
    )
