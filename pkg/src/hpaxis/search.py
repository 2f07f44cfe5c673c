"""Scalar search utilities: monotone root finding and 1-D maximization.

Everything here assumes well-behaved scalar functions; the callers guarantee
monotonicity (root solves) or unimodality near the optimum (refinement).
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import BracketError

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def expand_bracket(
    fn: Callable[[float], float],
    lo: float,
    hi0: float = 1.0,
    max_doublings: int = 200,
    hi_cap: float = math.inf,
) -> tuple[float, float, float, float]:
    """Grow ``hi`` by doubling until ``fn(hi) > 0``; ``fn(lo)`` must be <= 0.

    Returns ``(lo, hi, f_lo, f_hi)``.  Raises :class:`BracketError` when the
    doubling cap or ``hi_cap`` is exhausted, which signals an ill-conditioned
    or inadmissible input.
    """
    f_lo = fn(lo)
    if f_lo == 0.0:
        return lo, lo, 0.0, 0.0
    if f_lo > 0.0:
        raise BracketError(f"fn({lo}) = {f_lo} > 0; no sign change to the right")
    hi = hi0
    for _ in range(max_doublings):
        hi = min(hi, hi_cap)
        f_hi = fn(hi)
        if f_hi > 0.0 or (f_hi == 0.0 and hi > lo):
            return lo, hi, f_lo, f_hi
        if hi >= hi_cap:
            break
        lo, f_lo = hi, f_hi
        hi *= 2.0
    raise BracketError(f"bracket expansion exceeded cap (last hi={hi}, fn={f_hi})")


def solve_increasing(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    ftol: float,
    xtol: float = 0.0,
    f_lo: float | None = None,
    f_hi: float | None = None,
    max_iter: int = 2000,
) -> tuple[float, float]:
    """Root of an increasing function on a sign-changing bracket.

    Regula-falsi with the Illinois modification plus a forced bisection every
    third iteration, so the bracket provably halves at least every three
    evaluations.  Stops once ``|fn(x)| <= ftol`` and the bracket width drops
    below ``max(xtol, 4*eps*|x|)``, or once the bracket hits the
    floating-point floor (steep residuals cannot reach an arbitrary ftol in
    finite precision).  Returns ``(x, fn(x))``.
    """
    eps = float(np.finfo(float).eps)
    a, b = float(lo), float(hi)
    fa_true = fn(a) if f_lo is None else f_lo
    fb_true = fn(b) if f_hi is None else f_hi
    if fa_true == 0.0:
        return a, 0.0
    if fb_true == 0.0:
        return b, 0.0
    if not (fa_true < 0.0 < fb_true):
        raise BracketError(f"no sign change on [{a}, {b}]: fn={fa_true}, {fb_true}")
    fa, fb = fa_true, fb_true  # secant copies; Illinois damps these only
    x, fx = (a, fa_true) if abs(fa_true) <= abs(fb_true) else (b, fb_true)
    side = 0
    for it in range(max_iter):
        floor = 4.0 * eps * max(abs(a), abs(b))
        width = b - a
        if abs(fx) <= ftol and width <= max(xtol, floor):
            return x, fx
        if width <= floor:
            # the root is located to machine precision; report the best endpoint
            return (a, fa_true) if abs(fa_true) <= abs(fb_true) else (b, fb_true)
        if it % 3 == 2:
            x = 0.5 * (a + b)
        else:
            # Illinois: damp the stagnant endpoint so the secant keeps moving
            denom = fb - fa
            x = b - fb * (b - a) / denom if denom != 0.0 else 0.5 * (a + b)
            if not (a < x < b):
                x = 0.5 * (a + b)
        fx = fn(x)
        if fx == 0.0:
            return x, 0.0
        if fx < 0.0:
            a, fa, fa_true = x, fx, fx
            if side == -1:
                fb *= 0.5
            side = -1
        else:
            b, fb, fb_true = x, fx, fx
            if side == +1:
                fa *= 0.5
            side = +1
    raise BracketError(f"root refinement did not converge in {max_iter} iterations")


def golden_max(fn: Callable[[float], float], lo: float, hi: float, *, iters: int = 200) -> tuple[float, float]:
    """Golden-section maximization of ``fn`` on [lo, hi]; returns (argmax, max)."""
    a, b = float(lo), float(hi)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if b - a <= 1e-14 * max(1.0, abs(a), abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    return (c, fc) if fc >= fd else (d, fd)


def log_grid_max(
    fn: Callable[[float], float],
    t_max: float,
    grid_size: int,
    *,
    decades: float = 12.0,
) -> tuple[float, float]:
    """Scan a log-spaced grid on (0, t_max], then golden-refine the best cell."""
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    grid = np.logspace(math.log10(t_max) - decades, math.log10(t_max), grid_size)
    vals = np.array([fn(t) for t in grid])
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid_size - 1)]
    t_best, v_best = golden_max(fn, lo, hi)
    if vals[i] > v_best:
        return float(grid[i]), float(vals[i])
    return float(t_best), float(v_best)
