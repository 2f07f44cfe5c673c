"""Oscillation detection and omega-limit classification of trajectories.

A bounded solution "oscillates" (in Yakubovich's sense) when its liminf and
limsup differ, i.e. it neither settles nor escapes.  Over a finite trajectory
this is estimated from the tail: min/max over the trailing ``tail_fraction``
of the run, with a relative threshold separating genuine limit cycles from
numerically damped convergence.

The omega-limit set of any bounded solution of a tridiagonal feedback chain
is an equilibrium, a closed orbit, or an equilibrium plus a homoclinic orbit.
The extended two-feedback cascade becomes tridiagonal after the linear change
of variables (x0, x1, x2) = (T, L + a*T, R) provided the second feedback is
shallow enough:

    sup |f2'| <= (b3 - b2)^2 / (4*g2)

with the shift a = (b2 - b3)/(2*g2) maximizing the coupling margin.  Finite
numerics cannot certify a homoclinic orbit, so classification is a trichotomy
{equilibrium, periodic, undetermined} and homoclinic-like tails land in
"undetermined".
"""

from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory, integrate
from .equilibria import EquilibriumPoint
from .errors import NumericalError, PeakDetectionError, TrajectoryTooShort
from .model import FeedbackSpec, ModelInstance
from .search import log_grid_max

__all__ = [
    "OscillationReport",
    "TridiagonalCheck",
    "SampleSummary",
    "detect_y_oscillation",
    "measure_amplitude_period",
    "classify_omega_limit",
    "mallet_parret_condition",
    "sample_oscillation_fraction",
    "analyze_trajectory",
]

DEFAULT_TAIL_FRACTION = 0.5
DEFAULT_THRESHOLD = 1e-4
_MIN_TAIL_SAMPLES = 8
_CV_LIMIT = 0.01  # spacing/height coefficient of variation for "periodic"


@dataclass
class OscillationReport:
    """Tail statistics, oscillation flags and (optionally) cycle metrics."""

    tail_start: float
    tail_min: np.ndarray
    tail_max: np.ndarray
    tail_mean: np.ndarray
    y_oscillatory_components: tuple[bool, bool, bool]
    y_oscillatory: bool
    threshold: float
    amplitudes: np.ndarray | None = None
    period: float | None = None
    period_std: float | None = None
    n_peaks: int | None = None
    omega_class: str | None = None

    def as_dict(self) -> dict:
        return {
            "tail_start": self.tail_start,
            "tail_min": list(self.tail_min),
            "tail_max": list(self.tail_max),
            "tail_mean": list(self.tail_mean),
            "y_oscillatory_components": list(self.y_oscillatory_components),
            "y_oscillatory": self.y_oscillatory,
            "threshold": self.threshold,
            "amplitudes": None if self.amplitudes is None else list(self.amplitudes),
            "period": self.period,
            "period_std": self.period_std,
            "n_peaks": self.n_peaks,
            "omega_class": self.omega_class,
        }


@dataclass(frozen=True)
class TridiagonalCheck:
    """Outcome of the slope-bound test enabling the tridiagonal reduction."""

    slope_bound: float
    sup_abs_f2_prime: float
    satisfied: bool
    shift_a: float | None
    strict_f1: bool
    sign_conditions_ok: bool | None

    def as_dict(self) -> dict:
        return {
            "slope_bound": self.slope_bound,
            "sup_abs_f2_prime": self.sup_abs_f2_prime,
            "satisfied": self.satisfied,
            "shift_a": self.shift_a,
            "strict_f1": self.strict_f1,
            "sign_conditions_ok": self.sign_conditions_ok,
        }


def _tail(traj: Trajectory, tail_fraction: float):
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError("tail_fraction must lie in (0, 1]")
    t_cut = traj.t_end * (1.0 - tail_fraction)
    i0 = int(np.searchsorted(traj.times, t_cut, side="left"))
    if len(traj.times) - i0 < _MIN_TAIL_SAMPLES:
        raise TrajectoryTooShort(
            f"tail from t={t_cut} holds {len(traj.times) - i0} samples; need {_MIN_TAIL_SAMPLES}"
        )
    return t_cut, traj.times[i0:], traj.states[i0:]


def detect_y_oscillation(
    traj: Trajectory,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
    threshold: float = DEFAULT_THRESHOLD,
) -> OscillationReport:
    """Estimate liminf/limsup per component over the tail and flag the gaps.

    A component oscillates when (tail max - tail min) exceeds
    ``threshold * (1 + |tail mean|)``; the solution oscillates when at least
    one component does.
    """
    t_cut, _, states = _tail(traj, tail_fraction)
    lo = states.min(axis=0)
    hi = states.max(axis=0)
    mean = states.mean(axis=0)
    flags = tuple(bool(hi[i] - lo[i] > threshold * (1.0 + abs(mean[i]))) for i in range(3))
    return OscillationReport(
        tail_start=float(t_cut),
        tail_min=lo,
        tail_max=hi,
        tail_mean=mean,
        y_oscillatory_components=flags,
        y_oscillatory=any(flags),
        threshold=threshold,
    )


def _refine_peak(t1, t2, t3, y1, y2, y3):
    # vertex of the parabola through three (possibly non-uniform) samples
    den = (t2 - t1) * (y2 - y3) - (t2 - t3) * (y2 - y1)
    if den == 0.0:
        return t2, y2
    tp = t2 - 0.5 * (((t2 - t1) ** 2) * (y2 - y3) - ((t2 - t3) ** 2) * (y2 - y1)) / den
    if not t1 <= tp <= t3:
        return t2, y2
    # quadratic value at the vertex via Lagrange form
    l1 = (tp - t2) * (tp - t3) / ((t1 - t2) * (t1 - t3))
    l2 = (tp - t1) * (tp - t3) / ((t2 - t1) * (t2 - t3))
    l3 = (tp - t1) * (tp - t2) / ((t3 - t1) * (t3 - t2))
    return tp, y1 * l1 + y2 * l2 + y3 * l3


def _find_peaks(times: np.ndarray, values: np.ndarray):
    """Local maxima of the sampled signal, refined through quadratic fits.

    Only prominent maxima (upper half of the sampled range) count; this keeps
    slow-transient ripple and float noise out of the period statistics.
    """
    lo = values.min()
    hi = values.max()
    floor = lo + 0.5 * (hi - lo)
    peak_t = []
    peak_v = []
    for i in range(1, len(values) - 1):
        if values[i] - values[i - 1] > 0.0 and values[i + 1] - values[i] <= 0.0 and values[i] > floor:
            tp, vp = _refine_peak(times[i - 1], times[i], times[i + 1], values[i - 1], values[i], values[i + 1])
            peak_t.append(tp)
            peak_v.append(vp)
    return np.array(peak_t), np.array(peak_v)


def measure_amplitude_period(
    traj: Trajectory, tail_fraction: float = DEFAULT_TAIL_FRACTION
) -> tuple[np.ndarray, float, float, int]:
    """Tail amplitudes (max - min per component) and the cycle period.

    The period is the mean spacing of successive maxima of T(t), the feedback
    variable; returns ``(amplitudes, period, period_std, n_peaks)``.  Raises
    :class:`PeakDetectionError` with fewer than 3 peaks.
    """
    _, times, states = _tail(traj, tail_fraction)
    amplitudes = states.max(axis=0) - states.min(axis=0)
    peak_t, _ = _find_peaks(times, states[:, 2])
    if len(peak_t) < 3:
        raise PeakDetectionError(f"found {len(peak_t)} peaks in the tail; need at least 3")
    spacing = np.diff(peak_t)
    return amplitudes, float(spacing.mean()), float(spacing.std()), int(len(peak_t))


def classify_omega_limit(
    traj: Trajectory,
    equilibrium: EquilibriumPoint,
    tol: float = 1e-6,
) -> str:
    """Trichotomy {"equilibrium", "periodic", "undetermined"} for the tail.

    "equilibrium" when the tail stays within ``tol`` (relative, per component)
    of the equilibrium; "periodic" when peak spacings and heights have both
    stabilized (CV < 1%) and the orbit stays bounded away from the
    equilibrium; anything else, including homoclinic-like behavior that
    finite-time numerics cannot certify, is "undetermined".
    """
    _, times, states = _tail(traj, DEFAULT_TAIL_FRACTION)
    eq = equilibrium.as_array()
    scale = 1.0 + np.abs(eq)
    dev = np.abs(states - eq) / scale
    if dev.max() <= tol:
        return "equilibrium"
    peak_t, peak_v = _find_peaks(times, states[:, 2])
    if len(peak_t) >= 4:
        spacing = np.diff(peak_t)
        cv_spacing = spacing.std() / spacing.mean()
        cv_height = peak_v.std() / abs(peak_v.mean()) if peak_v.mean() != 0 else math.inf
        bounded_away = dev.max(axis=1).min() > 10.0 * tol
        if cv_spacing < _CV_LIMIT and cv_height < _CV_LIMIT and bounded_away:
            return "periodic"
    return "undetermined"


def analyze_trajectory(
    traj: Trajectory,
    equilibrium: EquilibriumPoint | None = None,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
    threshold: float = DEFAULT_THRESHOLD,
    omega_tol: float = 1e-6,
) -> OscillationReport:
    """Detection, cycle metrics and omega-limit class in one report."""
    report = detect_y_oscillation(traj, tail_fraction, threshold)
    if report.y_oscillatory:
        try:
            amps, period, period_std, n_peaks = measure_amplitude_period(traj, tail_fraction)
            report.amplitudes = amps
            report.period = period
            report.period_std = period_std
            report.n_peaks = n_peaks
        except PeakDetectionError:
            pass
    else:
        report.amplitudes = report.tail_max - report.tail_min
    if equilibrium is not None:
        report.omega_class = classify_omega_limit(traj, equilibrium, omega_tol)
        if report.omega_class == "equilibrium" and report.y_oscillatory:
            # the definitions make these mutually exclusive; trust the gap
            report.omega_class = "undetermined"
    return report


def _sup_abs_f2_prime(f2: FeedbackSpec, t_max: float, grid_size: int) -> float:
    if f2.kind == "constant":
        return 0.0
    if f2.kind == "hill":
        K, beta, n = f2.params
        if n < 1.0:
            return math.inf  # |f2'| blows up as T -> 0
        if n == 1.0:
            return K * beta  # attained at T = 0
        # |f2'| peaks where beta*T^n = (n-1)/(n+1)
        t_star = ((n - 1.0) / ((n + 1.0) * beta)) ** (1.0 / n)
        return abs(f2.deriv(t_star))
    _, best = log_grid_max(lambda t: abs(f2.deriv(t)), t_max, grid_size)
    return max(best, abs(f2.deriv(0.0)))


def mallet_parret_condition(
    model: ModelInstance, t_max: float = 1e3, grid_size: int = 10_000
) -> TridiagonalCheck:
    """Check the slope bound sup|f2'| <= (b3 - b2)^2/(4*g2).

    When satisfied, the report carries the tridiagonalizing shift
    a = (b2 - b3)/(2*g2) and verifies the transformed system's sign
    conditions on a grid; ``strict_f1`` separately records whether f1' < 0
    held at every sample (needed for the strict-monotonicity reading).
    """
    p = model.params
    bound = (p.b3 - p.b2) ** 2 / (4.0 * p.g2)
    sup_f2p = _sup_abs_f2_prime(model.f2, t_max, grid_size)
    satisfied = sup_f2p <= bound

    grid = np.linspace(0.0, t_max, min(grid_size, 2001))
    strict_f1 = bool(all(model.f1.deriv(t) < 0.0 for t in grid))

    shift_a = None
    sign_ok = None
    if satisfied:
        shift_a = (p.b2 - p.b3) / (2.0 * p.g2)
        margin = shift_a * (p.b2 - p.b3) - p.g2 * shift_a**2
        coupling = [margin + model.f2.deriv(t) for t in grid]
        sign_ok = bool(p.g1 > 0 and p.g2 > 0 and min(coupling) >= -1e-12 * (1.0 + bound))
    return TridiagonalCheck(
        slope_bound=bound,
        sup_abs_f2_prime=sup_f2p,
        satisfied=satisfied,
        shift_a=shift_a,
        strict_f1=strict_f1,
        sign_conditions_ok=sign_ok,
    )


@dataclass(frozen=True)
class SampleSummary:
    """Outcome of a random-start oscillation survey."""

    n_samples: int
    n_oscillatory: int
    n_failed: int

    @property
    def fraction(self) -> float:
        ok = self.n_samples - self.n_failed
        return self.n_oscillatory / ok if ok else math.nan


def _probe_one(args):
    model, x0, t_end, rtol, atol, tail_fraction, threshold = args
    try:
        traj = integrate(model, x0, t_end, rtol=rtol, atol=atol)
        return bool(detect_y_oscillation(traj, tail_fraction, threshold).y_oscillatory)
    except NumericalError:
        return None


def sample_oscillation_fraction(
    model: ModelInstance,
    n_samples: int,
    box,
    t_end: float,
    *,
    seed: int = 0,
    jobs: int = 1,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
    threshold: float = DEFAULT_THRESHOLD,
) -> SampleSummary:
    """Fraction of random starts in ``box`` whose orbit oscillates.

    ``box`` is a (3, 2) array of per-component [low, high] bounds in the
    nonnegative octant.  Starts are drawn up front from a seeded generator so
    results do not depend on ``jobs``.  Integrator failures are counted
    separately, not folded into the fraction.
    """
    if n_samples <= 0:
        raise ValueError("n_samples must be positive; an empty survey has no fraction")
    box = np.asarray(box, dtype=float)
    if box.shape != (3, 2) or (box[:, 0] > box[:, 1]).any() or (box < 0).any():
        raise ValueError("box must be (3, 2) nonnegative [low, high] bounds")
    rng = np.random.default_rng(seed)
    starts = rng.uniform(box[:, 0], box[:, 1], size=(n_samples, 3))
    work = [(model, x0, t_end, rtol, atol, tail_fraction, threshold) for x0 in starts]
    if jobs > 1:
        with multiprocessing.Pool(jobs) as pool:
            results = pool.map(_probe_one, work)
    else:
        results = [_probe_one(w) for w in work]
    n_failed = sum(r is None for r in results)
    n_osc = sum(bool(r) for r in results if r is not None)
    return SampleSummary(n_samples=n_samples, n_oscillatory=n_osc, n_failed=n_failed)
