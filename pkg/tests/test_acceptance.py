"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see every line.

Criterion 3's amplitude check is expected to fail and is kept faithful on
purpose: the published amplitude vector corresponds to a mid-transient cycle
(around t = 9-12 h of the face-value reading of R(0)) and sits ~21% above the
asymptotic limit cycle, uniformly across components and models, while the
published periods match the asymptotic cycle to four digits.  No late-window
tail measurement of the prescribed 24 h run reproduces those amplitudes
within 5%; the closest consistent single window achieves ~6.5%.  See
README.md ("Known deviations") for the full analysis.
"""

import math
import time

import numpy as np
import pytest

from hpaxis import (
    ModelInstance,
    ModelParameters,
    constant_feedback,
    hill_feedback,
    integrate,
    jacobian,
    reference,
    vector_field,
)
from hpaxis.equilibria import assemble_equilibrium, find_equilibrium
from hpaxis.hopf import build_family, hill_T0_for_slope_fraction, theta0_of_g1
from hpaxis.oscillation import (
    classify_omega_limit,
    mallet_parret_condition,
    measure_amplitude_period,
    sample_oscillation_fraction,
)
from hpaxis.stability import classify_local, companion_roots, cubic_roots, theta0


def announce(criterion: str, ok: bool, detail: str) -> bool:
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


PUBLISHED_EQ = {
    "classic": ("0.0098", "3.2529", "1.4143"),
    "extended": ("0.0094", "3.2589", "1.4169"),
}


def matches_source(value: float, text: str, rel: float = 1e-3) -> bool:
    # agreement at source precision: within the stated relative tolerance or
    # rounding to the printed decimals (the classic R0 is printed with only
    # two significant digits)
    ref = float(text)
    half_ulp = 0.5 * 10.0 ** (-len(text.split(".")[1]))
    return abs(value - ref) / ref <= rel or abs(value - ref) <= half_ulp


@pytest.fixture(scope="module")
def models():
    return {"classic": reference.classic_model(), "extended": reference.extended_model()}


@pytest.fixture(scope="module")
def runs(models):
    # the four 24 h reference runs, shared by criteria 3 and 4
    out = {}
    slowest = 0.0
    for unit, x0 in reference.INITIAL_CONDITIONS.items():
        for name, m in models.items():
            t0 = time.perf_counter()
            traj = integrate(m, x0, reference.SIM_MINUTES)
            slowest = max(slowest, time.perf_counter() - t0)
            amps, period, _, _ = measure_amplitude_period(traj)
            out[(unit, name)] = (amps, period)
    out["slowest_run_seconds"] = slowest
    return out


def test_criterion_1_equilibria(models):
    t0 = time.perf_counter()
    results = {name: find_equilibrium(m) for name, m in models.items()}
    elapsed = time.perf_counter() - t0
    ok = elapsed < 1.0
    details = []
    for name, eq in results.items():
        for comp, val, text in zip("RLT", (eq.R0, eq.L0, eq.T0), PUBLISHED_EQ[name]):
            good = matches_source(val, text)
            ok = ok and good
            details.append(f"{name}.{comp}0={val:.6g} vs {text}")
    assert announce(
        "1", ok, f"equilibria at source precision in {elapsed * 1e3:.1f} ms ({'; '.join(details)})"
    )


def test_criterion_2_discriminants(models):
    t0 = time.perf_counter()
    rows = []
    ok = True
    for name, m in models.items():
        t_printed = float(PUBLISHED_EQ[name][2])
        th_printed = theta0(m, assemble_equilibrium(m, t_printed))
        th_exact = theta0(m, find_equilibrium(m))
        ref = reference.REF_DISCRIMINANT[name]
        rel = abs(th_printed - ref) / ref
        ok = ok and rel <= 1e-3
        rows.append(f"{name}: {th_printed:.6e} vs {ref:.4e} (rel {rel:.1e}; exact-root value {th_exact:.6e})")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 1.0
    assert announce(
        "2", ok,
        "discriminants evaluated at the published (4-decimal) equilibria, where the "
        f"published values were computed, in {elapsed * 1e3:.1f} ms ({'; '.join(rows)})",
    )


def test_criterion_3_periods(runs):
    ok = runs["slowest_run_seconds"] < 30.0
    rows = [f"slowest 24h run {runs['slowest_run_seconds']:.2f} s"]
    for unit in ("pg", "ng"):
        for name in ("classic", "extended"):
            hours = runs[(unit, name)][1] / 60.0
            ref = reference.REF_PERIOD_HOURS[name]
            rel = abs(hours - ref) / ref
            ok = ok and rel <= 0.03
            rows.append(f"{name}/{unit}: {hours:.4f} h vs {ref} (rel {rel:.1e})")
    assert announce("3 (periods)", ok, "; ".join(rows))


def test_criterion_3_amplitudes(runs):
    # faithful to the stated tolerance; expected to FAIL (see module
    # docstring): the published amplitudes are a mid-transient measurement,
    # not a tail measurement of the prescribed run
    best = {}
    for unit in ("pg", "ng"):
        errs = []
        for name in ("classic", "extended"):
            amps = runs[(unit, name)][0]
            errs.extend(abs(a - r) / r for a, r in zip(amps, reference.REF_AMPLITUDES[name]))
        best[unit] = max(errs)
    matched = min(best, key=best.get)
    ok = best[matched] <= 0.05
    assert announce(
        "3 (amplitudes)", ok,
        f"matched R(0) reading '{matched}'; worst amplitude deviation {best[matched]:.1%} vs the "
        "5% tolerance. Expected failure: the published amplitudes correspond to a mid-transient "
        "cycle (~t = 9-12 h, face-value reading) and sit ~21% above the asymptotic cycle; periods "
        "(which pass) match the asymptotic cycle to 4 digits, so no tail window can reach the "
        "published amplitude vector within 5%.",
    )


def test_criterion_4_second_feedback_shrinks_cycle(runs):
    ok = True
    for unit in ("pg", "ng"):
        amps_c, period_c = runs[(unit, "classic")]
        amps_e, period_e = runs[(unit, "extended")]
        ok = ok and bool((amps_e < amps_c).all()) and period_e < period_c
    assert announce(
        "4", ok, "extended-model amplitudes and period strictly smaller, both unit readings"
    )


def _random_admissible_f2(rng):
    kind = rng.integers(0, 3)
    if kind == 0:
        return constant_feedback(0.0)
    if kind == 1:
        return constant_feedback(float(10.0 ** rng.uniform(-2, 1)))
    return hill_feedback(
        10.0 ** rng.uniform(-1, 2), 10.0 ** rng.uniform(-1, 2), 10.0 ** rng.uniform(-0.5, 1.5)
    )


@pytest.mark.parametrize("n,strict", [(8.0, False), (4.0, True)])
def test_criterion_5_slope_bound_forces_stability(n, strict):
    rng = np.random.default_rng(int(n))
    t0 = time.perf_counter()
    worst = -math.inf
    for _ in range(10_000):
        b = 10.0 ** rng.uniform(-2, 1, 3)
        g = 10.0 ** rng.uniform(-2, 1, 2)
        f1 = hill_feedback(10.0 ** rng.uniform(-1, 2), 10.0 ** rng.uniform(-1, 2), n)
        m = ModelInstance(ModelParameters(*b, *g), f1, _random_admissible_f2(rng))
        worst = max(worst, theta0(m, find_equilibrium(m)))
    elapsed = time.perf_counter() - t0
    ok = (worst < 0 if strict else worst <= 0) and elapsed < 10.0
    assert announce(
        f"5 (n={n:g})", ok,
        f"10^4 random draws: max theta0 = {worst:.3e} ({'<' if strict else '<='} 0) "
        f"in {elapsed:.2f} s",
    )


def test_criterion_6_bifurcation_family():
    t0 = time.perf_counter()
    b = 1.0
    f1 = hill_feedback(1.0, 1.0, 20.0)
    f2 = hill_feedback(1.0, 1.0, 2.0)
    T0 = hill_T0_for_slope_fraction(f1, 0.95)
    dmu = 1e-8 * b**3
    fam = build_family(b, T0, f1, f2, [-dmu, 0.0, dmu, 2.0])

    # positive-mu member oscillates on a limit cycle
    member = fam.members[3]
    eq = assemble_equilibrium(member, T0)
    omega_class = classify_omega_limit(integrate(member, eq.as_array() * 1.01, 600.0), eq)

    # at the bifurcation the pair sits on the axis
    rep0 = classify_local(fam.members[1], assemble_equilibrium(fam.members[1], T0))
    pair_re = max(abs(z.real) for z in rep0.eigenvalues if z.imag != 0)

    # transversality from the eigenvalue finite difference
    def pair_real(mm):
        rep = classify_local(mm, assemble_equilibrium(mm, T0))
        return max(z.real for z in rep.eigenvalues if z.imag != 0)

    fd = (pair_real(fam.members[2]) - pair_real(fam.members[0])) / (2 * dmu)
    rel = abs(fd - fam.alpha_prime0) / fam.alpha_prime0
    elapsed = time.perf_counter() - t0
    ok = (
        omega_class == "periodic"
        and pair_re < 1e-9 * b**3
        and fam.alpha_prime0 > 0
        and rel <= 1e-3
        and elapsed < 60.0
    )
    assert announce(
        "6", ok,
        f"mu>0 member: {omega_class}; |Re pair| at mu=0: {pair_re:.2e} < 1e-9; "
        f"alpha'(0) = {fam.alpha_prime0:.6f} vs finite difference {fd:.6f} "
        f"(rel {rel:.1e}); {elapsed:.1f} s",
    )


def test_criterion_7_almost_all_solutions_oscillate():
    t0 = time.perf_counter()
    m = reference.extended_model()
    eq = find_equilibrium(m).as_array()
    box = np.column_stack([np.zeros(3), 2.0 * eq])
    summary = sample_oscillation_fraction(m, 200, box, 2.0 * reference.SIM_MINUTES, seed=0, jobs=2)
    elapsed = time.perf_counter() - t0
    ok = summary.n_failed == 0 and summary.fraction >= 0.95 and elapsed < 300.0
    assert announce(
        "7", ok,
        f"{summary.n_oscillatory}/{summary.n_samples} random starts oscillate "
        f"(fraction {summary.fraction:.3f}) in {elapsed:.1f} s",
    )


def test_criterion_8_omega_limit_trichotomy():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)

    # shallow second feedback: slope bound satisfied, equilibrium unstable
    shallow = ModelInstance(
        ModelParameters(**reference.RATES), hill_feedback(20, 20, 20), hill_feedback(1e-4, 10.0, 20.0)
    )
    chk = mallet_parret_condition(shallow)
    eq_s = find_equilibrium(shallow)
    assert chk.satisfied and theta0(shallow, eq_s) > 0
    box = np.column_stack([np.zeros(3), 2.0 * eq_s.as_array()])
    classes_shallow = []
    for _ in range(50):
        x0 = rng.uniform(box[:, 0], box[:, 1])
        classes_shallow.append(classify_omega_limit(integrate(shallow, x0, 2880.0), eq_s))
    never_equilibrium = "equilibrium" not in classes_shallow

    # classical model with unstable equilibrium: almost all orbits converge
    # to the periodic orbit
    classic = reference.classic_model()
    eq_c = find_equilibrium(classic)
    assert theta0(classic, eq_c) > 0
    box_c = np.column_stack([np.zeros(3), 2.0 * eq_c.as_array()])
    classes_classic = [
        classify_omega_limit(integrate(classic, rng.uniform(box_c[:, 0], box_c[:, 1]), 5760.0), eq_c)
        for _ in range(50)
    ]
    frac_periodic = classes_classic.count("periodic") / 50.0
    elapsed = time.perf_counter() - t0
    ok = never_equilibrium and frac_periodic >= 0.95
    assert announce(
        "8", ok,
        f"slope-bounded set: {dict((c, classes_shallow.count(c)) for c in set(classes_shallow))}, "
        f"never 'equilibrium'; classical set: {frac_periodic:.0%} periodic; {elapsed:.1f} s",
    )


def test_criterion_9_oracle_equivalences(models):
    rng = np.random.default_rng(9)
    m = models["extended"]

    # Jacobian vs central differences
    jac_ok = True
    for _ in range(10):
        s = rng.uniform(0.05, 4.0, 3)
        J = jacobian(m, s)
        fd = np.empty((3, 3))
        for j in range(3):
            h = 1e-6 * (1.0 + abs(s[j]))
            sp, sm = s.copy(), s.copy()
            sp[j] += h
            sm[j] -= h
            fd[:, j] = (vector_field(m, sp) - vector_field(m, sm)) / (2 * h)
        jac_ok = jac_ok and np.allclose(J, fd, rtol=1e-6, atol=1e-9)

    # the general discriminant equals the pinned-slice formula
    f1 = hill_feedback(1.0, 1.0, 20.0)
    f2 = hill_feedback(1.0, 1.0, 2.0)
    T0 = hill_T0_for_slope_fraction(f1, 0.95)
    from hpaxis.hopf import family_member

    theta_ok = True
    for _ in range(20):
        b = float(10.0 ** rng.uniform(-1, 1))
        g1 = float(10.0 ** rng.uniform(-2, 3))
        member = family_member(b, T0, f1, f2, g1)
        full = theta0(member, assemble_equilibrium(member, T0))
        slice_ = theta0_of_g1(b, T0, f1, f2, g1)
        theta_ok = theta_ok and abs(slice_ - full) <= 1e-10 * max(1.0, abs(full))

    # cubic solver vs companion matrix
    cubic_ok = True
    for _ in range(200):
        c2, c1, c0 = 10.0 ** rng.uniform(-3, 3, 3)
        ours = np.sort_complex(cubic_roots(c2, c1, c0))
        ref = np.sort_complex(companion_roots(c2, c1, c0))
        cubic_ok = cubic_ok and np.abs(ours - ref).max() <= 1e-10 * np.abs(ref).max()

    # McLaurin inequality on 10^4 triples
    bs = 10.0 ** rng.uniform(-3, 3, size=(10_000, 3))
    ratio = bs.sum(axis=1) * (
        bs[:, 0] * bs[:, 1] + bs[:, 0] * bs[:, 2] + bs[:, 1] * bs[:, 2]
    ) / bs.prod(axis=1)
    mclaurin_ok = bool((ratio >= 9.0 - 1e-9).all())

    ok = jac_ok and theta_ok and cubic_ok and mclaurin_ok
    assert announce(
        "9", ok,
        f"jacobian-vs-FD {jac_ok}; discriminant decomposition {theta_ok}; "
        f"cubic-vs-companion {cubic_ok}; McLaurin {mclaurin_ok}",
    )


def test_criterion_10_homoclinic_limitation(models):
    # homoclinic orbits are not reproducible at desk scale; the classifier
    # deliberately never claims one and routes ambiguous tails (including
    # homoclinic-like slowdowns) to "undetermined"
    m = models["extended"]
    eq = find_equilibrium(m)
    truncated = integrate(m, (0.001, 6.0, 2.0), 400.0)
    verdict = classify_omega_limit(truncated, eq)
    ok = verdict == "undetermined"
    assert announce(
        "10", ok,
        "homoclinic orbits are declared not reproducible; ambiguous evidence maps to "
        f"'undetermined' (truncated-transient verdict: {verdict})",
    )
