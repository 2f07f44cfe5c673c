"""Command-line front end.

Subcommands: equilibrium, stability, simulate, hopf-sweep, oscillate,
mp-check, reproduce-paper.  All reports are machine-readable (JSON/CSV) with
the fully resolved configuration embedded, so identical invocations produce
byte-identical outputs.

Exit codes: 0 success, 1 reference-comparison failure, 2 usage or parse
errors, 3 numerical failures.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import reference
from .dynamics import Trajectory, integrate
from .equilibria import assemble_equilibrium, find_equilibrium
from .errors import ConfigError, HpaxisError, NumericalError
from .hopf import build_family, hill_T0_for_slope_fraction
from .model import ModelInstance, hill_feedback, load_model, model_from_dict, model_to_dict
from .oscillation import analyze_trajectory, mallet_parret_condition, measure_amplitude_period
from .stability import classify_local, sup_M, theta0

PRESETS = {"classic-ref": reference.classic_model, "extended-ref": reference.extended_model}


class ComparisonFailure(HpaxisError):
    """reproduce-paper found at least one reference comparison out of tolerance."""


# ---------------------------------------------------------------------------
# model resolution

def _apply_override(doc: dict, spec: str) -> None:
    if "=" not in spec:
        raise ConfigError(f"--set expects key=value, got {spec!r}")
    key, _, value = spec.partition("=")
    node = doc
    parts = key.strip().split(".")
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            raise ConfigError(f"--set {spec!r}: unknown section {part!r}")
        node = node[part]
    leaf = parts[-1]
    try:
        node[leaf] = json.loads(value)
    except json.JSONDecodeError:
        node[leaf] = value


def _resolve_model(config, preset, overrides) -> tuple[ModelInstance, dict]:
    if (config is None) == (preset is None):
        raise ConfigError("specify exactly one of --config FILE or --preset NAME")
    if config is not None:
        model = load_model(config)
        doc = model_to_dict(model)
    else:
        doc = model_to_dict(PRESETS[preset]())
    for spec in overrides:
        _apply_override(doc, spec)
    return model_from_dict(doc), doc


def _model_options(fn):
    fn = click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
                      help="Override a model field, e.g. --set f2.K=10 or --set b1=0.2.")(fn)
    fn = click.option("--preset", type=click.Choice(sorted(PRESETS)), default=None,
                      help="Use a built-in reference model.")(fn)
    fn = click.option("--config", type=click.Path(), default=None,
                      help="JSON model definition file.")(fn)
    return fn


def _sanitize(obj):
    # keep the documents strictly valid JSON: stringify non-finite floats
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _dumps(payload: dict) -> str:
    return json.dumps(_sanitize(payload), indent=2, sort_keys=True)


def _emit(payload: dict) -> None:
    click.echo(_dumps(payload))


def _fmt(v) -> str:
    # full-precision decimal serialization for CSV cells
    return repr(float(v))


def _parse_x0(text: str):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"--x0 expects three comma-separated numbers, got {text!r}") from exc
    if len(parts) != 3:
        raise ConfigError(f"--x0 expects three components, got {len(parts)}")
    return np.array(parts)


def _default_x0(model: ModelInstance, rel: float = 0.01):
    eq = find_equilibrium(model)
    return eq.as_array() * (1.0 + rel)


# ---------------------------------------------------------------------------
# subcommands

@click.group()
def cli():
    """Analysis tools for the two-feedback endocrine oscillator."""


@cli.command()
@_model_options
@click.option("--tol", type=float, default=1e-12, show_default=True, help="Residual tolerance.")
def equilibrium(config, preset, overrides, tol):
    """Locate the unique positive equilibrium and print it as JSON."""
    model, doc = _resolve_model(config, preset, overrides)
    eq = find_equilibrium(model, tol)
    _emit({
        "config": doc,
        "result": {"R0": eq.R0, "L0": eq.L0, "T0": eq.T0, "residual": eq.residual},
    })


@cli.command()
@_model_options
@click.option("--critical-tol", type=float, default=None, help="Dead band for the critical verdict.")
@click.option("--t-max", type=float, default=1e3, show_default=True, help="Slope-scan upper bound.")
@click.option("--grid-size", type=int, default=10_000, show_default=True, help="Slope-scan grid size.")
def stability(config, preset, overrides, critical_tol, t_max, grid_size):
    """Classify the equilibrium and print the slope-supremum verdict."""
    model, doc = _resolve_model(config, preset, overrides)
    eq = find_equilibrium(model)
    rep = classify_local(model, eq, critical_tol)
    slope = sup_M(model.f1, t_max, grid_size)
    _emit({
        "config": doc,
        "result": {
            "equilibrium": {"R0": eq.R0, "L0": eq.L0, "T0": eq.T0},
            "stability": {
                "theta0": rep.theta0,
                "a1": rep.a1,
                "a2": rep.a2,
                "a3": rep.a3,
                "eigenvalues": [[z.real, z.imag] for z in rep.eigenvalues],
                "verdict": rep.verdict,
                "critical_tol": rep.critical_tol,
            },
            "slope_verdict": {
                "sup_m": slope.sup_m,
                "argmax_t": slope.argmax_t,
                "classification": slope.classification,
            },
        },
    })


def _write_trajectory_csv(path: Path, traj: Trajectory) -> None:
    with open(path, "w") as fh:
        fh.write("t,R,L,T\n")
        for t, (r, l, tt) in zip(traj.times, traj.states):
            fh.write(f"{_fmt(t)},{_fmt(r)},{_fmt(l)},{_fmt(tt)}\n")


@cli.command()
@_model_options
@click.option("--x0", default=None, metavar="R,L,T",
              help="Initial state; defaults to the equilibrium perturbed by +1%.")
@click.option("--t-end", type=float, default=1440.0, show_default=True, help="Horizon (model time units).")
@click.option("--rtol", type=float, default=1e-9, show_default=True)
@click.option("--atol", type=float, default=1e-12, show_default=True)
@click.option("--max-step", type=float, default=math.inf)
@click.option("--grid-points", type=int, default=2001, show_default=True,
              help="Equidistant dense-output samples (plus all accepted steps).")
@click.option("--backend", type=click.Choice(["auto", "compiled", "python"]), default="auto")
@click.option("--out", type=click.Path(), default="trajectory.csv", show_default=True,
              help="Output CSV; a .meta.json sidecar is written next to it.")
def simulate(config, preset, overrides, x0, t_end, rtol, atol, max_step, grid_points, backend, out):
    """Integrate a trajectory and write it as CSV (columns t,R,L,T)."""
    model, doc = _resolve_model(config, preset, overrides)
    start = _parse_x0(x0) if x0 else _default_x0(model)
    traj = integrate(model, start, t_end, rtol=rtol, atol=atol, max_step=max_step,
                     grid_points=grid_points, backend=backend)
    out = Path(out)
    _write_trajectory_csv(out, traj)
    meta = {
        "config": doc,
        "options": {
            "x0": list(map(float, start)),
            "t_end": t_end,
            "rtol": rtol,
            "atol": atol,
            "max_step": max_step,
            "grid_points": grid_points,
        },
        "stats": {
            "accepted_steps": traj.accepted_steps,
            "rejected_steps": traj.rejected_steps,
            "samples": len(traj.times),
            "backend": traj.backend,
        },
        "csv": out.name,
    }
    sidecar = out.with_suffix(out.suffix + ".meta.json")
    sidecar.write_text(_dumps(meta) + "\n")
    click.echo(f"wrote {out} ({len(traj.times)} samples) and {sidecar}")


def _sweep_row(args):
    mu, g1, member, t0, sim_t_end = args
    eq = assemble_equilibrium(member, t0)
    rep = classify_local(member, eq)
    osc = "skipped"
    if sim_t_end > 0:
        traj = integrate(member, eq.as_array() * 1.01, sim_t_end)
        report = analyze_trajectory(traj, eq)
        osc = report.omega_class or ("oscillatory" if report.y_oscillatory else "none")
    return (
        f"{_fmt(mu)},{_fmt(g1)},{_fmt(member.params.g2)},{_fmt(rep.theta0)},"
        f"{_fmt(rep.max_real_part)},{osc}"
    )


@cli.command("hopf-sweep")
@click.option("--b", type=float, required=True, help="Common clearing rate of the family.")
@click.option("--t0", type=float, default=None,
              help="Pinned equilibrium effector level; default picks M(T0) = fraction*n for Hill f1.")
@click.option("--fraction", type=float, default=0.95, show_default=True,
              help="Slope fraction for the default T0 choice.")
@click.option("--mu-min", type=float, required=True)
@click.option("--mu-max", type=float, required=True)
@click.option("--points", type=int, required=True)
@click.option("--f1-k", "f1_K", type=float, default=1.0, show_default=True)
@click.option("--f1-beta", type=float, default=1.0, show_default=True)
@click.option("--f1-n", type=float, default=20.0, show_default=True)
@click.option("--f2-k", "f2_K", type=float, default=1.0, show_default=True)
@click.option("--f2-beta", type=float, default=1.0, show_default=True)
@click.option("--f2-n", type=float, default=2.0, show_default=True)
@click.option("--sim-t-end", type=float, default=0.0, show_default=True,
              help="If > 0, simulate each member from a 1%-perturbed equilibrium "
                   "and classify its oscillation.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Parallel workers.")
@click.option("--out", type=click.Path(), default=None, help="CSV file (default: stdout).")
def hopf_sweep(b, t0, fraction, mu_min, mu_max, points, f1_K, f1_beta, f1_n,
               f2_K, f2_beta, f2_n, sim_t_end, jobs, out):
    """Sweep the pinned-equilibrium family over a discriminant grid.

    Emits CSV columns mu, g1, g2, theta0, max_re_eigenvalue, oscillation.
    """
    f1 = hill_feedback(f1_K, f1_beta, f1_n)
    f2 = hill_feedback(f2_K, f2_beta, f2_n)
    if t0 is None:
        t0 = hill_T0_for_slope_fraction(f1, fraction)
    if points < 2:
        raise ConfigError("--points must be at least 2")
    mu_grid = np.linspace(mu_min, mu_max, points)
    family = build_family(b, t0, f1, f2, mu_grid)

    config_comment = "# config: " + json.dumps(_sanitize({
        "b": b, "T0": t0, "f1": f1.describe(), "f2": f2.describe(),
        "mu_min": mu_min, "mu_max": mu_max, "points": points, "sim_t_end": sim_t_end,
    }), sort_keys=True)
    work = [
        (mu, g1, member, t0, sim_t_end)
        for mu, g1, member in zip(family.mu_grid, family.g1_of_mu, family.members)
    ]
    if jobs > 1:
        import multiprocessing

        with multiprocessing.Pool(jobs) as pool:
            rows = pool.map(_sweep_row, work)
    else:
        rows = [_sweep_row(w) for w in work]
    lines = [config_comment, "mu,g1,g2,theta0,max_re_eigenvalue,oscillation", *rows]
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text)
        meta = {
            "family": {
                "b": b, "T0": t0, "alpha_prime0": family.alpha_prime0,
                "mu_range": list(family.mu_range),
                "f1": f1.describe(), "f2": f2.describe(),
            },
            "options": {"mu_min": mu_min, "mu_max": mu_max, "points": points, "sim_t_end": sim_t_end},
            "csv": Path(out).name,
        }
        Path(out).with_suffix(Path(out).suffix + ".meta.json").write_text(_dumps(meta) + "\n")
        click.echo(f"wrote {out} ({points} rows); alpha'(0) = {family.alpha_prime0!r}")
    else:
        click.echo(text, nl=False)


@cli.command()
@_model_options
@click.option("--x0", default=None, metavar="R,L,T", help="Initial state (default: equilibrium +1%).")
@click.option("--t-end", type=float, default=1440.0, show_default=True)
@click.option("--tail-fraction", type=float, default=0.5, show_default=True)
@click.option("--threshold", type=float, default=1e-4, show_default=True)
@click.option("--rtol", type=float, default=1e-9, show_default=True)
@click.option("--atol", type=float, default=1e-12, show_default=True)
def oscillate(config, preset, overrides, x0, t_end, tail_fraction, threshold, rtol, atol):
    """Integrate, detect oscillation, measure amplitude/period, classify."""
    model, doc = _resolve_model(config, preset, overrides)
    eq = find_equilibrium(model)
    start = _parse_x0(x0) if x0 else eq.as_array() * 1.01
    traj = integrate(model, start, t_end, rtol=rtol, atol=atol)
    report = analyze_trajectory(traj, eq, tail_fraction, threshold)
    _emit({
        "config": doc,
        "options": {"x0": list(map(float, start)), "t_end": t_end,
                    "tail_fraction": tail_fraction, "threshold": threshold},
        "result": report.as_dict(),
    })


@cli.command("mp-check")
@_model_options
@click.option("--t-max", type=float, default=1e3, show_default=True, help="Slope-scan upper bound.")
def mp_check(config, preset, overrides, t_max):
    """Check the tridiagonal-reduction slope bound and print the report."""
    model, doc = _resolve_model(config, preset, overrides)
    check = mallet_parret_condition(model, t_max)
    _emit({"config": doc, "result": check.as_dict()})


# ---------------------------------------------------------------------------
# reference reproduction

def _decimals(text: str) -> int:
    return len(text.split(".")[1]) if "." in text else 0


def _compare(name, computed, published, tol, published_text=None):
    computed, published = float(computed), float(published)
    rel = abs(computed - published) / abs(published)
    entry = {
        "name": name,
        "computed": computed,
        "reference": published,
        "rel_err": rel,
        "tol": tol,
        "passed": bool(rel <= tol),
    }
    if published_text is not None:
        # a value that rounds to the published digits matches at source precision
        half_ulp = 0.5 * 10.0 ** (-_decimals(published_text))
        entry["rounds_to_reference"] = bool(abs(computed - published) <= half_ulp)
        entry["passed"] = bool(entry["passed"] or entry["rounds_to_reference"])
    return entry


_REF_EQ_TEXT = {
    "classic": ("0.0098", "3.2529", "1.4143"),
    "extended": ("0.0094", "3.2589", "1.4169"),
}

EQ_TOL = 1e-3
THETA_TOL = 1e-3
AMP_TOL = 0.05
PERIOD_TOL = 0.03


def _reference_run(args):
    name, unit, model, x0, t_end, rtol, atol = args
    traj = integrate(model, x0, t_end, rtol=rtol, atol=atol)
    try:
        amps, period, period_std, n_peaks = measure_amplitude_period(traj)
    except HpaxisError as exc:
        raise NumericalError(f"oscillation metrics for the {name} model ({unit} reading): {exc}") from exc
    return name, unit, traj, amps, period, period_std, n_peaks


@cli.command("reproduce-paper")
@click.option("--output-dir", type=click.Path(), default="reproduction", show_default=True)
@click.option("--f2-gain", type=float, default=1.0, show_default=True,
              help="Scale the extended model's second feedback (0 removes it).")
@click.option("--r-unit", type=click.Choice(["both", "pg", "ng"]), default="both", show_default=True,
              help="Reading of the published R(0): literal pg/ml, face-value ng/ml, or both.")
@click.option("--rtol", type=float, default=1e-9, show_default=True)
@click.option("--atol", type=float, default=1e-12, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True, help="Parallel workers.")
def reproduce_paper(output_dir, f2_gain, r_unit, rtol, atol, jobs):
    """Re-run the published reference experiment and compare every number.

    Writes 24h trajectories (CSV), a JSON report with the comparison table,
    and prints one PASS/FAIL line per comparison.  Exits 1 when any
    comparison is out of tolerance.
    """
    outdir = Path(output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    models = {"classic": reference.classic_model(), "extended": reference.extended_model(f2_gain)}
    units = ["pg", "ng"] if r_unit == "both" else [r_unit]

    comparisons = []
    report = {
        "config": {name: model_to_dict(m) for name, m in models.items()},
        "options": {"f2_gain": f2_gain, "r_unit": r_unit, "rtol": rtol, "atol": atol,
                    "t_end_minutes": reference.SIM_MINUTES},
        "equilibria": {},
        "discriminants": {},
        "runs": {},
    }

    for name, model in models.items():
        eq = find_equilibrium(model)
        report["equilibria"][name] = {"R0": eq.R0, "L0": eq.L0, "T0": eq.T0, "residual": eq.residual}
        for comp, value, text in zip("RLT", (eq.R0, eq.L0, eq.T0), _REF_EQ_TEXT[name]):
            comparisons.append(_compare(
                f"equilibrium {comp}0 ({name})", value, float(text), EQ_TOL, published_text=text))

        # the published discriminants were evaluated at the printed (4-decimal)
        # equilibrium; theta0 inherits a few-permille shift from that rounding
        # because f1' is steep, so both values are reported
        th_exact = theta0(model, eq)
        t0_printed = float(_REF_EQ_TEXT[name][2])
        th_printed = theta0(model, assemble_equilibrium(model, t0_printed))
        report["discriminants"][name] = {
            "theta0": th_exact,
            "theta0_at_source_precision_T0": th_printed,
        }
        comparisons.append(_compare(
            f"theta0 ({name}, at source-precision T0)", th_printed,
            reference.REF_DISCRIMINANT[name], THETA_TOL))

    work = [
        (name, unit, model, reference.INITIAL_CONDITIONS[unit], reference.SIM_MINUTES, rtol, atol)
        for unit in units
        for name, model in models.items()
    ]
    if jobs > 1:
        import multiprocessing

        with multiprocessing.Pool(jobs) as pool:
            results = pool.map(_reference_run, work)
    else:
        results = [_reference_run(w) for w in work]

    period_by_unit = {}
    amp_err_by_unit = {u: [] for u in units}
    for name, unit, traj, amps, period, period_std, n_peaks in results:
        report["runs"].setdefault(unit, {})
        csv_path = outdir / f"{name}_{unit}.csv"
        _write_trajectory_csv(csv_path, traj)
        report["runs"][unit][name] = {
            "csv": csv_path.name,
            "initial_condition": list(reference.INITIAL_CONDITIONS[unit]),
            "amplitudes": [float(a) for a in amps],
            "period_minutes": period,
            "period_hours": period / 60.0,
            "period_std_minutes": period_std,
            "n_peaks": n_peaks,
            "accepted_steps": traj.accepted_steps,
        }
        amp_err_by_unit[unit].extend(
            abs(a - r) / r for a, r in zip(amps, reference.REF_AMPLITUDES[name]))
        period_by_unit.setdefault(unit, {})[name] = period / 60.0
    amp_err_by_unit = {u: max(errs) for u, errs in amp_err_by_unit.items()}

    matched_unit = min(units, key=lambda u: amp_err_by_unit[u])
    report["matched_r_unit"] = matched_unit
    report["amplitude_match_note"] = (
        "closest reading of R(0) by amplitude agreement; see the comparison "
        "table for whether it meets the tolerance. The published amplitudes "
        "sit about 21% above the asymptotic limit cycle (uniformly across "
        "components and models) and correspond to a mid-transient cycle "
        "around t = 9-12 h of the ng reading; the tail measurement reported "
        "here reflects the late-window cycle instead. The published periods "
        "match the asymptotic cycle to four digits."
    )
    for name in models:
        amps = report["runs"][matched_unit][name]["amplitudes"]
        for comp, a, r in zip("RLT", amps, reference.REF_AMPLITUDES[name]):
            comparisons.append(_compare(f"amplitude {comp} ({name}, {matched_unit})", a, r, AMP_TOL))
        comparisons.append(_compare(
            f"period ({name}, {matched_unit}, hours)",
            period_by_unit[matched_unit][name], reference.REF_PERIOD_HOURS[name], PERIOD_TOL))

    # qualitative claim: the second feedback shrinks both amplitude and period
    for unit in units:
        runs = report["runs"][unit]
        smaller_amp = all(e < c for e, c in zip(runs["extended"]["amplitudes"],
                                                runs["classic"]["amplitudes"]))
        smaller_period = runs["extended"]["period_minutes"] < runs["classic"]["period_minutes"]
        report["runs"][unit]["extended_smaller_than_classic"] = {
            "amplitudes": smaller_amp, "period": smaller_period,
        }

    report["comparisons"] = comparisons
    report["passed"] = all(c["passed"] for c in comparisons)
    (outdir / "report.json").write_text(_dumps(report) + "\n")

    for c in comparisons:
        status = "PASS" if c["passed"] else "FAIL"
        click.echo(f"{status}  {c['name']}: computed {c['computed']!r} vs reference "
                   f"{c['reference']!r} (rel err {c['rel_err']:.2e}, tol {c['tol']:g})")
    click.echo(f"matched R(0) reading: {matched_unit}; report: {outdir / 'report.json'}")
    if not report["passed"]:
        raise ComparisonFailure(
            f"{sum(not c['passed'] for c in comparisons)} of {len(comparisons)} comparisons failed"
        )


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
    except ComparisonFailure as exc:
        click.echo(f"comparison failure: {exc}", err=True)
        sys.exit(1)
    except (ConfigError, click.UsageError, click.BadParameter, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(3)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.Abort:
        sys.exit(130)
    sys.exit(0)


if __name__ == "__main__":
    main()
