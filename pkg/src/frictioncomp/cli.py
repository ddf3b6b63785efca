"""Command-line entry point.

    frictioncomp <command> [--config PATH] [--preset NAME] --out DIR [--plot]

Commands: simulate, sweep-gain, optimal-gain, harmonic-balance, limit-cycle.
Exit status: 0 success, 1 configuration error, 2 numerical failure,
3 inconclusive analysis.  Failures also write ``error.json`` to the output
directory.  ``FRICTIONCOMP_LOG`` sets the log level (e.g. ``DEBUG``).
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from collections import Counter
from pathlib import Path

from . import analysis, harmonic, lyapunov, tuning
from .config import from_document, parse_config, preset_names
from .errors import (
    BracketError,
    ConfigError,
    CycleError,
    DomainError,
    FrictionCompError,
    InconclusiveError,
    InsufficientDataError,
    IntegrationError,
    PreconditionError,
    SingularityError,
    StabilityViolationError,
    SweepFailedError,
    UnboundedSetError,
)
from .integrator import EventKind, integrate
from .io import fmt, write_events_csv, write_json, write_trajectory_csv
from .plant import invariant_set

log = logging.getLogger("frictioncomp")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INCONCLUSIVE = 0, 1, 2, 3
COMMANDS = ("simulate", "sweep-gain", "optimal-gain", "harmonic-balance", "limit-cycle")
DEFAULT_SWEEP = tuple(round(1.05 + 0.05 * i, 10) for i in range(40))


def _exit_code(exc):
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, InconclusiveError | InsufficientDataError | CycleError):
        return EXIT_INCONCLUSIVE
    if isinstance(exc, IntegrationError | SingularityError | BracketError | SweepFailedError
                  | StabilityViolationError):
        return EXIT_NUMERIC
    if isinstance(exc, PreconditionError | DomainError):
        return EXIT_CONFIG
    return EXIT_NUMERIC


def _band(plant):
    try:
        iv = invariant_set(plant)
        return [iv.lo, iv.hi]
    except UnboundedSetError:
        return None


def _write_trajectory(traj, cfg, out, plot):
    files = []
    if cfg.outputs.trajectory_csv:
        files.append(write_trajectory_csv(traj, out / "trajectory.csv"))
    if cfg.outputs.events_csv:
        files.append(write_events_csv(traj, out / "events.csv"))
    if plot or cfg.outputs.plot:
        from .plots import PLOT_KINDS, emit_plot

        for kind in PLOT_KINDS:
            files.append(emit_plot(traj, kind, out / f"{kind}.svg"))
    return files


def _traj_summary(traj):
    counts = Counter(e.kind.value for e in traj.events)
    return {
        "termination": traj.termination.value,
        "t_final": traj.t_final,
        "samples": len(traj),
        "events": dict(sorted(counts.items())),
        "final_state": {"x1": float(traj.x1[-1]), "x2": float(traj.x2[-1]),
                        "motion": "stuck" if traj.motion[-1] else "moving"},
    }


def cmd_simulate(cfg, out, plot):
    sc = cfg.scenario()
    traj = integrate(sc)
    p = sc.plant
    report = {"command": "simulate", "preset": cfg.preset, **_traj_summary(traj)}
    report["invariant_band"] = _band(p)
    sse = analysis.steady_state_error(traj, 0.0, cfg.analysis.window_fraction)
    report["steady_state_error"] = {"window": list(sse.window),
                                    "mean_abs_error": sse.mean_abs_error}
    if p.k == 0 and p.c == 0 and not p.presliding and p.actuator_lag is None \
            and p.gamma > p.c_f + p.f_bound:
        b = lyapunov.twisting_bounds(p.gamma, p.c_f, p.f_bound)
        lyap = {"V0": lyapunov.v_twisting(sc.x0, b),
                "convergence_time_bound": lyapunov.convergence_time_bound(sc.x0, b)}
        try:
            dec = lyapunov.verify_decrease(traj, b)
            lyap["decrease"] = {"violations": len(dec.violations),
                                "max_observed_rate": dec.max_observed_rate,
                                "bound": dec.bound}
        except InsufficientDataError as exc:
            lyap["decrease"] = {"skipped": str(exc)}
        report["lyapunov"] = lyap
    _write_trajectory(traj, cfg, out, plot)
    return report


def _sweep_rows(res):
    rows = []
    for i, r in enumerate(res.grid):
        sim = res.sim_times[i] if res.sim_times is not None else math.nan
        rows.append((r, res.bound_values[i], sim, math.isfinite(sim)))
    return rows


def _write_sweep_csv(res, path):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("ratio", "bound_T", "sim_T", "converged"))
        for r, b, s, conv in _sweep_rows(res):
            w.writerow((fmt(r), fmt(b), fmt(s), "true" if conv else "false"))


def cmd_sweep_gain(cfg, out, plot):
    base = cfg.scenario()
    grid = cfg.analysis.sweep_ratios or DEFAULT_SWEEP
    res = tuning.empirical_gain_sweep(base, grid, workers=cfg.analysis.sweep_workers)
    _write_sweep_csv(res, out / "sweep.csv")
    return {"command": "sweep-gain", "preset": cfg.preset, "grid_size": len(res.grid),
            "argmin_sim": res.argmin_sim, "argmin_bound": res.argmin_bound,
            "bound_monotonic": res.monotonic_flag,
            "converged_points": sum(math.isfinite(t) for t in res.sim_times)}


def cmd_optimal_gain(cfg, out, plot):
    sc = cfg.scenario()
    p = sc.plant
    x1_0 = sc.x0.x1
    lo, hi = cfg.analysis.search_interval
    mb = tuning.minimize_bound(p.c_f, x1_0, (lo, hi))
    report = {"command": "optimal-gain", "preset": cfg.preset,
              "bound": {"kind": mb.kind, "ratio": mb.ratio, "value": mb.value,
                        "interval": [lo, hi], "boundary_behavior": mb.boundary_behavior,
                        "summary": mb.summary()},
              "reference_ratio": tuning.REFERENCE_OPTIMAL_RATIO}
    grid = cfg.analysis.sweep_ratios or DEFAULT_SWEEP
    res = tuning.empirical_gain_sweep(sc, grid, workers=cfg.analysis.sweep_workers)
    _write_sweep_csv(res, out / "sweep.csv")
    report["empirical"] = {"argmin_sim": res.argmin_sim,
                           "min_time": min(res.sim_times)}
    return report


def cmd_harmonic_balance(cfg, out, plot):
    sc = cfg.scenario()
    rep = harmonic.predict_chatter_and_validate(sc, tail_fraction=cfg.analysis.tail_fraction)
    return {"command": "harmonic-balance", "preset": cfg.preset, **rep.as_dict()}


def cmd_limit_cycle(cfg, out, plot):
    sc = cfg.scenario()
    traj = integrate(sc)
    _write_trajectory(traj, cfg, out, plot)
    lc = analysis.detect_limit_cycle(traj, rel_tol=cfg.analysis.rel_tol)
    report = {"command": "limit-cycle", "preset": cfg.preset, **_traj_summary(traj),
              "detected": lc.detected, "amplitude": lc.amplitude, "period": lc.period,
              "contraction_ratio": lc.contraction_ratio,
              "last_relative_changes": lc.last_changes}
    if sc.plant.presliding:
        report["size_bound"] = 1.0 / sc.plant.friction.s
    rev = traj.events_of(EventKind.VELOCITY_REVERSAL)
    if len(rev) >= 3:
        t1, t2 = rev[-3].t, rev[-1].t
        eb = analysis.energy_balance(traj, t1, t2)
        report["last_cycle"] = {"t": [t1, t2], "input_energy": eb.input_energy,
                                "dissipated": eb.dissipated,
                                "relative_mismatch": eb.relative_mismatch}
    return report


HANDLERS = {
    "simulate": cmd_simulate,
    "sweep-gain": cmd_sweep_gain,
    "optimal-gain": cmd_optimal_gain,
    "harmonic-balance": cmd_harmonic_balance,
    "limit-cycle": cmd_limit_cycle,
}


def run(command, cfg, out_dir, plot=False):
    """Execute ``command`` for ``cfg`` writing into ``out_dir``; return the exit status."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        report = HANDLERS[command](cfg, out, plot)
    except FrictionCompError as exc:
        return _fail(out, exc)
    if cfg.outputs.report:
        write_json(report, out / "report.json")
    log.info("%s finished: %s", command, out)
    return EXIT_OK


def _fail(out, exc):
    code = _exit_code(exc)
    log.error("%s: %s", type(exc).__name__, exc)
    try:
        write_json({"exit_code": code, "error": type(exc).__name__, "message": str(exc),
                    "field": getattr(exc, "field", None)}, out / "error.json")
    except OSError:
        pass
    return code


def build_parser():
    ap = argparse.ArgumentParser(prog="frictioncomp",
                                 description="Relay compensation of Coulomb friction.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, help="YAML or JSON scenario document")
    ap.add_argument("--preset", choices=preset_names(), metavar="NAME",
                    help="built-in scenario: " + ", ".join(preset_names()))
    ap.add_argument("--out", type=Path, required=True, help="output directory")
    ap.add_argument("--plot", action="store_true", help="also write SVG plots")
    return ap


def main(argv=None):
    level = os.environ.get("FRICTIONCOMP_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    out = args.out
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"cannot create {out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.config is not None:
            try:
                text = args.config.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read {args.config}: {exc}",
                                  field="config") from exc
            cfg = parse_config(text, preset=args.preset)
        else:
            cfg = from_document({}, preset=args.preset)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return _fail(out, exc)
    code = run(args.command, cfg, out, plot=args.plot)
    if code != EXIT_OK:
        print(f"{args.command} failed with exit status {code}; see {out / 'error.json'}",
              file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
