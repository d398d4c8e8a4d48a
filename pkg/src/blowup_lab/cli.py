"""``blowup-lab <command> --config <path> [--out <dir>]``

Exit status is 0 for any physical outcome, 2 for configuration errors and
3 for input/output errors. The whole configuration is validated before
anything is written.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import predictor
from .classify import classify_outcome
from .config import COMMANDS, ConfigError, RunConfig, help_text, load_config
from .core import Parameters, evaluate_ic
from .monitor import (DEFAULT_X0_FRACTION, MonitorError, epsilon_history, monitor_H, rescale_to_normalized,
                      support_radius, theorem_inputs)
from .plotting import heatmap_svg, profile_stack_svg
from .solver import (OutcomeKind, SolverConfig, discrete_energy, read_snapshots, run,
                     write_snapshot_csv, write_snapshots)
from .sweep import Axis, IntegrityError, SweepSpec, load_diagram, run_sweep, save_diagram

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


def _dump(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n")


# -- simulate ---------------------------------------------------------------------

def cmd_simulate(cfg: RunConfig) -> int:
    params, grid, ic, solver = cfg.parameters(), cfg.grid(), cfg.ic(), cfg.solver()
    try:
        state0 = evaluate_ic(ic, grid)
    except ValueError as exc:
        raise ConfigError(f"ic: {exc}") from exc
    outcome, snapshots = run(ic, params, grid, solver)
    result = {"outcome": outcome.to_dict(), "parameters": {"alpha": params.alpha, "beta": params.beta},
              "grid": grid.to_dict(), "solver": solver.to_dict(),
              "energy": {"initial": discrete_energy(state0, params, grid),
                         "final": discrete_energy(outcome.final_state, params, grid)}}
    if outcome.kind is OutcomeKind.BLOWUP:
        result["classification"] = classify_outcome(outcome, grid).to_dict()
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    _dump(out / "outcome.json", result)
    write_snapshots(out / "snapshots", snapshots, grid)
    write_snapshot_csv(out / "final_state.csv", outcome.final_state, grid)
    line = f"{outcome.kind.value} at t = {outcome.t_event:.10g}"
    if "classification" in result:
        line += f" ({result['classification']['kind']})"
    print(line)
    return EXIT_OK


# -- predict ------------------------------------------------------------------------

def cmd_predict(cfg: RunConfig) -> int:
    p = cfg.section("predict")
    missing = {"alpha", "b0", "db0"} - set(p)
    if missing:
        raise ConfigError(f"predict: missing key(s) {sorted(missing)}")
    try:
        cd = predictor.CriticalData(float(p["alpha"]), float(p["b0"]), float(p["db0"]))
    except ValueError as exc:
        raise ConfigError(f"predict: {exc}") from exc
    verdict = predictor.classify(cd).to_dict()
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    _dump(cfg.output_dir / "predict.json", verdict)
    print(json.dumps(verdict, sort_keys=True))
    return EXIT_OK


# -- sweep ----------------------------------------------------------------------------

def build_sweep_spec(cfg: RunConfig) -> SweepSpec:
    s = cfg.section("sweep")
    for key in ("alpha_axis", "beta_axis"):
        if key not in s:
            raise ConfigError(f"sweep.{key} is required")
    try:
        return SweepSpec(Axis.from_dict(s["alpha_axis"]), Axis.from_dict(s["beta_axis"]),
                         cfg.ic(), cfg.grid(), cfg.solver(), int(s.get("workers", 1)))
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"sweep: {exc}") from exc


def cmd_sweep(cfg: RunConfig) -> int:
    spec = build_sweep_spec(cfg)
    pd = run_sweep(spec)
    csv_path, _ = save_diagram(pd, cfg.output_dir)
    print(csv_path)
    return EXIT_OK


# -- monitor --------------------------------------------------------------------------

def cmd_monitor(cfg: RunConfig) -> int:
    params, grid, ic, solver = cfg.parameters(), cfg.grid(), cfg.ic(), cfg.solver()
    m = cfg.section("monitor")
    scale = None
    if m.get("normalize", True):
        try:
            ic, scale = rescale_to_normalized(params, ic)
        except ValueError as exc:
            raise ConfigError(f"monitor: {exc}") from exc
        grid, solver = scale.map_grid(grid), scale.map_solver(solver)
    elif (params.alpha, params.beta) != (1.0, 1.0):
        raise ConfigError("monitor: without normalize the parameters must be alpha = beta = 1")
    try:
        state0 = evaluate_ic(ic, grid)
        X = float(m["X"]) if "X" in m else support_radius(state0.u, state0.v, grid)
        X0 = float(m.get("X0", DEFAULT_X0_FRACTION * X))
        inputs = theorem_inputs(state0, grid, X, X0)
    except ValueError as exc:
        raise ConfigError(f"monitor: {exc}") from exc
    reach = grid.x_max - 2 * grid.dx - X
    t_end = float(m.get("t_end", min(solver.t_max, reach)))
    dt = (X - X0) / 20.0
    times = np.arange(0.0, t_end, dt)
    times = np.append(times, t_end) if t_end - times[-1] > 1e-12 * dt else times
    run_cfg = SolverConfig(**{**solver.to_dict(), "snapshot_times": tuple(times),
                              "t_max": max(t_end, times[-1])})
    outcome, snaps = run(ic, Parameters(1.0, 1.0), grid, run_cfg)
    try:
        report = monitor_H(snaps, grid, inputs)
    except MonitorError as exc:
        raise ConfigError(f"monitor: {exc}") from exc
    result = report.to_dict()
    result.update({"X": X, "X0": X0, "X1": inputs.X1, "epsilon": inputs.epsilon,
                   "outcome": outcome.to_dict(),
                   "scale": None if scale is None else scale.to_dict(),
                   "epsilon_history": [{"t": t, "X": x, "epsilon": e}
                                       for t, x, e in epsilon_history(snaps, grid)]})
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    _dump(cfg.output_dir / "monitor.json", result)
    for c in report.checks:
        print(f"{c.name}: {'pass' if c.passed else 'FAIL'} (margin {c.margin:.3g}) {c.detail}")
    return EXIT_OK


# -- plot -------------------------------------------------------------------------------

def cmd_plot(cfg: RunConfig) -> int:
    p = cfg.section("plot")
    if "input" not in p:
        raise ConfigError("plot.input is required")
    kind = p.get("kind", "profiles")
    if kind not in ("profiles", "heatmap"):
        raise ConfigError(f"plot.kind must be profiles or heatmap, got {kind!r}")
    field = p.get("field", "t_event")
    beta_axis = p.get("beta_axis", "sqrt_beta")
    if field not in ("t_event", "distance"):
        raise ConfigError(f"plot.field must be t_event or distance, got {field!r}")
    if beta_axis not in ("beta", "sqrt_beta"):
        raise ConfigError(f"plot.beta_axis must be beta or sqrt_beta, got {beta_axis!r}")
    src = Path(p["input"])
    if not src.exists():
        raise FileNotFoundError(f"plot input {src} does not exist")
    if kind == "profiles":
        snaps, x = read_snapshots(src)
        if not snaps:
            raise FileNotFoundError(f"no snapshot_*.csv files in {src}")
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        path = profile_stack_svg(snaps, x, cfg.output_dir / "profiles.svg")
    else:
        pd = load_diagram(src)
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        path = heatmap_svg(pd, cfg.output_dir / f"heatmap_{field}.svg", field, beta_axis)
    print(path)
    return EXIT_OK


HANDLERS = {"simulate": cmd_simulate, "predict": cmd_predict, "sweep": cmd_sweep,
            "monitor": cmd_monitor, "plot": cmd_plot}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blowup-lab",
        description="Blowup experiments for u_tt = alpha * u_x^2 + beta * u_xx.",
        epilog=help_text() + "\n\nenvironment:\n  BLOWUP_LAB_THREADS  upper bound on sweep workers"
               "\n\nexit status: 0 success, 2 config error, 3 IO error",
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="YAML configuration file")
    parser.add_argument("--out", default=None, help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.command, args.out)
        return HANDLERS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, IntegrityError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
