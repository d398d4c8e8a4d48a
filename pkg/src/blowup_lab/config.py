"""YAML run configuration.

One key tree serves every command. :data:`SCHEMA` is the single source of
truth: validation walks it, and the CLI help text is generated from it.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

from .core import Grid, InitialCondition, Parameters, grid_from_dict, ic_from_dict
from .solver import SolverConfig, solver_config_from_dict

COMMANDS = ("simulate", "predict", "sweep", "monitor", "plot")


class ConfigError(ValueError):
    pass


_FIELD = {
    "type": ("str", "zero | gaussian | quadratic | samples"),
    "amplitude": ("float", "gaussian amplitude"),
    "k": ("float", "gaussian width parameter, > 0"),
    "center": ("float", "gaussian centre (default 0)"),
    "coeff": ("float", "quadratic coefficient"),
    "values": ("list", "one value per grid point"),
}
_AXIS = {
    "min": ("float", "first value"),
    "max": ("float", "last value"),
    "count": ("int", "number of values, >= 1"),
    "scale": ("str", "linear | log"),
}

SCHEMA: Dict[str, Any] = {
    "command": ("str", "optional; must match the command given on the command line"),
    "output_dir": ("str", "output directory (overridden by --out)"),
    "parameters": {
        "alpha": ("float", "coefficient of u_x^2, >= 0"),
        "beta": ("float", "coefficient of u_xx, >= 0"),
    },
    "grid": {
        "kind": ("str", "Periodic1D | Radial3D"),
        "n_points": ("int", "number of samples, >= 16 (default 8192)"),
        "x_min": ("float", "left end (default -pi, or 0 for Radial3D)"),
        "x_max": ("float", "right end (default pi)"),
    },
    "ic": {"u0": _FIELD, "ut0": _FIELD},
    "solver": {
        "rel_tol": ("float", "relative tolerance (default 1e-11)"),
        "abs_tol": ("float", "absolute tolerance (default 1e-11)"),
        "dt_init": ("float", "first trial step"),
        "dt_min": ("float", "step-size floor; smaller steps end the run"),
        "dt_max": ("float", "step-size ceiling"),
        "t_max": ("float", "end time"),
        "blow_threshold": ("float", "blowup when max|u_xx| exceeds this (default 1e6)"),
        "boundary_threshold": ("float", "boundary hit when |u| at the edge exceeds this (default 1e-4)"),
        "snapshot_times": ("list", "times at which snapshots are stored"),
    },
    "predict": {
        "alpha": ("float", "alpha > 0"),
        "b0": ("float", "initial curvature u_xx(0, 0)"),
        "db0": ("float", "initial curvature velocity u_txx(0, 0)"),
    },
    "sweep": {
        "alpha_axis": _AXIS,
        "beta_axis": _AXIS,
        "workers": ("int", "worker processes (capped by BLOWUP_LAB_THREADS)"),
    },
    "monitor": {
        "normalize": ("bool", "rescale (alpha, beta) to u_tt - u_xx = u_x^2 first (default true)"),
        "X": ("float", "support radius of the data (default: measured)"),
        "X0": ("float", "inner radius, 0 < X0 < X (default X/4)"),
        "t_end": ("float", "last monitored time"),
    },
    "plot": {
        "input": ("str", "snapshot directory or sweep diagram (csv/json/directory)"),
        "kind": ("str", "profiles | heatmap"),
        "field": ("str", "heatmap value: t_event | distance"),
        "beta_axis": ("str", "heatmap vertical axis: beta | sqrt_beta"),
    },
}

_TYPES = {"float": (int, float), "int": (int,), "str": (str,), "bool": (bool,), "list": (list,)}


def schema_keys(schema=SCHEMA, prefix="") -> List[Tuple[str, str, str]]:
    """Flattened ``(dotted key, type, description)`` listing."""
    out = []
    for key, val in schema.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            out.extend(schema_keys(val, name + "."))
        else:
            out.append((name, val[0], val[1]))
    return out


def _validate(tree, schema, prefix=""):
    if not isinstance(tree, dict):
        raise ConfigError(f"{prefix.rstrip('.') or 'config'}: expected a mapping")
    for key, val in tree.items():
        name = f"{prefix}{key}"
        if key not in schema:
            raise ConfigError(f"unknown config key '{name}'")
        sub = schema[key]
        if isinstance(sub, dict):
            _validate(val, sub, name + ".")
            continue
        kind = sub[0]
        if val is None:
            continue
        if kind == "float" and isinstance(val, str):
            # YAML 1.1 reads 1e-11 (no dot) as a string
            try:
                val = tree[key] = float(val)
            except ValueError:
                pass
        ok = isinstance(val, _TYPES[kind]) and not (kind != "bool" and isinstance(val, bool))
        if not ok:
            raise ConfigError(f"config key '{name}' must be of type {kind}, got {val!r}")


@dataclass
class RunConfig:
    command: str
    output_dir: Path
    raw: dict

    def section(self, name: str) -> dict:
        return dict(self.raw.get(name) or {})

    def parameters(self) -> Parameters:
        p = self.section("parameters")
        if "alpha" not in p or "beta" not in p:
            raise ConfigError("parameters.alpha and parameters.beta are required")
        return _wrap("parameters", lambda: Parameters(float(p["alpha"]), float(p["beta"])))

    def grid(self) -> Grid:
        return _wrap("grid", lambda: grid_from_dict(self.section("grid")))

    def ic(self) -> InitialCondition:
        return _wrap("ic", lambda: ic_from_dict(self.section("ic")))

    def solver(self) -> SolverConfig:
        return _wrap("solver", lambda: solver_config_from_dict(self.section("solver")))


def _wrap(section, fn):
    try:
        return fn()
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"{section}: {exc}") from exc


def load_config(path, command: str, out: Optional[str] = None) -> RunConfig:
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    text = Path(path).read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    raw = {} if raw is None else raw
    _validate(raw, SCHEMA)
    if raw.get("command") not in (None, command):
        raise ConfigError(f"config is for command '{raw['command']}', not '{command}'")
    output_dir = Path(out if out is not None else raw.get("output_dir") or "blowup_lab_out")
    return RunConfig(command, output_dir, raw)


def help_text() -> str:
    lines = ["config keys:"]
    width = max(len(k) for k, _, _ in schema_keys())
    for key, kind, desc in schema_keys():
        lines.append(f"  {key:<{width}}  {kind:<5}  {desc}")
    return "\n".join(lines)
