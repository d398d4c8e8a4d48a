"""Rectangular (alpha, beta) sweeps with fixed initial data.

Cells are split into contiguous blocks, one per worker, and every result
lands in a pre-allocated slot, so the diagram does not depend on the
number of workers or on scheduling. Raw ``beta`` is stored; axis
transforms such as ``sqrt(beta)`` belong to plotting.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .classify import classify_outcome
from .core import Grid, InitialCondition, Parameters, grid_from_dict, ic_from_dict, ic_to_dict
from .solver import OutcomeKind, SolverConfig, run, solver_config_from_dict

COLUMNS = ("alpha", "beta", "outcome", "t_event", "distance", "class", "confidence")
THREADS_ENV = "BLOWUP_LAB_THREADS"
ERROR = "Error"


class IntegrityError(ValueError):
    """A stored diagram does not match its sidecar."""


@dataclass(frozen=True)
class Axis:
    min: float
    max: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 1:
            raise ValueError(f"axis count must be a positive integer, got {self.count}")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"axis scale must be 'linear' or 'log', got {self.scale!r}")
        if self.scale == "log" and not self.min > 0:
            raise ValueError("a log axis needs min > 0")
        if self.max < self.min:
            raise ValueError("axis max must be >= min")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.min)])
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)

    def to_dict(self) -> dict:
        return {"min": float(self.min), "max": float(self.max), "count": int(self.count),
                "scale": self.scale}

    @classmethod
    def from_dict(cls, d: dict) -> "Axis":
        unknown = set(d) - {"min", "max", "count", "scale"}
        if unknown:
            raise ValueError(f"unknown axis key(s): {sorted(unknown)}")
        return cls(float(d["min"]), float(d["max"]), int(d["count"]), d.get("scale", "linear"))


@dataclass(frozen=True)
class SweepSpec:
    alpha_axis: Axis
    beta_axis: Axis
    ic: InitialCondition
    grid: Grid
    solver: SolverConfig
    workers: int = 1

    def __post_init__(self):
        if int(self.workers) != self.workers or self.workers < 1:
            raise ValueError(f"workers must be a positive integer, got {self.workers}")

    def to_dict(self, with_workers: bool = True) -> dict:
        d = {"alpha_axis": self.alpha_axis.to_dict(), "beta_axis": self.beta_axis.to_dict(),
             "ic": ic_to_dict(self.ic), "grid": self.grid.to_dict(),
             "solver": self.solver.to_dict()}
        if with_workers:
            d["workers"] = int(self.workers)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        unknown = set(d) - {"alpha_axis", "beta_axis", "ic", "grid", "solver", "workers"}
        if unknown:
            raise ValueError(f"unknown sweep key(s): {sorted(unknown)}")
        return cls(Axis.from_dict(d["alpha_axis"]), Axis.from_dict(d["beta_axis"]),
                   ic_from_dict(d.get("ic", {})), grid_from_dict(d.get("grid", {})),
                   solver_config_from_dict(d.get("solver", {})), int(d.get("workers", 1)))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.alpha_axis.count, self.beta_axis.count


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def spec_hash(spec: SweepSpec) -> str:
    """Digest of everything that determines the cells; the worker count is excluded."""
    return hashlib.sha256(canonical_json(spec.to_dict(with_workers=False)).encode()).hexdigest()


@dataclass(frozen=True)
class Cell:
    alpha: float
    beta: float
    outcome: str
    t_event: Optional[float] = None
    distance: Optional[float] = None
    class_kind: Optional[str] = None
    confidence: Optional[str] = None

    def row(self) -> List[str]:
        def fmt(v):
            return "" if v is None else repr(float(v))

        return [fmt(self.alpha), fmt(self.beta), self.outcome, fmt(self.t_event),
                fmt(self.distance), self.class_kind or "", self.confidence or ""]

    @classmethod
    def from_row(cls, row) -> "Cell":
        def num(s):
            return None if s == "" else float(s)

        a, b, outcome, t, dist, kind, conf = row
        return cls(float(a), float(b), outcome, num(t), num(dist), kind or None, conf or None)


@dataclass
class PhaseDiagram:
    spec: SweepSpec
    spec_hash: str
    cells: List[Cell]  # row-major, alpha index first

    def cell(self, i: int, j: int) -> Cell:
        return self.cells[i * self.spec.beta_axis.count + j]

    def field(self, name: str) -> np.ndarray:
        """Matrix of one numeric column, NaN where absent."""
        vals = [getattr(c, name) for c in self.cells]
        arr = np.array([np.nan if v is None else v for v in vals], dtype=float)
        return arr.reshape(self.spec.shape)

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for c in self.cells:
            w.writerow(c.row())
        return buf.getvalue()


def run_cell(spec: SweepSpec, alpha: float, beta: float) -> Cell:
    """Simulate and classify one lattice point; failures are recorded, not raised."""
    try:
        outcome, _ = run(spec.ic, Parameters(alpha, beta), spec.grid, spec.solver)
    except Exception as exc:  # noqa: BLE001 -- a cell failure must not stop the sweep
        return Cell(alpha, beta, ERROR, class_kind=type(exc).__name__)
    kind = outcome.kind
    if kind is OutcomeKind.BLOWUP:
        try:
            c = classify_outcome(outcome, spec.grid)
        except ValueError:
            return Cell(alpha, beta, kind.value, outcome.t_event)
        return Cell(alpha, beta, kind.value, outcome.t_event, c.distance, c.kind.value,
                    c.confidence.value)
    if kind is OutcomeKind.BREAKDOWN:
        return Cell(alpha, beta, kind.value, outcome.t_event)
    # no blowup time or distance for boundary hits and time-outs
    return Cell(alpha, beta, kind.value)


def _run_block(spec: SweepSpec, points):
    return [run_cell(spec, a, b) for a, b in points]


def effective_workers(requested: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            n = int(cap)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {cap!r}") from None
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {cap!r}")
        return max(1, min(requested, n))
    return max(1, requested)


def run_sweep(spec: SweepSpec) -> PhaseDiagram:
    points = [(float(a), float(b)) for a in spec.alpha_axis.values() for b in spec.beta_axis.values()]
    workers = min(effective_workers(spec.workers), len(points))
    slots: List[Optional[Cell]] = [None] * len(points)
    if workers == 1:
        slots[:] = _run_block(spec, points)
    else:
        bounds = np.linspace(0, len(points), workers + 1).round().astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [(lo, pool.submit(_run_block, spec, points[lo:hi]))
                       for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
            for lo, fut in futures:
                block = fut.result()
                slots[lo:lo + len(block)] = block
    return PhaseDiagram(spec, spec_hash(spec), slots)


# -- persistence -------------------------------------------------------------------

def diagram_paths(directory, digest: str) -> Tuple[Path, Path]:
    d = Path(directory)
    return d / f"sweep_{digest}.csv", d / f"sweep_{digest}.json"


def save_diagram(pd: PhaseDiagram, directory) -> Tuple[Path, Path]:
    """Write ``sweep_<hash>.csv`` and its JSON sidecar into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = diagram_paths(directory, pd.spec_hash)
    text = pd.csv_text()
    csv_path.write_text(text)
    sidecar = {"spec": pd.spec.to_dict(with_workers=False), "spec_hash": pd.spec_hash,
               "cells_sha256": hashlib.sha256(text.encode()).hexdigest(),
               "columns": list(COLUMNS), "shape": list(pd.spec.shape)}
    json_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


def load_diagram(path) -> PhaseDiagram:
    """Load from the CSV, the sidecar, or a directory holding exactly one diagram."""
    path = Path(path)
    if path.is_dir():
        found = sorted(path.glob("sweep_*.json"))
        if len(found) != 1:
            raise FileNotFoundError(f"expected one sweep_*.json in {path}, found {len(found)}")
        path = found[0]
    json_path = path.with_suffix(".json")
    csv_path = path.with_suffix(".csv")
    sidecar = json.loads(json_path.read_text())
    spec = SweepSpec.from_dict(sidecar["spec"])
    digest = spec_hash(spec)
    if digest != sidecar.get("spec_hash"):
        raise IntegrityError(f"spec hash mismatch in {json_path}")
    text = csv_path.read_text()
    if hashlib.sha256(text.encode()).hexdigest() != sidecar.get("cells_sha256"):
        raise IntegrityError(f"cell data in {csv_path} do not match the sidecar digest")
    rows = list(csv.reader(io.StringIO(text)))
    if tuple(rows[0]) != COLUMNS:
        raise IntegrityError(f"unexpected columns {rows[0]}")
    cells = [Cell.from_row(r) for r in rows[1:]]
    if len(cells) != spec.shape[0] * spec.shape[1]:
        raise IntegrityError(f"{len(cells)} cells for a {spec.shape} lattice")
    return PhaseDiagram(spec, digest, cells)
