"""Grids, parameters, initial data and the 5-point finite-difference stencils.

Everything here is shared by the solver, the classifier and the theorem
monitor. Two grid kinds exist:

* ``Periodic1D`` -- ``n_points`` equidistant samples on ``[x_min, x_max)``,
  the right endpoint identified with the left one.
* ``Radial3D``  -- ``n_points`` samples on ``[0, r_max]`` including both
  endpoints, used for spherically symmetric data in 3+1 dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np

MIN_POINTS = 16
DEFAULT_POINTS = 2**13


class GridKind(str, Enum):
    PERIODIC_1D = "Periodic1D"
    RADIAL_3D = "Radial3D"


@dataclass(frozen=True)
class Grid:
    kind: GridKind
    n_points: int
    x_min: float
    x_max: float

    @property
    def dx(self) -> float:
        if self.kind is GridKind.PERIODIC_1D:
            return (self.x_max - self.x_min) / self.n_points
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        """Sample coordinates, recomputed from the fields on every call."""
        return self.x_min + self.dx * np.arange(self.n_points, dtype=float)

    @property
    def periodic(self) -> bool:
        return self.kind is GridKind.PERIODIC_1D

    @property
    def edge_index(self) -> int:
        """Index of the sample watched for boundary hits."""
        # radial: the last free sample, the outermost one is clamped to zero
        return 0 if self.periodic else self.n_points - 2

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "n_points": self.n_points,
                "x_min": self.x_min, "x_max": self.x_max}


def build_grid(kind="Periodic1D", n_points=DEFAULT_POINTS, x_min=None, x_max=None) -> Grid:
    kind = GridKind(kind)
    n_points = int(n_points)
    if x_min is None:
        x_min = -math.pi if kind is GridKind.PERIODIC_1D else 0.0
    if x_max is None:
        x_max = math.pi
    x_min, x_max = float(x_min), float(x_max)
    if n_points < MIN_POINTS:
        raise ValueError(f"n_points must be >= {MIN_POINTS}, got {n_points}")
    if not x_max > x_min:
        raise ValueError(f"x_max ({x_max}) must exceed x_min ({x_min})")
    if kind is GridKind.RADIAL_3D and x_min != 0.0:
        raise ValueError(f"a Radial3D grid must start at r = 0, got x_min = {x_min}")
    return Grid(kind, n_points, x_min, x_max)


@dataclass(frozen=True)
class Parameters:
    """Coefficients of ``u_tt = alpha * u_x**2 + beta * u_xx``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha >= 0 and self.beta >= 0):
            raise ValueError(f"alpha and beta must be >= 0, got {self.alpha}, {self.beta}")

    @property
    def sound_speed(self) -> float:
        return math.sqrt(self.beta)


# -- initial data -------------------------------------------------------------

@dataclass(frozen=True)
class Zero:
    def __call__(self, x):
        return np.zeros_like(x, dtype=float)


@dataclass(frozen=True)
class Gaussian:
    """``amplitude * exp(-k * (x - center)**2)``"""

    amplitude: float
    k: float
    center: float = 0.0

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"Gaussian k must be > 0, got {self.k}")

    def __call__(self, x):
        with np.errstate(under="ignore"):
            return self.amplitude * np.exp(-self.k * (x - self.center) ** 2)


@dataclass(frozen=True)
class Quadratic:
    coeff: float

    def __call__(self, x):
        return self.coeff * np.asarray(x, dtype=float) ** 2


@dataclass(frozen=True)
class Samples:
    values: tuple

    def __call__(self, x):
        if len(self.values) != len(x):
            raise ValueError(f"got {len(self.values)} samples for a grid of {len(x)} points")
        return np.array(self.values, dtype=float)


FieldSpec = Union[Zero, Gaussian, Quadratic, Samples]


@dataclass(frozen=True)
class InitialCondition:
    u0: FieldSpec = field(default_factory=Zero)
    ut0: FieldSpec = field(default_factory=Zero)


def field_spec_to_dict(spec: FieldSpec) -> dict:
    if isinstance(spec, Zero):
        return {"type": "zero"}
    if isinstance(spec, Gaussian):
        return {"type": "gaussian", "amplitude": spec.amplitude, "k": spec.k, "center": spec.center}
    if isinstance(spec, Quadratic):
        return {"type": "quadratic", "coeff": spec.coeff}
    return {"type": "samples", "values": list(spec.values)}


def field_spec_from_dict(d: dict) -> FieldSpec:
    d = dict(d)
    kind = d.pop("type", None)
    allowed = {"zero": set(), "gaussian": {"amplitude", "k", "center"},
               "quadratic": {"coeff"}, "samples": {"values"}}
    if kind not in allowed:
        raise ValueError(f"unknown field type {kind!r}; expected one of {sorted(allowed)}")
    unknown = set(d) - allowed[kind]
    if unknown:
        raise ValueError(f"unknown key(s) for {kind} field: {sorted(unknown)}")
    if kind == "zero":
        return Zero()
    if kind == "gaussian":
        return Gaussian(float(d["amplitude"]), float(d["k"]), float(d.get("center", 0.0)))
    if kind == "quadratic":
        return Quadratic(float(d["coeff"]))
    return Samples(tuple(float(v) for v in d["values"]))


@dataclass
class FieldState:
    """Sampled ``(u, u_t)`` at time ``t``; owned by a single solver run."""

    t: float
    u: np.ndarray
    v: np.ndarray

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.u.copy(), self.v.copy())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.u).all() and np.isfinite(self.v).all())


def evaluate_ic(ic: InitialCondition, grid: Grid) -> FieldState:
    x = grid.x
    u = np.asarray(ic.u0(x), dtype=float).copy()
    v = np.asarray(ic.ut0(x), dtype=float).copy()
    if grid.kind is GridKind.RADIAL_3D:
        for name, spec, f in (("u0", ic.u0, u), ("ut0", ic.ut0, v)):
            _check_even_at_origin(name, spec, f, grid)
    return FieldState(0.0, u, v)


def _check_even_at_origin(name, spec, f, grid):
    if isinstance(spec, Gaussian) and spec.center != 0.0:
        raise ValueError(f"{name}: radial data must be even at r = 0; Gaussian centre is {spec.center}")
    if isinstance(spec, Samples):
        h = grid.dx
        slope = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
        scale = max(float(np.max(np.abs(f[:5]))), 1e-300)
        # a one-sided O(dx^4) slope of an even function is O(dx^3) * f''''
        if abs(slope) > 1e-3 * scale / h:
            raise ValueError(f"{name}: sampled radial data has slope {slope:g} at r = 0")


# -- stencils -------------------------------------------------------------------

def _check_len(f, grid):
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n_points,):
        raise ValueError(f"field of shape {f.shape} does not match grid of {grid.n_points} points")
    return f


def _padded(f, grid):
    """``f`` with two ghost samples on each side."""
    if grid.periodic:
        return np.concatenate([f[-2:], f, f[:2]])
    # even reflection at r = 0; the outer ghosts are never used (one-sided rows)
    return np.concatenate([f[2:0:-1], f, np.zeros(2)])


def d1(f, grid: Grid) -> np.ndarray:
    """Fourth-order centred first derivative."""
    f = _check_len(f, grid)
    h = grid.dx
    p = _padded(f, grid)
    out = (-p[4:] + 8.0 * p[3:-1] - 8.0 * p[1:-3] + p[:-4]) / (12.0 * h)
    if not grid.periodic:
        out[0] = 0.0
        out[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
        out[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    return out


def d2(f, grid: Grid) -> np.ndarray:
    """Fourth-order centred second derivative."""
    f = _check_len(f, grid)
    h2 = grid.dx**2
    p = _padded(f, grid)
    out = (-p[4:] + 16.0 * p[3:-1] - 30.0 * p[2:-2] + 16.0 * p[1:-3] - p[:-4]) / (12.0 * h2)
    if not grid.periodic:
        out[-2] = (11 * f[-1] - 20 * f[-2] + 6 * f[-3] + 4 * f[-4] - f[-5]) / (12 * h2)
        out[-1] = (35 * f[-1] - 104 * f[-2] + 114 * f[-3] - 56 * f[-4] + 11 * f[-5]) / (12 * h2)
    return out


def grid_from_dict(d: dict) -> Grid:
    unknown = set(d) - {"kind", "n_points", "x_min", "x_max"}
    if unknown:
        raise ValueError(f"unknown grid key(s): {sorted(unknown)}")
    return build_grid(d.get("kind", "Periodic1D"), d.get("n_points", DEFAULT_POINTS),
                      d.get("x_min"), d.get("x_max"))


def ic_to_dict(ic: InitialCondition) -> dict:
    return {"u0": field_spec_to_dict(ic.u0), "ut0": field_spec_to_dict(ic.ut0)}


def ic_from_dict(d: dict) -> InitialCondition:
    unknown = set(d) - {"u0", "ut0"}
    if unknown:
        raise ValueError(f"unknown ic key(s): {sorted(unknown)}")
    return InitialCondition(field_spec_from_dict(d.get("u0", {"type": "zero"})),
                            field_spec_from_dict(d.get("ut0", {"type": "zero"})))
