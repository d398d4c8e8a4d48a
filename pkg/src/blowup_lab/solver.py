"""Method-of-lines integration of ``u_tt = alpha u_x**2 + beta u_xx``.

The second-order equation is split into ``u_t = v``, ``v_t = alpha (u_x)**2
+ beta u_xx`` (``+ 2 beta u_r / r`` on a radial grid) and advanced with
adaptive Dormand-Prince steps. After every accepted step the run checks,
in this order, for non-finite values, curvature blowup, a boundary hit and
the end time.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import rk
from .core import FieldState, Grid, GridKind, InitialCondition, Parameters, d1, d2, evaluate_ic

EVENT_TIME_TOL = 1e-6
MONOTONE_WINDOW = 10


class NonFiniteStateError(FloatingPointError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    rel_tol: float = 1e-11
    abs_tol: float = 1e-11
    dt_init: float = 1e-4
    dt_min: float = 1e-13
    dt_max: float = 0.1
    t_max: float = 50.0
    blow_threshold: float = 1e6
    boundary_threshold: float = 1e-4
    snapshot_times: Optional[tuple] = None

    def __post_init__(self):
        if not (0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise ValueError("need 0 < dt_min <= dt_init <= dt_max")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be > 0")
        if not (self.blow_threshold > 0 and self.boundary_threshold > 0):
            raise ValueError("thresholds must be > 0")
        if not self.t_max > 0:
            raise ValueError("t_max must be > 0")
        if self.snapshot_times is not None:
            object.__setattr__(self, "snapshot_times",
                               tuple(sorted(float(s) for s in self.snapshot_times)))

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["snapshot_times"] = None if self.snapshot_times is None else list(self.snapshot_times)
        return d


class OutcomeKind(str, Enum):
    BLOWUP = "Blowup"
    BOUNDARY_HIT = "BoundaryHit"
    MAX_TIME = "MaxTimeReached"
    BREAKDOWN = "NumericalBreakdown"


@dataclass
class RunOutcome:
    kind: OutcomeKind
    t_event: float
    location: Optional[float]
    peak_uxx: float
    final_state: FieldState = field(repr=False)
    step_count: int = 0
    rejected_count: int = 0
    rhs_eval_count: int = 0
    suspected_blowup: bool = False
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "t_event": self.t_event,
            "location": self.location,
            "peak_uxx": self.peak_uxx,
            "step_count": self.step_count,
            "rejected_count": self.rejected_count,
            "rhs_eval_count": self.rhs_eval_count,
            "suspected_blowup": self.suspected_blowup,
            "message": self.message,
        }


def _make_rhs(params: Parameters, grid: Grid):
    """Flat right-hand side ``y = [u, v] -> [v, accel]`` for the integrator."""
    n = grid.n_points
    alpha, beta = params.alpha, params.beta
    if grid.kind is GridKind.RADIAL_3D:
        r = grid.x
        inv_r = np.zeros(n)
        inv_r[1:] = 1.0 / r[1:]

    def fun(_t, y):
        u, v = y[:n], y[n:]
        ux = d1(u, grid)
        uxx = d2(u, grid)
        if grid.kind is GridKind.PERIODIC_1D:
            acc = alpha * ux * ux + beta * uxx
            return np.concatenate([v, acc])
        acc = alpha * ux * ux + beta * (uxx + 2.0 * inv_r * ux)
        # u_rr + 2 u_r / r -> 3 u_rr at the origin for even u
        acc[0] = 3.0 * beta * uxx[0]
        du = v.copy()
        du[-1] = 0.0
        acc[-1] = 0.0
        return np.concatenate([du, acc])

    return fun


def rhs(state: FieldState, params: Parameters, grid: Grid):
    if not state.is_finite():
        raise NonFiniteStateError(f"non-finite field values at t = {state.t}")
    out = _make_rhs(params, grid)(state.t, np.concatenate([state.u, state.v]))
    n = grid.n_points
    return out[:n], out[n:]


def step_dopri(state: FieldState, params: Parameters, grid: Grid, cfg: SolverConfig, dt: float):
    """One Dormand-Prince trial step.

    Returns ``(new_state, err, dt_next)``; on rejection (``err > 1``) the
    returned state is the input state.
    """
    fun = _make_rhs(params, grid)
    n = grid.n_points
    y = np.concatenate([state.u, state.v])
    y_new, _, err = rk.dopri_step(fun, state.t, y, fun(state.t, y), dt)
    en = rk.error_norm(err, y, y_new, cfg.rel_tol, cfg.abs_tol)
    if not math.isfinite(en):
        return state, math.inf, dt * rk.FAC_MIN
    dt_next = min(rk.next_step(dt, en), cfg.dt_max)
    if en > 1.0:
        return state, en, dt_next
    return FieldState(state.t + dt, y_new[:n], y_new[n:]), en, dt_next


def discrete_energy(state: FieldState, params: Parameters, grid: Grid) -> float:
    """``sum(v**2 + beta * (d1 u)**2) * dx``, conserved in the linear limit."""
    ux = d1(state.u, grid)
    return float(np.sum(state.v**2 + params.beta * ux**2) * grid.dx)


def _monotone(history) -> bool:
    h = list(history)
    return len(h) > MONOTONE_WINDOW and all(b > a for a, b in zip(h, h[1:]))


def run(ic: InitialCondition, params: Parameters, grid: Grid, cfg: SolverConfig = SolverConfig()):
    """Integrate from ``t = 0`` until an event; returns ``(RunOutcome, snapshots)``.

    ``snapshots`` holds one :class:`FieldState` per requested snapshot time
    reached before the event, obtained from the Hermite dense output.
    """
    state0 = evaluate_ic(ic, grid)
    if not state0.is_finite():
        raise ValueError("initial data contain non-finite values")
    n = grid.n_points
    x = grid.x
    fun = _make_rhs(params, grid)
    nfev = 0

    def counted(t, y):
        nonlocal nfev
        nfev += 1
        return fun(t, y)

    t, y = 0.0, np.concatenate([state0.u, state0.v])
    f = counted(t, y)
    h = cfg.dt_init
    wanted = deque(s for s in (cfg.snapshot_times or ()) if 0.0 <= s <= cfg.t_max)
    snapshots = []
    while wanted and wanted[0] == 0.0:
        snapshots.append(state0.copy())
        wanted.popleft()
    accepted = rejected = 0
    peak = float(np.max(np.abs(d2(y[:n], grid))))
    peaks = deque([peak], maxlen=MONOTONE_WINDOW + 1)

    def finish(kind, t_event, yy, peak_val, location=None, suspected=False, message=""):
        return RunOutcome(kind, float(t_event), location, float(peak_val),
                          FieldState(float(t_event), yy[:n].copy(), yy[n:].copy()),
                          accepted, rejected, nfev, suspected, message), snapshots

    while True:
        h_try = min(h, cfg.dt_max, cfg.t_max - t)
        y_new, f_new, err = rk.dopri_step(counted, t, y, f, h_try)
        en = rk.error_norm(err, y, y_new, cfg.rel_tol, cfg.abs_tol)
        if math.isfinite(en) and en <= 1.0:
            t_new = t + h_try if h_try < cfg.t_max - t else cfg.t_max
            accepted += 1
            while wanted and wanted[0] <= t_new:
                s = wanted.popleft()
                ys = rk.hermite(t, y, f, t_new, y_new, f_new, s)
                snapshots.append(FieldState(s, ys[:n].copy(), ys[n:].copy()))
            if not np.isfinite(y_new).all():
                return finish(OutcomeKind.BREAKDOWN, t_new, y_new, peak, message="non-finite values")
            uxx = d2(y_new[:n], grid)
            peak_new = float(np.max(np.abs(uxx)))
            if peak_new > cfg.blow_threshold:
                t_ev = _refine_event(grid, cfg.blow_threshold, t, y, f, t_new, y_new, f_new)
                ye = y_new if t_ev == t_new else rk.hermite(t, y, f, t_new, y_new, f_new, t_ev)
                ae = np.abs(d2(ye[:n], grid))
                j = int(np.argmax(ae))
                return finish(OutcomeKind.BLOWUP, t_ev, ye, ae[j], location=float(x[j]))
            if abs(y_new[grid.edge_index]) > cfg.boundary_threshold:
                return finish(OutcomeKind.BOUNDARY_HIT, t_new, y_new, peak_new)
            t, y, f, peak = t_new, y_new, f_new, peak_new
            peaks.append(peak)
            if t >= cfg.t_max:
                return finish(OutcomeKind.MAX_TIME, t, y, peak)
            h = rk.next_step(h_try, en)
        else:
            rejected += 1
            h = rk.next_step(h_try, en) if math.isfinite(en) else h_try * rk.FAC_MIN
        h = min(h, cfg.dt_max)
        if h < cfg.dt_min:
            suspected = _monotone(peaks)
            msg = "step size underflow" + (" (suspected blowup)" if suspected else "")
            j = int(np.argmax(np.abs(d2(y[:n], grid))))
            return finish(OutcomeKind.BREAKDOWN, t, y, peak, location=float(x[j]),
                          suspected=suspected, message=msg)


def _refine_event(grid, threshold, t0, y0, f0, t1, y1, f1):
    """Bisect the dense output for the first ``max|u_xx| > threshold``."""
    n = grid.n_points
    lo, hi = t0, t1
    while hi - lo > EVENT_TIME_TOL:
        mid = 0.5 * (lo + hi)
        ym = rk.hermite(t0, y0, f0, t1, y1, f1, mid)
        if np.max(np.abs(d2(ym[:n], grid))) > threshold:
            hi = mid
        else:
            lo = mid
    return hi


# -- snapshot files -------------------------------------------------------------

def write_snapshot_csv(path, state: FieldState, grid: Grid):
    path = Path(path)
    uxx = d2(state.u, grid)
    data = np.column_stack([grid.x, state.u, state.v, uxx])
    with path.open("w") as fh:
        fh.write(f"# t={state.t!r}\n")
        fh.write("x,u,v,uxx\n")
        np.savetxt(fh, data, delimiter=",", fmt="%.17g")


def read_snapshot_csv(path):
    """Returns ``(FieldState, x)`` from a snapshot file."""
    path = Path(path)
    with path.open() as fh:
        first = fh.readline().strip()
        header = fh.readline().strip()
    if not first.startswith("# t=") or header != "x,u,v,uxx":
        raise ValueError(f"{path} is not a snapshot file")
    t = float(first[len("# t="):])
    data = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
    return FieldState(t, data[:, 1].copy(), data[:, 2].copy()), data[:, 0].copy()


def write_snapshots(directory, snapshots: Sequence[FieldState], grid: Grid):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, s in enumerate(snapshots):
        p = directory / f"snapshot_{i:04d}.csv"
        write_snapshot_csv(p, s, grid)
        paths.append(p)
    return paths


def read_snapshots(directory):
    paths = sorted(Path(directory).glob("snapshot_*.csv"))
    out = [read_snapshot_csv(p) for p in paths]
    return [s for s, _ in out], (out[0][1] if out else None)


def solver_config_from_dict(d: dict) -> SolverConfig:
    unknown = set(d) - set(SolverConfig.__dataclass_fields__)
    if unknown:
        raise ValueError(f"unknown solver key(s): {sorted(unknown)}")
    kw = {k: (None if v is None else tuple(v)) if k == "snapshot_times" else float(v)
          for k, v in d.items()}
    return SolverConfig(**kw)
