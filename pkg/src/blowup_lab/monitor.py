"""Divergence functionals for the normalized equation ``u_tt - u_xx = u_x**2``.

For data supported in ``|x| <= X`` and some ``X0 in (0, X)`` with
``X1 = (X - X0) / 2``, the monitored quantities are

* ``M(x) = f(x)/2 + (1/2) int_x^X g``  and  ``eps = int_{X0}^X M``,
* ``W(t) = int_{t+X0}^{t+X} u(xi, t) dxi``, which equals ``H''(t)``,
* ``H(t) = int_{X1}^t (t - tau) W(tau) dtau``,
* ``J(t) = (X - X0)**2 t**2 / 4``,
* ``G1(t)``, the triple integral of ``u_x**2`` over the backward light
  cones of ``[t + X0, t + X]``, and its lower bound

      G1_lower(t) = 1/(t + X) int_0^t (t - tau) K(tau) dtau,
      K(tau) = int_{tau+X0}^{tau+X} (xi - tau - X0) u_x(xi, tau)**2 dxi.

The checked inequalities are

* ``C1``: ``H(X1) = H'(X1) = 0``;
* ``C2``: ``H''(t) >= eps`` for ``t >= X1``;
* ``C3``: ``H''(t) >= H(t)**2 / J(t)`` for ``t > X1``;
* ``C4``: ``G1_lower(t) <= G1(t)`` for ``t > X1``.

Only the positive-x half is used. Integrals in space and time are exact
integrals of not-a-knot cubic splines through the samples.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .core import (FieldState, Gaussian, Grid, GridKind, InitialCondition, Parameters, Quadratic,
                   Samples, Zero, build_grid, d1)
from .solver import SolverConfig

SUPPORT_TOL = 1e-12
SNAPSHOT_DENSITY = 20  # snapshots per X - X0
TOL_REL = 1e-6
DEFAULT_X0_FRACTION = 0.25


class MonitorError(ValueError):
    pass


class InsufficientSnapshotsError(MonitorError):
    pass


class BoundaryContaminationError(MonitorError):
    pass


class SupportError(MonitorError):
    pass


# -- rescaling ------------------------------------------------------------------

@dataclass(frozen=True)
class ScaleRecord:
    """``u(y, t) = (alpha / beta) * v(sqrt(beta) * y, t)``; time is unchanged."""

    alpha: float
    beta: float

    @property
    def amplitude(self) -> float:
        return self.alpha / self.beta

    @property
    def length(self) -> float:
        """Normalized length per original length, ``y = x / sqrt(beta)``."""
        return 1.0 / math.sqrt(self.beta)

    def map_grid(self, grid: Grid) -> Grid:
        s = self.length
        return build_grid(grid.kind, grid.n_points, grid.x_min * s, grid.x_max * s)

    def map_solver(self, cfg: SolverConfig) -> SolverConfig:
        """Thresholds for the normalized run that mirror those of the original run."""
        # u_yy = alpha * v_xx and u = (alpha / beta) * v
        return SolverConfig(**{**cfg.to_dict(),
                               "blow_threshold": cfg.blow_threshold * self.alpha,
                               "boundary_threshold": cfg.boundary_threshold * self.amplitude,
                               "abs_tol": cfg.abs_tol * self.amplitude})

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta,
                "amplitude": self.amplitude, "length": self.length}


def _rescale_spec(spec, rec: ScaleRecord):
    lam, sb = rec.amplitude, math.sqrt(rec.beta)
    if isinstance(spec, Zero):
        return spec
    if isinstance(spec, Gaussian):
        return Gaussian(spec.amplitude * lam, spec.k * rec.beta, spec.center / sb)
    if isinstance(spec, Quadratic):
        # lam * c * (sqrt(beta) y)**2
        return Quadratic(spec.coeff * lam * rec.beta)
    if isinstance(spec, Samples):
        return Samples(tuple(lam * v for v in spec.values))
    raise TypeError(f"unsupported field spec {spec!r}")


def rescale_to_normalized(params: Parameters, ic: InitialCondition):
    """Data for ``u_tt - u_xx = u_x**2`` equivalent to a run with ``params``.

    Returns ``(InitialCondition, ScaleRecord)``. Sampled data keep their
    values at corresponding grid points, so they must be used on the grid
    returned by :meth:`ScaleRecord.map_grid`.
    """
    if not (params.alpha > 0 and params.beta > 0):
        raise ValueError("rescaling needs alpha > 0 and beta > 0")
    rec = ScaleRecord(params.alpha, params.beta)
    return InitialCondition(_rescale_spec(ic.u0, rec), _rescale_spec(ic.ut0, rec)), rec


# -- spatial helpers -------------------------------------------------------------

def _half_line(grid: Grid):
    """Indices of samples with ``x >= 0`` in increasing ``x``."""
    if grid.kind is GridKind.RADIAL_3D:
        return np.arange(grid.n_points)
    idx = np.nonzero(grid.x >= 0.0)[0]
    if len(idx) == 0 or grid.x[idx[0]] > 0.5 * grid.dx:
        raise MonitorError("the grid has no sample at x = 0")
    return idx


def support_radius(f, g, grid: Grid, tol: float = SUPPORT_TOL) -> float:
    """Smallest grid coordinate ``X > 0`` with ``|f| + |g| <= tol`` for all ``|x| >= X``."""
    x = grid.x
    big = np.nonzero(np.abs(f) + np.abs(g) > tol)[0]
    if len(big) == 0:
        return grid.dx
    return float(np.max(np.abs(x[big])) + grid.dx)


def compute_M(f, g, grid: Grid, X: float) -> Tuple[np.ndarray, np.ndarray]:
    """``M`` on the samples ``0 <= x <= X``; returns ``(x, M)``."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    x = grid.x
    outside = np.abs(x) >= X
    if np.any(np.abs(f[outside]) + np.abs(g[outside]) > SUPPORT_TOL):
        raise SupportError(f"data are not supported in |x| < {X}")
    idx = _half_line(grid)
    xs = x[idx]
    keep = xs <= X + 0.5 * grid.dx
    xm, fm, gm = xs[keep], f[idx][keep], g[idx][keep]
    if len(xm) < 4:
        raise MonitorError("fewer than four samples in [0, X]")
    G = CubicSpline(xm, gm).antiderivative()
    tail = G(X) - G(xm)
    M = 0.5 * fm + 0.5 * tail
    return xm, M


def epsilon_of(M_samples, x_samples, X0: float, X: float) -> float:
    """``int_{X0}^X M`` from samples of ``M`` at ``x_samples``."""
    if not X0 < X:
        raise ValueError("need X0 < X")
    return float(CubicSpline(x_samples, M_samples).integrate(X0, X))


@dataclass(frozen=True)
class TheoremInputs:
    X: float
    X0: float
    x_samples: np.ndarray = field(repr=False)
    M_samples: np.ndarray = field(repr=False)
    epsilon: float = 0.0

    @property
    def X1(self) -> float:
        return 0.5 * (self.X - self.X0)

    @property
    def hypothesis_met(self) -> bool:
        inside = (self.x_samples > self.X0) & (self.x_samples < self.X)
        return bool(self.epsilon > 0 and np.all(self.M_samples[inside] >= 0))


def theorem_inputs(state0: FieldState, grid: Grid, X: float, X0: float) -> TheoremInputs:
    if not 0 < X0 < X:
        raise ValueError(f"need 0 < X0 < X, got X0 = {X0}, X = {X}")
    xm, M = compute_M(state0.u, state0.v, grid, X)
    return TheoremInputs(X, X0, xm, M, epsilon_of(M, xm, X0, X))


def J_closed(t, X: float, X0: float):
    return (X - X0) ** 2 * np.asarray(t, dtype=float) ** 2 / 4.0


def epsilon_history(snapshots: Sequence[FieldState], grid: Grid, X0_fraction: float = DEFAULT_X0_FRACTION,
                    tol: float = SUPPORT_TOL) -> List[Tuple[float, float, float]]:
    """``(t, X(t), eps(t))`` treating each snapshot as fresh data.

    ``X(t)`` is the numerical support radius of the snapshot and ``eps`` is
    integrated over ``[X0_fraction * X(t), X(t)]``.
    """
    if not 0 <= X0_fraction < 1:
        raise ValueError("X0_fraction must lie in [0, 1)")
    out = []
    for s in snapshots:
        X = support_radius(s.u, s.v, grid, tol)
        xm, M = compute_M(s.u, s.v, grid, X)
        out.append((s.t, X, epsilon_of(M, xm, X0_fraction * X, X)))
    return out


# -- H and the inequality checks -------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    margin: float
    detail: str = ""


@dataclass
class MonitorReport:
    times: np.ndarray
    H: np.ndarray
    Hp: np.ndarray
    Hpp: np.ndarray
    G0: float
    G1_lower: np.ndarray
    G1: np.ndarray
    J: np.ndarray
    checks: List[Check]
    tol_abs: float
    hypothesis_met: bool
    # max |H'' - eps - G1/2| for t >= X1; the Duhamel formula carries a factor 1/2
    identity_residual: float = math.nan

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)

    def to_dict(self) -> dict:
        return {
            "times": self.times.tolist(), "H": self.H.tolist(), "Hp": self.Hp.tolist(),
            "Hpp": self.Hpp.tolist(), "G0": self.G0, "G1_lower": self.G1_lower.tolist(),
            "G1": self.G1.tolist(), "J": self.J.tolist(), "tol_abs": self.tol_abs,
            "hypothesis_met": self.hypothesis_met, "identity_residual": self.identity_residual,
            "checks": [{"id": c.name, "passed": c.passed, "margin": c.margin, "detail": c.detail}
                       for c in self.checks],
        }

    def write_json(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


class _Slice:
    """Spline antiderivatives of one snapshot on the positive half-line."""

    def __init__(self, x, u, q):
        # first antiderivative of u, first and second of q = u_x**2
        self.U = CubicSpline(x, u).antiderivative()
        qs = CubicSpline(x, q)
        self.Q = qs.antiderivative()
        self._R = qs.antiderivative(2)
        self._xe = x[-1]
        self._Re, self._Qe = float(self._R(x[-1])), float(self.Q(x[-1]))

    def R(self, z):
        # u_x vanishes past the sampled half-line: R continues linearly
        z = np.asarray(z, dtype=float)
        return np.where(z <= self._xe, self._R(np.minimum(z, self._xe)),
                        self._Re + self._Qe * (z - self._xe))


def _time_integral_weights(times, vals):
    """Spline in time with its second antiderivative, anchored at ``times[0]``."""
    if len(times) >= 4:
        return CubicSpline(times, vals).antiderivative(2)
    raise InsufficientSnapshotsError("need at least four snapshots")


def _second_integral(P, a, t):
    """``int_a^t (t - tau) w(tau) dtau`` given ``P'' = w``."""
    dP = P.derivative()
    return P(t) - P(a) - dP(a) * (t - a)


def monitor_H(snapshots: Sequence[FieldState], grid: Grid, inputs: TheoremInputs,
              direct_G1: bool = True) -> MonitorReport:
    """Evaluate ``H``, ``H''``, ``G1`` and its lower bound and run C1 to C4.

    ``snapshots`` must start at ``t = 0`` and be spaced by at most
    ``(X - X0) / 20``; their last time ``T`` needs ``T + X`` inside the grid.
    """
    X, X0, X1 = inputs.X, inputs.X0, inputs.X1
    if len(snapshots) < 4:
        raise InsufficientSnapshotsError("need at least four snapshots")
    times = np.array([s.t for s in snapshots], dtype=float)
    if times[0] != 0.0:
        raise InsufficientSnapshotsError(f"snapshots must start at t = 0, first is {times[0]}")
    if np.any(np.diff(times) <= 0):
        raise InsufficientSnapshotsError("snapshot times must increase strictly")
    gap = float(np.max(np.diff(times)))
    if gap > (X - X0) / SNAPSHOT_DENSITY * (1 + 1e-12):
        raise InsufficientSnapshotsError(
            f"snapshot spacing {gap:.3g} exceeds (X - X0)/{SNAPSHOT_DENSITY} = {(X - X0) / SNAPSHOT_DENSITY:.3g}")
    if times[-1] < X1:
        raise InsufficientSnapshotsError(f"snapshots end at {times[-1]} before X1 = {X1}")
    idx = _half_line(grid)
    xs = grid.x[idx]
    # the light cone |x| <= t + X must stay away from the far edge and its periodic image
    reach = times[-1] + X
    edge = xs[-1] if grid.kind is GridKind.RADIAL_3D else grid.x_max - 2 * grid.dx
    if reach > edge:
        raise BoundaryContaminationError(
            f"support reaches {reach:.4g} by t = {times[-1]:.4g}; the domain edge is at {edge:.4g}")

    slices = []
    for s in snapshots:
        ux = d1(s.u, grid)
        slices.append(_Slice(xs, s.u[idx], (ux * ux)[idx]))

    W = np.array([sl.U(t + X) - sl.U(t + X0) for sl, t in zip(slices, times)])
    K = np.array([(X - X0) * sl.Q(t + X) - sl.R(t + X) + sl.R(t + X0)
                  for sl, t in zip(slices, times)])

    P_W = _time_integral_weights(times, W)
    H = _second_integral(P_W, X1, times)
    dP_W = P_W.derivative()
    Hp = dP_W(times) - dP_W(X1)
    H_at_X1 = float(_second_integral(P_W, X1, X1))
    Hp_at_X1 = float(dP_W(X1) - dP_W(X1))
    P_K = _time_integral_weights(times, K)
    G1_lower = _second_integral(P_K, 0.0, times) / (times + X)
    G1 = np.full_like(times, np.nan)
    if direct_G1:
        for j, t in enumerate(times):
            G1[j] = _g1_direct(slices, times, j, X, X0)

    J = J_closed(times, X, X0)
    tol_abs = TOL_REL * max(1.0, float(np.max(np.abs(W))))
    eps = inputs.epsilon
    late = times >= X1
    after = times > X1

    checks = []
    c1 = max(abs(H_at_X1), abs(Hp_at_X1))
    checks.append(Check("C1", c1 <= tol_abs, tol_abs - c1, "H(X1) and H'(X1)"))
    m2 = float(np.min(W[late] - eps)) if late.any() else math.inf
    detail = "" if eps > 0 else "hypothesis unmet: epsilon <= 0"
    checks.append(Check("C2", m2 >= -tol_abs and eps > 0, m2, detail))
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = np.where(J > 0, H * H / J, 0.0)
    m3 = float(np.min(W[after] - bound[after])) if after.any() else math.inf
    checks.append(Check("C3", m3 >= -tol_abs, m3, "H'' >= H^2 / J"))
    if direct_G1 and after.any():
        m4 = float(np.min(G1[after] - G1_lower[after]))
        checks.append(Check("C4", m4 >= -tol_abs, m4, "G1 >= lower bound"))
    else:
        checks.append(Check("C4", True, math.inf, "direct G1 not evaluated"))
    resid = float(np.max(np.abs(W - eps - 0.5 * G1)[late])) if direct_G1 and late.any() else math.nan
    return MonitorReport(times, H, Hp, W, eps, G1_lower, G1, J, checks, tol_abs,
                         inputs.hypothesis_met, resid)


def _g1_direct(slices, times, j, X, X0) -> float:
    """``int_{t+X0}^{t+X} dx int_0^t dtau int_{x-t+tau}^{x+t-tau} u_x**2`` at ``t = times[j]``."""
    t = times[j]
    if j == 0:
        return 0.0
    tau = times[: j + 1]
    vals = np.empty(j + 1)
    for k in range(j + 1):
        R, s = slices[k].R, t - tau[k]
        # inner xi integral is Q(x + s) - Q(x - s); integrate again in x
        vals[k] = (R(t + X + s) - R(t + X0 + s)) - (R(t + X - s) - R(t + X0 - s))
    if j + 1 >= 4:
        return float(CubicSpline(tau, vals).integrate(0.0, t))
    return float(np.trapezoid(vals, tau))


def F_functional(snapshots: Sequence[FieldState], grid: Grid, X: float, X0: float,
                 times: Optional[np.ndarray] = None) -> np.ndarray:
    """``F(t) = int_0^t int (t - tau)(xi - tau - X0) u_x dxi dtau`` at snapshot times."""
    idx = _half_line(grid)
    xs = grid.x[idx]
    ts = np.array([s.t for s in snapshots], dtype=float)
    vals = []
    for s, tau in zip(snapshots, ts):
        ux = d1(s.u, grid)[idx]
        sp = CubicSpline(xs, (xs - tau - X0) * ux)
        vals.append(sp.integrate(tau + X0, tau + X))
    P = _time_integral_weights(ts, np.array(vals))
    return _second_integral(P, 0.0, ts if times is None else times)


def H0_functional(snapshots: Sequence[FieldState], grid: Grid, X: float, X0: float) -> np.ndarray:
    """``int_0^t (t - tau) W(tau) dtau``, the partner of ``F`` under integration by parts."""
    idx = _half_line(grid)
    xs = grid.x[idx]
    ts = np.array([s.t for s in snapshots], dtype=float)
    W = [CubicSpline(xs, s.u[idx]).integrate(tau + X0, tau + X) for s, tau in zip(snapshots, ts)]
    P = _time_integral_weights(ts, np.array(W))
    return _second_integral(P, 0.0, ts)
