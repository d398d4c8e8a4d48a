"""V-type / M-type classification of a terminal blowup state.

A V-type blowup concentrates the curvature in a single peak at the
origin; an M-type blowup shows two symmetric steep fronts away from it.
The decision is made on local maxima of ``|u_xx|`` located to sub-grid
precision by fitting a parabola through each discrete maximum and its two
neighbours. All thresholds are in grid units, so finer grids shrink the
band where the two shapes cannot be told apart.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from .core import FieldState, Grid, d2

PEAK_FRACTION = 0.5
SEPARATION_FLOOR_DX = 8.0
DISTANCE_FLOOR_DX = 4.0
SYMMETRY_TOL_DX = 2.0


class BlowupKind(str, Enum):
    V_TYPE = "VType"
    M_TYPE = "MType"
    UNRESOLVED = "Unresolved"


class Confidence(str, Enum):
    CLEAR = "Clear"
    NEAR_LIMIT = "NearLimit"


@dataclass(frozen=True)
class BlowupClassification:
    kind: BlowupKind
    distance: float
    peak_separation: float
    confidence: Confidence

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "distance": self.distance,
                "peak_separation": self.peak_separation,
                "confidence": self.confidence.value}


def _full_line(a: np.ndarray, grid: Grid) -> Tuple[np.ndarray, np.ndarray, bool]:
    """Samples of ``a`` on a line through the origin and whether they wrap."""
    if grid.periodic:
        return grid.x, a, True
    r = grid.x
    return np.concatenate([-r[:0:-1], r]), np.concatenate([a[:0:-1], a]), False


def find_peaks(a: np.ndarray, x: np.ndarray, dx: float, wrap: bool,
               fraction: float = PEAK_FRACTION) -> List[Tuple[float, float]]:
    """Local maxima of ``a`` above ``fraction * max(a)`` as ``(x, height)``.

    Positions and heights come from the parabola through the maximum and
    its neighbours; plateaus report their left-most sample.
    """
    n = len(a)
    if wrap:
        left, right = np.roll(a, 1), np.roll(a, -1)
    else:
        left = np.concatenate([[-np.inf], a[:-1]])
        right = np.concatenate([a[1:], [-np.inf]])
    top = float(np.max(a))
    idx = np.nonzero((a > left) & (a >= right) & (a >= fraction * top))[0]
    peaks = []
    for i in idx:
        am, a0, ap = left[i], a[i], right[i]
        delta = 0.0
        if np.isfinite(am) and np.isfinite(ap):
            curv = am - 2.0 * a0 + ap
            if curv < 0:
                delta = float(np.clip(0.5 * (am - ap) / curv, -0.5, 0.5))
        height = a0 - 0.25 * (am - ap) * delta if delta else a0
        pos = x[i] + delta * dx
        if wrap and pos < x[0]:
            pos += n * dx
        peaks.append((float(pos), float(height)))
    return peaks


def classify_curvature(uxx: np.ndarray, grid: Grid) -> BlowupClassification:
    """Classify from a sampled curvature field."""
    uxx = np.asarray(uxx, dtype=float)
    if uxx.shape != (grid.n_points,):
        raise ValueError(f"curvature of shape {uxx.shape} does not match grid of {grid.n_points} points")
    if not np.isfinite(uxx).all():
        raise ValueError("curvature field contains non-finite values")
    x, a, wrap = _full_line(np.abs(uxx), grid)
    dx = grid.dx
    if not np.max(a) > 0:
        raise ValueError("curvature vanishes identically; not a blowup state")
    sep_floor = SEPARATION_FLOOR_DX * dx
    dist_floor = DISTANCE_FLOOR_DX * dx
    peaks = find_peaks(a, x, dx, wrap)
    # strongest first; among equal heights the one nearer the origin
    peaks.sort(key=lambda p: (-p[1], abs(p[0])))
    distance = abs(peaks[0][0])

    if all(abs(p) < dist_floor for p, _ in peaks):
        return BlowupClassification(BlowupKind.V_TYPE, distance, 0.0, Confidence.CLEAR)
    if len(peaks) == 1:
        return BlowupClassification(BlowupKind.UNRESOLVED, distance, 0.0, Confidence.CLEAR)
    (xa, _), (xb, _) = peaks[0], peaks[1]
    separation = abs(xa - xb)
    symmetric = xa * xb < 0 and abs(xa + xb) <= SYMMETRY_TOL_DX * dx
    confidence = Confidence.NEAR_LIMIT if separation <= 2.0 * sep_floor else Confidence.CLEAR
    if symmetric and separation >= sep_floor:
        return BlowupClassification(BlowupKind.M_TYPE, distance, separation, confidence)
    return BlowupClassification(BlowupKind.UNRESOLVED, distance, separation, confidence)


def classify_terminal(state: FieldState, grid: Grid,
                      blow_threshold: Optional[float] = None) -> BlowupClassification:
    """Classify a terminal state; with ``blow_threshold`` set, non-blowup states are rejected."""
    if not state.is_finite():
        raise ValueError("terminal state contains non-finite values")
    uxx = d2(state.u, grid)
    if blow_threshold is not None and not np.max(np.abs(uxx)) >= blow_threshold:
        raise ValueError(f"max|u_xx| = {np.max(np.abs(uxx)):.3g} is below the blowup threshold "
                         f"{blow_threshold:.3g}; not a blowup state")
    return classify_curvature(uxx, grid)


def classify_outcome(outcome, grid: Grid) -> BlowupClassification:
    """Classify a :class:`~blowup_lab.solver.RunOutcome`; only ``Blowup`` is accepted."""
    from .solver import OutcomeKind

    if outcome.kind is not OutcomeKind.BLOWUP:
        raise ValueError(f"cannot classify a {outcome.kind.value} outcome")
    return classify_terminal(outcome.final_state, grid)


def divergence_distance(state: FieldState, grid: Grid) -> float:
    """``|x|`` of the global ``|u_xx|`` maximum, refined below the grid spacing."""
    x, a, wrap = _full_line(np.abs(d2(state.u, grid)), grid)
    top = np.max(a)
    cand = np.nonzero(a == top)[0]
    i = int(cand[np.argmin(np.abs(x[cand]))])
    peaks = [p for p in find_peaks(a, x, grid.dx, wrap, fraction=1.0)
             if abs(p[0] - x[i]) <= 0.5 * grid.dx]
    return abs(peaks[0][0]) if peaks else float(abs(x[i]))
