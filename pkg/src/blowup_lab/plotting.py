"""Plain SVG figures: stacked solution profiles and phase-diagram heat maps."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .core import FieldState
from .sweep import PhaseDiagram

WIDTH, HEIGHT = 640, 420
MARGIN = 60
BLANK = "#ffffff"  # boundary hits: the wave reached the edge first
MISSING = "#d9d9d9"

# a few viridis stops, interpolated linearly
_STOPS = np.array([
    [68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37],
], dtype=float)


def _viridis(s: float) -> str:
    s = min(max(s, 0.0), 1.0) * (len(_STOPS) - 1)
    i = min(int(s), len(_STOPS) - 2)
    c = _STOPS[i] + (s - i) * (_STOPS[i + 1] - _STOPS[i])
    return "#%02x%02x%02x" % tuple(int(round(v)) for v in c)


def time_color(s: float) -> str:
    """Blue at early times to red at late times; the red channel grows with ``s``."""
    s = min(max(s, 0.0), 1.0)
    return "#%02x%02x%02x" % (int(round(255 * s)), 40, int(round(255 * (1 - s))))


def _svg(body, title):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">\n'
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>\n'
            f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>\n')
    return head + "\n".join(body) + "\n</svg>\n"


def _frame(xlabel, ylabel, xlim, ylim):
    x0, y0, x1, y1 = MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN / 2, MARGIN / 1.5
    out = [f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="#000"/>',
           f'<text x="{(x0 + x1) / 2}" y="{HEIGHT - 18}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>',
           f'<text x="16" y="{(y0 + y1) / 2}" text-anchor="middle" font-size="13" '
           f'transform="rotate(-90 16 {(y0 + y1) / 2})">{escape(ylabel)}</text>',
           f'<text x="{x0}" y="{y0 + 16}" text-anchor="middle" font-size="11">{xlim[0]:.4g}</text>',
           f'<text x="{x1}" y="{y0 + 16}" text-anchor="middle" font-size="11">{xlim[1]:.4g}</text>',
           f'<text x="{x0 - 6}" y="{y0}" text-anchor="end" font-size="11">{ylim[0]:.4g}</text>',
           f'<text x="{x0 - 6}" y="{y1 + 10}" text-anchor="end" font-size="11">{ylim[1]:.4g}</text>']
    return out, (x0, y0, x1, y1)


def profile_stack_svg(snapshots: Sequence[FieldState], x, path, title="u(x, t)") -> Path:
    """One polyline per snapshot, coloured by time order."""
    if len(snapshots) == 0:
        raise ValueError("no snapshots to plot")
    x = np.asarray(x, dtype=float)
    snaps = sorted(snapshots, key=lambda s: s.t)
    lo = min(float(np.min(s.u)) for s in snaps)
    hi = max(float(np.max(s.u)) for s in snaps)
    if hi == lo:
        hi, lo = hi + 1.0, lo - 1.0
    body, (x0, y0, x1, y1) = _frame("x", "u", (x[0], x[-1]), (lo, hi))
    t0, t1 = snaps[0].t, snaps[-1].t
    for s in snaps:
        frac = 0.0 if t1 == t0 else (s.t - t0) / (t1 - t0)
        px = x0 + (x - x[0]) / (x[-1] - x[0]) * (x1 - x0)
        py = y0 - (s.u - lo) / (hi - lo) * (y0 - y1)
        step = max(1, len(x) // 800)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px[::step], py[::step]))
        body.append(f'<polyline data-t="{s.t!r}" fill="none" stroke="{time_color(frac)}" '
                    f'stroke-width="1.2" points="{pts}"/>')
    path = Path(path)
    path.write_text(_svg(body, title))
    return path


def heatmap_svg(pd: PhaseDiagram, path, field: str = "t_event", beta_axis: str = "sqrt_beta",
                title=None) -> Path:
    """Cells coloured by ``field``; boundary hits are left blank."""
    if field not in ("t_event", "distance"):
        raise ValueError(f"field must be t_event or distance, got {field!r}")
    if beta_axis not in ("beta", "sqrt_beta"):
        raise ValueError(f"beta_axis must be beta or sqrt_beta, got {beta_axis!r}")
    na, nb = pd.spec.shape
    alphas = pd.spec.alpha_axis.values()
    betas = pd.spec.beta_axis.values()
    bvals = np.sqrt(betas) if beta_axis == "sqrt_beta" else betas
    vals = pd.field(field)
    finite = vals[np.isfinite(vals)]
    vmin, vmax = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    ylabel = "sqrt(beta)" if beta_axis == "sqrt_beta" else "beta"
    body, (x0, y0, x1, y1) = _frame("alpha", ylabel, (alphas[0], alphas[-1]), (bvals[0], bvals[-1]))
    cw, ch = (x1 - x0) / na, (y0 - y1) / nb
    for i in range(na):
        for j in range(nb):
            c = pd.cell(i, j)
            v = vals[i, j]
            if c.outcome == "BoundaryHit":
                color = BLANK
            elif math.isfinite(v):
                color = _viridis(0.5 if vmax == vmin else (v - vmin) / (vmax - vmin))
            else:
                color = MISSING
            body.append(f'<rect class="cell" data-outcome="{c.outcome}" x="{x0 + i * cw:.2f}" '
                        f'y="{y0 - (j + 1) * ch:.2f}" width="{cw:.2f}" height="{ch:.2f}" fill="{color}"/>')
    title = title or f"{field} over (alpha, {ylabel})"
    path = Path(path)
    path.write_text(_svg(body, title))
    return path
