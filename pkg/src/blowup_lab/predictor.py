"""Exact analysis of ``u_xx`` at a critical point when ``beta = 0``.

With ``u_x(0, t) = 0`` the curvature ``b(t) = u_xx(0, t)`` obeys the
reduced equation ``b'' = 2 alpha b**2`` with the conserved energy

    c = 0.5 * b'(0)**2 - (2/3) * alpha * b(0)**3.

This module classifies the four possible behaviours, evaluates the blowup
time ``t_plus`` and the collapse time ``t_minus`` as improper integrals, and
integrates the reduced equation directly so the two routes can be compared.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import rk

A_CONSTANT = 2.5479  # t_plus * (alpha * b'(0))**(1/3) when b(0) = 0


class NonIntegrableError(ValueError):
    """The requested time integral does not exist for these data."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested accuracy."""


class Case(str, Enum):
    DIVERGES_UP = "DivergesUp"
    COLLAPSES_THEN_DIVERGES = "CollapsesThenDiverges"
    DIVERGES_FROM_REST = "DivergesFromRest"
    CONSTANT = "Constant"


@dataclass(frozen=True)
class CriticalData:
    alpha: float
    b0: float
    db0: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")


@dataclass(frozen=True)
class Prop1Verdict:
    case_tag: Case
    c: float
    t_plus: Optional[float] = None
    t_minus: Optional[float] = None
    b_star: Optional[float] = None
    t_total: Optional[float] = None
    marginal: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["case_tag"] = self.case_tag.value
        return d


# -- Gauss-Kronrod (7, 15) ----------------------------------------------------

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes
_WG_FULL = np.zeros(15)
_WG_FULL[[1, 3, 5]] = _WG[:3]
_WG_FULL[7] = _WG[3]
_WG_FULL[[13, 11, 9]] = _WG[:3]


def _gk15(f, a, b):
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    fx = f(mid + half * _NODES)
    k = half * float(_WK @ fx)
    g = half * float(_WG_FULL @ fx)
    return k, abs(k - g)


def gauss_kronrod(f, a, b, rtol=1e-12, atol=1e-300, max_panels=2000, initial_panels=4):
    """Globally adaptive G7/K15 quadrature of a vectorised ``f`` over ``[a, b]``."""
    if a == b:
        return 0.0
    edges = np.linspace(a, b, initial_panels + 1)
    heap = []
    total, err_total = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = _gk15(f, lo, hi)
        heapq.heappush(heap, (-err, lo, hi, val))
        total += val
        err_total += err
    while err_total > max(atol, rtol * abs(total)):
        if len(heap) >= max_panels:
            raise QuadratureError(
                f"no convergence on [{a}, {b}]: error {err_total:.3g} vs value {total:.6g}")
        neg_err, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        total += v1 + v2 - val
        err_total += e1 + e2 + neg_err
    if not math.isfinite(total):
        raise QuadratureError(f"non-finite integral on [{a}, {b}]")
    return float(total)


# -- the energy and the time integrals ------------------------------------------

def energy_constant(cd: CriticalData) -> float:
    return 0.5 * cd.db0**2 - (2.0 / 3.0) * cd.alpha * cd.b0**3


def _is_marginal(cd: CriticalData, c: float) -> bool:
    scale = max(0.5 * cd.db0**2, (2.0 / 3.0) * cd.alpha * abs(cd.b0) ** 3)
    return abs(c) <= 1e-12 * scale


def _normalized(cd: CriticalData):
    """Unit-sized data and the time scale, from ``b -> lam b, t -> t / sqrt(alpha lam)``."""
    lam = max(abs(cd.b0), abs(cd.db0) ** (2.0 / 3.0) / cd.alpha ** (1.0 / 3.0))
    s = math.sqrt(cd.alpha) * math.sqrt(lam)
    return CriticalData(1.0, cd.b0 / lam, cd.db0 / lam / s), lam, s


def t_plus(cd: CriticalData, rtol=1e-12) -> float:
    """Time for ``b`` to run from ``b0`` to infinity when ``b'(0) >= 0``.

    ``[b0, p]`` is mapped by ``b = b0 + w**2`` (removing the inverse square
    root at ``b0`` when ``b'(0) = 0``), ``[p, inf)`` by ``b = 1 / w**2``.
    """
    if cd.db0 < 0:
        raise NonIntegrableError("t_plus needs b'(0) >= 0; route collapse cases through classify()")
    if cd.db0 == 0 and cd.b0 == 0:
        raise NonIntegrableError("b stays at rest: no blowup time")
    cd, _, scale = _normalized(cd)
    alpha, b0, db0 = cd.alpha, cd.b0, cd.db0
    c = energy_constant(cd)
    k = 4.0 * alpha / 3.0
    p = max(b0 + 1.0, 1.0)

    def head(w):
        q = 3 * b0 * b0 + 3 * b0 * w * w + w**4
        rad = db0 * db0 + k * w * w * q
        with np.errstate(invalid="ignore", divide="ignore"):
            out = 2.0 * w / np.sqrt(rad)
        return out

    def tail(w):
        rad = k + 2.0 * c * w**6
        return 2.0 / np.sqrt(rad)

    if k * p**3 + 2 * c <= 0:
        raise NonIntegrableError(f"radicand vanishes inside the interval for {cd}")
    return (gauss_kronrod(head, 0.0, math.sqrt(p - b0), rtol=rtol)
            + gauss_kronrod(tail, 0.0, 1.0 / math.sqrt(p), rtol=rtol)) / scale


def b_star(cd: CriticalData) -> float:
    """Turning point where ``b' = 0``: ``(2/3) alpha b*^3 = -c``."""
    return float(np.cbrt(-1.5 * energy_constant(cd) / cd.alpha))


def t_minus_and_bstar(cd: CriticalData, rtol=1e-12):
    """Collapse time from ``b0`` down to ``b*`` when ``b'(0) < 0``."""
    if cd.db0 >= 0:
        raise ValueError("t_minus is defined only for b'(0) < 0")
    c = energy_constant(cd)
    if _is_marginal(cd, c):
        raise ValueError("c = 0: b approaches 0 only asymptotically, no finite t_minus")
    cd, lam, scale = _normalized(cd)
    bs = b_star(cd)
    k = 4.0 * cd.alpha / 3.0

    def f(w):
        return 2.0 / np.sqrt(k * (3 * bs * bs + 3 * bs * w * w + w**4))

    span = cd.b0 - bs
    if span <= 0:
        return 0.0, bs * lam
    return gauss_kronrod(f, 0.0, math.sqrt(span), rtol=rtol) / scale, bs * lam


def classify(cd: CriticalData) -> Prop1Verdict:
    c = energy_constant(cd)
    if cd.db0 > 0:
        tp = t_plus(cd)
        return Prop1Verdict(Case.DIVERGES_UP, c, t_plus=tp, t_total=tp)
    if cd.db0 < 0:
        if _is_marginal(cd, c):
            return Prop1Verdict(Case.COLLAPSES_THEN_DIVERGES, c, b_star=0.0, marginal=True)
        tm, bs = t_minus_and_bstar(cd)
        tp = t_plus(CriticalData(cd.alpha, bs, 0.0))
        return Prop1Verdict(Case.COLLAPSES_THEN_DIVERGES, c, t_plus=tp, t_minus=tm,
                            b_star=bs, t_total=tm + tp)
    if cd.b0 != 0:
        tp = t_plus(cd)
        return Prop1Verdict(Case.DIVERGES_FROM_REST, c, t_plus=tp, t_total=tp)
    return Prop1Verdict(Case.CONSTANT, c)


def tail_correction(alpha: float, b_threshold: float) -> float:
    """Leading-order time left between ``b = b_threshold`` and blowup."""
    return math.sqrt(3.0 / (alpha * b_threshold))


# -- direct integration of b'' = 2 alpha b^2 ----------------------------------

@dataclass
class ReducedTrajectory:
    t: np.ndarray
    b: np.ndarray
    db: np.ndarray
    status: str  # "crossed" | "t_end" | "breakdown"
    t_cross: Optional[float] = None

    def energy(self, alpha: float) -> np.ndarray:
        return 0.5 * self.db**2 - (2.0 / 3.0) * alpha * self.b**3


def integrate_reduced_ode(cd: CriticalData, t_end: float, blow_threshold: float,
                          rtol=1e-12, atol=1e-12, h_min=1e-15) -> ReducedTrajectory:
    if not blow_threshold > abs(cd.b0):
        raise ValueError("blow_threshold must exceed |b0|")
    alpha = cd.alpha

    def fun(_t, y):
        return np.array([y[1], 2.0 * alpha * y[0] * y[0]])

    t, y = 0.0, np.array([cd.b0, cd.db0], dtype=float)
    f = fun(t, y)
    ts, bs, dbs = [t], [y[0]], [y[1]]
    rate = float(np.max(np.abs(f) / (atol + rtol * np.abs(y))))
    h = min(t_end, 1e-2 / rate if rate > 0 else t_end)
    while t < t_end:
        h = min(h, t_end - t)
        y_new, f_new, err = rk.dopri_step(fun, t, y, f, h)
        en = rk.error_norm(err, y, y_new, rtol, atol)
        if en <= 1.0:
            t_new = t + h
            if y_new[0] >= blow_threshold:
                def g(s):
                    return rk.hermite(t, y, f, t_new, y_new, f_new, s)[0] - blow_threshold
                t_cross = brentq(g, t, t_new, xtol=1e-15, rtol=4 * np.finfo(float).eps)
                yc = rk.hermite(t, y, f, t_new, y_new, f_new, t_cross)
                ts.append(t_cross), bs.append(yc[0]), dbs.append(yc[1])
                return ReducedTrajectory(np.array(ts), np.array(bs), np.array(dbs), "crossed", t_cross)
            t, y, f = t_new, y_new, f_new
            ts.append(t), bs.append(y[0]), dbs.append(y[1])
        h = rk.next_step(h, en)
        if h < h_min * max(1.0, abs(t)):
            return ReducedTrajectory(np.array(ts), np.array(bs), np.array(dbs), "breakdown")
    return ReducedTrajectory(np.array(ts), np.array(bs), np.array(dbs), "t_end")


def closed_form_oracle(alpha: float, t0: float, t: float):
    """``f = 3 / (2 alpha (t0 - t)**2)`` solving ``f'' = 4 alpha f**2``, and ``f'``."""
    if not alpha > 0 or not t0 > 0:
        raise ValueError("alpha and t0 must be > 0")
    if not 0 <= t < t0:
        raise ValueError(f"t must lie in [0, t0), got t = {t}")
    s = t0 - t
    return 3.0 / (2.0 * alpha * s * s), 3.0 / (alpha * s**3)
