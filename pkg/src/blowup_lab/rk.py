"""Dormand-Prince 5(4) embedded pair with FSAL and Hermite dense output.

Works on flat float arrays; the PDE solver and the reduced ODE both go
through :func:`dopri_step`.
"""

import numpy as np

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0


def _combine(y, h, coeffs, ks):
    out = y.copy()
    for a, k in zip(coeffs, ks):
        if a != 0.0:
            out += (h * a) * k
    return out


def dopri_step(fun, t, y, f0, h):
    """Take one trial step of size ``h`` from ``(t, y)``.

    ``f0`` is ``fun(t, y)`` (reused through FSAL). Returns the fifth-order
    solution, its derivative (the FSAL stage) and the embedded error vector.
    """
    ks = [f0]
    for i in range(1, 7):
        ks.append(fun(t + C[i] * h, _combine(y, h, A[i], ks)))
    y_new = _combine(y, h, A[6], ks)
    err = np.zeros_like(y)
    for e, k in zip(E, ks):
        if e != 0.0:
            err += (h * e) * k
    return y_new, ks[6], err


def error_norm(err, y, y_new, rtol, atol):
    """Max-norm of the error scaled by ``atol + rtol * |y|``."""
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.max(np.abs(err) / scale))


def next_step(h, err_norm):
    if err_norm == 0.0:
        return FAC_MAX * h
    return h * min(FAC_MAX, max(FAC_MIN, SAFETY * err_norm ** -0.2))


def hermite(t0, y0, f0, t1, y1, f1, t):
    """Cubic Hermite interpolant through both step ends and their slopes."""
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1
