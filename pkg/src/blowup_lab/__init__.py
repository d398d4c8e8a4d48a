"""Finite-time blowup in ``u_tt = alpha * u_x**2 + beta * u_xx``.

Submodules
----------
core       grids, parameters, initial data, 5-point stencils
predictor  curvature ODE at a critical point and its blowup times
solver     method-of-lines integration with event detection
classify   V-type / M-type decision on terminal states
monitor    divergence functionals of the normalized equation
sweep      (alpha, beta) phase diagrams
cli        the ``blowup-lab`` command
"""

from .core import (FieldState, Gaussian, Grid, GridKind, InitialCondition, Parameters, Quadratic,
                   Samples, Zero, build_grid, d1, d2, evaluate_ic)
from .solver import OutcomeKind, RunOutcome, SolverConfig, run

__all__ = [
    "FieldState", "Gaussian", "Grid", "GridKind", "InitialCondition", "Parameters", "Quadratic",
    "Samples", "Zero", "build_grid", "d1", "d2", "evaluate_ic",
    "OutcomeKind", "RunOutcome", "SolverConfig", "run",
]

__version__ = "0.1.0"
