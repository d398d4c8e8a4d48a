import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blowup_lab.classify import (BlowupKind, Confidence, classify_curvature, classify_outcome,
                                 classify_terminal, divergence_distance, find_peaks)
from blowup_lab.core import FieldState, Gaussian, InitialCondition, Parameters, Zero, build_grid
from blowup_lab.solver import OutcomeKind, SolverConfig, run

G = build_grid("Periodic1D", 1024)


def bumps(centres, width, grid=G, heights=None):
    x = grid.x
    heights = heights or [1.0] * len(centres)
    return sum(h * np.exp(-0.5 * ((x - c) / width) ** 2) for c, h in zip(centres, heights))


def test_single_central_peak_is_v_type():
    c = classify_curvature(bumps([0.0], 0.05), G)
    assert c.kind is BlowupKind.V_TYPE and c.distance == pytest.approx(0.0, abs=1e-12)


def test_symmetric_pair_is_m_type():
    c = classify_curvature(bumps([-0.3, 0.3], 0.02), G)
    assert c.kind is BlowupKind.M_TYPE and c.confidence is Confidence.CLEAR
    assert c.distance == pytest.approx(0.3, abs=1e-3)
    assert c.peak_separation == pytest.approx(0.6, abs=2e-3)
    assert c.to_dict()["kind"] == "MType"


@pytest.mark.parametrize("offset,kind", [(3.75, BlowupKind.V_TYPE), (4.25, BlowupKind.M_TYPE)])
def test_flip_at_the_separation_floor(offset, kind):
    # narrow peaks at +-s flip from V to M where 2 s crosses 8 dx
    dx = G.dx
    c = classify_curvature(bumps([-offset * dx, offset * dx], dx), G)
    assert c.kind is kind
    if kind is BlowupKind.M_TYPE:
        assert c.confidence is Confidence.NEAR_LIMIT


def test_wide_separation_is_clear():
    dx = G.dx
    assert classify_curvature(bumps([-20 * dx, 20 * dx], dx), G).confidence is Confidence.CLEAR


def test_single_off_centre_peak_is_unresolved():
    assert classify_curvature(bumps([0.7], 0.03), G).kind is BlowupKind.UNRESOLVED


def test_asymmetric_pair_is_unresolved():
    assert classify_curvature(bumps([-0.3, 0.5], 0.02), G).kind is BlowupKind.UNRESOLVED


def test_radial_grid_is_mirrored():
    g = build_grid("Radial3D", 512)
    c = classify_curvature(bumps([0.4], 0.03, grid=g), g)
    assert c.kind is BlowupKind.M_TYPE and c.distance == pytest.approx(0.4, abs=1e-3)
    assert classify_curvature(bumps([0.0], 0.05, grid=g), g).kind is BlowupKind.V_TYPE


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(-2.5, 2.5), st.floats(0.1, 1.0)), min_size=1, max_size=4),
       st.floats(0.01, 0.2))
def test_reflection_invariance(peaks, width):
    a = bumps([p for p, _ in peaks], width, heights=[h for _, h in peaks])
    mirror = np.roll(a[::-1], 1)  # a(-x) on the periodic grid
    c1, c2 = classify_curvature(a, G), classify_curvature(mirror, G)
    assert c1.kind is c2.kind
    assert c1.distance == pytest.approx(c2.distance, abs=1e-9)
    assert 0.0 <= c1.distance <= np.pi + G.dx


def test_rejects_degenerate_fields():
    with pytest.raises(ValueError):
        classify_curvature(np.zeros(1024), G)
    bad = bumps([0.0], 0.05)
    bad[5] = np.nan
    with pytest.raises(ValueError):
        classify_curvature(bad, G)
    with pytest.raises(ValueError):
        classify_curvature(np.ones(10), G)


def test_terminal_state_below_threshold_rejected():
    s = FieldState(0.0, np.sin(G.x), np.zeros(1024))
    with pytest.raises(ValueError):
        classify_terminal(s, G, blow_threshold=1e6)


def test_find_peaks_subgrid_position():
    dx = G.dx
    a = bumps([0.3 * dx + 1.0], 2 * dx)
    (pos, h), = find_peaks(a, G.x, dx, wrap=True)
    assert pos == pytest.approx(1.0 + 0.3 * dx, abs=0.05 * dx)
    assert h == pytest.approx(1.0, abs=1e-2)


def test_divergence_distance_ties_prefer_the_origin():
    # |u_xx| of a Gaussian bump peaks at its centre
    s = FieldState(0.0, -bumps([-0.3, 0.3], 0.02), np.zeros(1024))
    assert divergence_distance(s, G) == pytest.approx(0.3, abs=1e-3)


def test_beta_zero_blowup_is_v_type():
    out, _ = run(InitialCondition(Zero(), Gaussian(-1.0, 16.0)), Parameters(1.0, 0.0), G)
    assert out.kind is OutcomeKind.BLOWUP
    c = classify_outcome(out, G)
    assert c.kind is BlowupKind.V_TYPE and c.distance < 4 * G.dx


def test_classify_outcome_rejects_non_blowup():
    out, _ = run(InitialCondition(Gaussian(1.0, 16.0), Zero()), Parameters(0.0, 1.0), G,
                 SolverConfig(t_max=0.1))
    assert out.kind is OutcomeKind.MAX_TIME
    with pytest.raises(ValueError):
        classify_outcome(out, G)
