import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blowup_lab.core import (Gaussian, InitialCondition, Quadratic, Samples, Zero,
                             build_grid, d1, d2, evaluate_ic, field_spec_from_dict,
                             field_spec_to_dict, grid_from_dict, ic_from_dict, ic_to_dict,
                             Parameters)


# -- grids ---------------------------------------------------------------------

def test_periodic_grid_example():
    g = build_grid("Periodic1D", 8192)
    assert g.dx == pytest.approx(2 * math.pi / 8192, rel=1e-15)
    assert g.x[0] == -math.pi
    assert g.x[-1] == pytest.approx(math.pi - g.dx, rel=1e-15)


def test_radial_grid_example():
    g = build_grid("Radial3D", 4096, x_min=0.0, x_max=math.pi)
    assert g.x[0] == 0.0
    assert g.x[-1] == pytest.approx(math.pi, rel=1e-15)
    assert g.dx == pytest.approx(math.pi / 4095, rel=1e-15)


@pytest.mark.parametrize("args", [("Periodic1D", 8), ("Periodic1D", 64, 1.0, 1.0),
                                  ("Radial3D", 64, 0.5, 2.0), ("Cartesian", 64)])
def test_grid_rejects(args):
    with pytest.raises(ValueError):
        build_grid(*args)


def test_coordinates_reproducible_bitwise():
    a, b = build_grid("Periodic1D", 1000), build_grid("Periodic1D", 1000)
    assert np.array_equal(a.x, b.x)
    assert a.x.tobytes() == b.x.tobytes()


def test_grid_dict_round_trip_and_unknown_key():
    g = build_grid("Radial3D", 128)
    assert grid_from_dict(g.to_dict()) == g
    with pytest.raises(ValueError):
        grid_from_dict({"kind": "Periodic1D", "points": 64})


def test_parameters_reject_negative():
    with pytest.raises(ValueError):
        Parameters(-1.0, 0.1)
    with pytest.raises(ValueError):
        Parameters(1.0, -0.1)
    assert Parameters(0.0, 4.0).sound_speed == 2.0


# -- initial data ----------------------------------------------------------------

def test_negative_gaussian_velocity():
    g = build_grid("Periodic1D", 8192)
    ic = InitialCondition(Zero(), Gaussian(-1.0, 120 * math.pi**2))
    s = evaluate_ic(ic, g)
    assert np.all(s.u == 0.0)
    assert s.v[4096] == -1.0 and g.x[4096] == 0.0
    assert np.isfinite(s.v).all()


def test_zero_initial_data():
    s = evaluate_ic(InitialCondition(), build_grid("Periodic1D", 64))
    assert s.t == 0.0 and not s.u.any() and not s.v.any()


def test_gaussian_tail_underflows_without_error():
    g = build_grid("Periodic1D", 8192)
    with np.errstate(all="raise"):
        s = evaluate_ic(InitialCondition(Zero(), Gaussian(-1.0, 120 * math.pi**2)), g)
    assert s.v[0] == 0.0


def test_quadratic_and_samples():
    g = build_grid("Periodic1D", 32)
    s = evaluate_ic(InitialCondition(Quadratic(2.0), Samples(tuple(range(32)))), g)
    assert np.allclose(s.u, 2 * g.x**2, rtol=0, atol=0)
    assert np.array_equal(s.v, np.arange(32.0))


def test_samples_length_mismatch():
    with pytest.raises(ValueError):
        evaluate_ic(InitialCondition(Samples((1.0, 2.0))), build_grid("Periodic1D", 32))


def test_radial_requires_even_data():
    g = build_grid("Radial3D", 64)
    with pytest.raises(ValueError):
        evaluate_ic(InitialCondition(Gaussian(1.0, 4.0, center=0.5)), g)
    with pytest.raises(ValueError):
        evaluate_ic(InitialCondition(Samples(tuple(g.x))), g)
    evaluate_ic(InitialCondition(Samples(tuple(np.cos(g.x)))), g)


def test_gaussian_rejects_nonpositive_k():
    with pytest.raises(ValueError):
        Gaussian(1.0, 0.0)


@pytest.mark.parametrize("spec", [Zero(), Gaussian(-1.0, 3.0, 0.25), Quadratic(0.5), Samples((1.0, 2.5))])
def test_field_spec_round_trip(spec):
    assert field_spec_from_dict(field_spec_to_dict(spec)) == spec


def test_field_spec_unknown_keys():
    with pytest.raises(ValueError):
        field_spec_from_dict({"type": "gaussian", "amplitude": 1, "k": 1, "width": 2})
    with pytest.raises(ValueError):
        field_spec_from_dict({"type": "sech"})
    ic = InitialCondition(Gaussian(1.0, 2.0), Quadratic(3.0))
    assert ic_from_dict(ic_to_dict(ic)) == ic


# -- stencils ----------------------------------------------------------------------

def test_d1_sine_periodic():
    g = build_grid("Periodic1D", 8192)
    assert np.max(np.abs(d1(np.sin(g.x), g) - np.cos(g.x))) < 1e-10


def test_d2_constant_is_zero():
    g = build_grid("Periodic1D", 256)
    assert np.max(np.abs(d2(np.full(256, 3.7), g))) < 1e-9


@pytest.mark.parametrize("deg", [0, 1, 2, 3, 4])
def test_stencils_exact_on_quartics_in_the_interior(deg):
    g = build_grid("Periodic1D", 64)
    x = g.x
    f = x**deg
    exact1 = deg * x ** max(deg - 1, 0)
    exact2 = deg * (deg - 1) * x ** max(deg - 2, 0)
    inner = slice(2, -2)  # away from the periodic seam
    assert np.allclose(d1(f, g)[inner], exact1[inner], atol=1e-10, rtol=1e-10)
    assert np.allclose(d2(f, g)[inner], exact2[inner], atol=1e-8, rtol=1e-8)


@pytest.mark.parametrize("deg", [0, 1, 2, 3, 4])
def test_radial_one_sided_rows_exact_on_quartics(deg):
    g = build_grid("Radial3D", 64)
    r = g.x
    f = r**deg
    for k in (-1, -2):
        assert d1(f, g)[k] == pytest.approx(deg * r[k] ** max(deg - 1, 0), rel=1e-9, abs=1e-9)
        assert d2(f, g)[k] == pytest.approx(deg * (deg - 1) * r[k] ** max(deg - 2, 0),
                                            rel=1e-7, abs=1e-7)


def test_radial_even_reflection():
    g = build_grid("Radial3D", 256)
    r = g.x
    assert d1(r**2, g)[0] == 0.0
    assert np.allclose(d1(r**2, g)[1:-2], 2 * r[1:-2], atol=1e-10)
    assert d2(np.cos(r), g)[0] == pytest.approx(-1.0, abs=1e-7)


def test_stencils_reject_wrong_length():
    with pytest.raises(ValueError):
        d1(np.zeros(10), build_grid("Periodic1D", 64))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=255), st.integers(min_value=1, max_value=4))
def test_stencils_commute_with_translation(shift, mode):
    # translation by whole samples is exact on the periodic ring
    g = build_grid("Periodic1D", 256)
    f = np.sin(mode * g.x) + 0.3 * np.cos(3 * g.x) ** 2
    for op in (d1, d2):
        assert np.allclose(op(np.roll(f, shift), g), np.roll(op(f, g), shift), atol=1e-12, rtol=0)
