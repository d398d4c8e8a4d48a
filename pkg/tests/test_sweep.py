import json
import math

import numpy as np
import pytest

from blowup_lab.classify import classify_outcome
from blowup_lab.core import Gaussian, InitialCondition, Parameters, Samples, Zero, build_grid
from blowup_lab.solver import SolverConfig, run
from blowup_lab.sweep import (COLUMNS, THREADS_ENV, Axis, Cell, IntegrityError, SweepSpec,
                              effective_workers, load_diagram, run_cell, run_sweep, save_diagram,
                              spec_hash)

NEG = InitialCondition(Zero(), Gaussian(-1.0, 16.0))
GRID = build_grid("Periodic1D", 256)


def spec(alpha=(1.0, 1.0, 1), beta=(0.0, 0.0, 1), ic=NEG, workers=1, **solver):
    return SweepSpec(Axis(*alpha), Axis(*beta), ic, GRID, SolverConfig(**solver), workers)


def test_axis_values():
    assert np.allclose(Axis(0.0, 1.0, 3).values(), [0.0, 0.5, 1.0])
    assert np.allclose(Axis(1e-2, 1.0, 3, "log").values(), [1e-2, 1e-1, 1.0])
    assert Axis(2.0, 5.0, 1).values().tolist() == [2.0]
    for bad in [(0.0, 1.0, 0), (0.0, 1.0, 2, "log"), (1.0, 0.0, 2), (0.0, 1.0, 2, "cubic")]:
        with pytest.raises(ValueError):
            Axis(*bad)


def test_single_cell_equals_a_direct_run():
    s = spec()
    pd = run_sweep(s)
    out, _ = run(NEG, Parameters(1.0, 0.0), GRID, s.solver)
    c = classify_outcome(out, GRID)
    assert pd.cells == [Cell(1.0, 0.0, "Blowup", out.t_event, c.distance, c.kind.value, c.confidence.value)]


def test_boundary_hit_cells_have_no_event_time():
    s = spec(alpha=(0.0, 0.0, 1), beta=(1.0, 1.0, 1), ic=InitialCondition(Gaussian(1.0, 16.0), Zero()),
             t_max=10.0, rel_tol=1e-8, abs_tol=1e-8)
    (cell,) = run_sweep(s).cells
    assert cell.outcome == "BoundaryHit"
    assert cell.t_event is None and cell.distance is None and cell.class_kind is None


def test_cell_failure_is_recorded():
    s = spec(ic=InitialCondition(Samples((1.0, 2.0))))
    (cell,) = run_sweep(s).cells
    assert cell.outcome == "Error" and cell.class_kind == "ValueError"


def test_save_load_round_trip(tmp_path):
    pd = run_sweep(spec(beta=(0.0, 0.05, 2)))
    csv_path, json_path = save_diagram(pd, tmp_path)
    assert csv_path.name == f"sweep_{pd.spec_hash}.csv"
    for src in (csv_path, json_path, tmp_path):
        back = load_diagram(src)
        assert back.cells == pd.cells and back.spec == pd.spec and back.spec_hash == pd.spec_hash
    header = csv_path.read_text().splitlines()[0]
    assert header == ",".join(COLUMNS)


def test_tampered_cells_are_detected(tmp_path):
    pd = run_sweep(spec())
    csv_path, _ = save_diagram(pd, tmp_path)
    text = csv_path.read_text().replace("Blowup", "BoundaryHit")
    csv_path.write_text(text)
    with pytest.raises(IntegrityError):
        load_diagram(csv_path)


def test_tampered_spec_is_detected(tmp_path):
    pd = run_sweep(spec())
    _, json_path = save_diagram(pd, tmp_path)
    side = json.loads(json_path.read_text())
    side["spec"]["solver"]["rel_tol"] = 1e-3
    json_path.write_text(json.dumps(side))
    with pytest.raises(IntegrityError):
        load_diagram(json_path)


def test_hash_ignores_workers_only():
    assert spec_hash(spec(workers=1)) == spec_hash(spec(workers=3))
    assert spec_hash(spec()) != spec_hash(spec(rel_tol=1e-9))


def test_cells_are_independent():
    s = spec(alpha=(0.5, 1.5, 2), beta=(0.0, 0.1, 2))
    pd = run_sweep(s)
    for i, a in enumerate(s.alpha_axis.values()):
        for j, b in enumerate(s.beta_axis.values()):
            assert pd.cell(i, j) == run_cell(s, float(a), float(b))
    dist = pd.field("distance")
    assert all(math.isnan(dist[i, j]) == (pd.cell(i, j).distance is None)
               for i in range(2) for j in range(2))


def test_workers_do_not_change_results():
    s1 = spec(alpha=(0.5, 1.5, 3), beta=(0.0, 0.1, 2))
    s3 = spec(alpha=(0.5, 1.5, 3), beta=(0.0, 0.1, 2), workers=3)
    assert run_sweep(s1).csv_text() == run_sweep(s3).csv_text()


def test_thread_cap(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "2")
    assert effective_workers(8) == 2 and effective_workers(1) == 1
    monkeypatch.setenv(THREADS_ENV, "zero")
    with pytest.raises(ValueError):
        effective_workers(4)
    monkeypatch.delenv(THREADS_ENV)
    assert effective_workers(4) == 4


def test_spec_dict_round_trip():
    s = spec(alpha=(0.1, 10.0, 3, "log"), workers=2)
    assert SweepSpec.from_dict(s.to_dict()) == s
    with pytest.raises(ValueError):
        SweepSpec.from_dict({**s.to_dict(), "threads": 2})
