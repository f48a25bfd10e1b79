import numpy as np
import pytest

from cosshell import surface
from cosshell.assemble import ShellModel, identity_state
from cosshell.cli import nodal_fields
from cosshell.cosserat3d import MaterialParams
from cosshell.grid import ShellGrid
from cosshell.io import (LOG_COLUMNS, OutputError, StateIOError, read_log, read_state,
                         read_vtk, write_log, write_state, write_vtk)
from cosshell.presets import smooth_state

MAT = MaterialParams(mu=1.3, lam=0.7, mu_c=0.4, L_c=0.8, a1=1.1, a2=0.9, a3=0.5)


def test_state_round_trip_is_exact(tmp_path):
    p = surface.sphere_cap(1.0)
    g = ShellGrid(6, 5, p.bounds)
    s = smooth_state(g, p, 0.1)
    write_state(tmp_path / "s.state", s)
    r = read_state(tmp_path / "s.state", g)
    np.testing.assert_array_equal(r.m, s.m)
    np.testing.assert_array_equal(r.Q, s.Q)


@pytest.mark.parametrize("text", ["", "3\n", "2 2\n1 2 3\n", "a b\n",
                                  "1 1\n0 0 0 1 0 0 0 1 0 0 0 nan\n",
                                  "1 1\n0 0 0 2 0 0 0 1 0 0 0 1\n",
                                  "1 1\n0 0 0 -1 0 0 0 1 0 0 0 1\n"])
def test_malformed_states(tmp_path, text):
    f = tmp_path / "bad.state"
    f.write_text(text)
    with pytest.raises(StateIOError):
        read_state(f)


def test_state_grid_mismatch(tmp_path):
    p = surface.plate()
    write_state(tmp_path / "s.state", identity_state(ShellGrid(4, 4, p.bounds), p))
    with pytest.raises(StateIOError, match="grid"):
        read_state(tmp_path / "s.state", ShellGrid(5, 4, p.bounds))


def test_unwritable_outputs(tmp_path):
    p = surface.plate()
    s = identity_state(ShellGrid(3, 3, p.bounds), p)
    with pytest.raises(OutputError):
        write_state(tmp_path / "nope" / "s.state", s)
    with pytest.raises(OutputError):
        write_vtk(tmp_path / "nope" / "s.vtk", s)


def test_log_round_trip(tmp_path):
    rows = [{"iter": i, "membrane": 0.1 / (i + 1), "curvature": 0.0, "load": 1e-3,
             "total": 0.1 / (i + 1) - 1e-3, "grad_inf_norm": 1.0, "step": 0.5} for i in range(3)]
    write_log(tmp_path / "log.csv", rows)
    back = read_log(tmp_path / "log.csv")
    assert back == rows
    assert (tmp_path / "log.csv").read_text().splitlines()[0] == ",".join(LOG_COLUMNS)


def test_vtk_identity_plate_is_flat(tmp_path):
    p = surface.plate()
    g = ShellGrid(4, 3, p.bounds)
    s = identity_state(g, p)
    write_vtk(tmp_path / "a.vtk", s, {"z": s.m[..., 2]}, {"R1": s.Q_flat[:, :, 0]})
    text = (tmp_path / "a.vtk").read_text().splitlines()
    assert text[0] == "# vtk DataFile Version 3.0"
    pts, polys, data = read_vtk(tmp_path / "a.vtk")
    assert pts.shape == (12, 3) and np.all(pts[:, 2] == 0.0)
    assert len(polys) == 6 and all(q[0] == 4 for q in polys)
    np.testing.assert_array_equal(data["R1"], np.tile([1.0, 0.0, 0.0], (12, 1)))


def test_export_density_integrates_to_energy(tmp_path):
    p = surface.cylinder(1.5)
    g = ShellGrid(9, 8, p.bounds)
    model = ShellModel(g, p, MAT, h=0.1)
    s = smooth_state(g, p, 0.05)
    scalars, vectors = nodal_fields(model, s)
    write_vtk(tmp_path / "c.vtk", s, scalars, vectors)
    _, _, data = read_vtk(tmp_path / "c.vtk")
    eb = model.evaluate(s)
    total = np.sum(data["energy_density"] * g.weights)
    assert total == pytest.approx(eb.membrane + eb.curvature, rel=1e-12)
    np.testing.assert_allclose(np.stack([data[f"R{j}"] for j in (1, 2, 3)], -1),
                               s.Q_flat, atol=1e-15)
