import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from cosshell.cli import gap_slope, main
from cosshell.io import read_log, read_vtk

DATA = Path(__file__).parent / "data"
FIXTURE = DATA / "cylinder_stretch.toml"


def _write(tmp_path, text, name="c.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


PLATE = """
h = 0.1
[patch]
kind = "plate"
[grid]
n1 = 7
n2 = 7
"""

SPHERE = """
h = {h}
[patch]
kind = "sphere-cap"
radius = 1.0
bounds = [-0.5, 0.5, -0.5, 0.5]
[grid]
n1 = 9
n2 = 9
"""


def test_geometry_plate(tmp_path, capsys):
    assert main(["geometry", "--config", _write(tmp_path, PLATE), "--out", str(tmp_path)]) == 0
    rows = np.loadtxt(tmp_path / "geometry.csv", delimiter=",", skiprows=1)
    assert np.all(rows[:, 2:6] == 0.0)
    assert "admissible=true" in capsys.readouterr().out


@pytest.mark.parametrize("h,code", [(0.1, 0), (2.5, 3)])
def test_geometry_sphere_admissibility(tmp_path, h, code):
    cfg = _write(tmp_path, SPHERE.format(h=h))
    assert main(["geometry", "--config", cfg, "--out", str(tmp_path)]) == code


def test_degenerate_surface_exit_2(tmp_path):
    cfg = _write(tmp_path, SPHERE.format(h=0.1).replace("radius = 1.0", "radius = 0.6"))
    assert main(["geometry", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_invalid_material_exit_2(tmp_path):
    cfg = _write(tmp_path, PLATE + "[material]\nmu_c = 0.0\n")
    for cmd in ("energy", "verify", "minimize"):
        assert main([cmd, "--config", cfg, "--out", str(tmp_path)]) == 2


def test_energy_identity_is_zero(tmp_path, capsys):
    assert main(["energy", "--config", _write(tmp_path, PLATE), "--out", str(tmp_path)]) == 0
    rows = np.loadtxt(tmp_path / "energy.csv", delimiter=",", skiprows=1)
    np.testing.assert_array_equal(rows, 0.0)


def test_energy_golden_fixture(tmp_path):
    args = ["energy", "--config", str(FIXTURE), "--state", str(DATA / "cylinder_stretch.state"),
            "--out", str(tmp_path), "--threads", "1"]
    assert main(args) == 0
    a = (tmp_path / "energy.csv").read_text()
    assert main(args) == 0
    assert (tmp_path / "energy.csv").read_text() == a


def test_golden_mismatch_and_bless(tmp_path):
    golden = tmp_path / "g.json"
    base = ["energy", "--config", str(FIXTURE), "--state", str(DATA / "cylinder_stretch.state"),
            "--out", str(tmp_path), "--golden", str(golden)]
    assert main(base) == 10  # missing
    assert main(base + ["--bless"]) == 0
    assert main(base) == 0
    ref = json.loads(golden.read_text())
    ref["total"] *= 1.0 + 1e-9
    golden.write_text(json.dumps(ref))
    assert main(base) == 10


def test_energy_state_errors_exit_4(tmp_path):
    bad = tmp_path / "bad.state"
    bad.write_text("9 9\n1 2 3\n")
    assert main(["energy", "--config", str(FIXTURE), "--state", str(bad),
                 "--out", str(tmp_path)]) == 4
    small = tmp_path / "small.state"
    shutil.copy(DATA / "cylinder_stretch.state", small)
    cfg = _write(tmp_path, FIXTURE.read_text().replace("n1 = 9", "n1 = 8"))
    assert main(["energy", "--config", cfg, "--state", str(small), "--out", str(tmp_path)]) == 4


def test_minimize_identity_without_loads(tmp_path):
    cfg = _write(tmp_path, PLATE)
    assert main(["minimize", "--config", cfg, "--out", str(tmp_path)]) == 0
    log = read_log(tmp_path / "iterations.csv")
    assert len(log) == 1 and log[0]["total"] == 0.0


def test_minimize_plate_dead_load(tmp_path):
    cfg = _write(tmp_path, PLATE + """
[loads]
N0 = [0.0, 0.0, 0.05]
[boundary]
dirichlet = ["x1min"]
[solver]
max_iter = 1000
tol = 1e-8
""")
    assert main(["minimize", "--config", cfg, "--out", str(tmp_path)]) == 0
    log = read_log(tmp_path / "iterations.csv")
    tot = np.array([r["total"] for r in log])
    assert np.all(np.diff(tot) <= 0.0)
    assert log[-1]["grad_inf_norm"] < 1e-8


def test_minimize_resume_identical(tmp_path):
    text = FIXTURE.read_text().replace("max_iter = 2000", "max_iter = NITER\ncheckpoint_every = 10")
    text = text.replace('golden = "cylinder_stretch.golden.json"', "")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["minimize", "--config", _write(tmp_path, text.replace("NITER", "35"), "full.toml"),
                 "--out", str(a)]) == 0
    assert main(["minimize", "--config", _write(tmp_path, text.replace("NITER", "24"), "part.toml"),
                 "--out", str(b)]) == 0
    assert main(["minimize", "--config", str(tmp_path / "full.toml"), "--out", str(b),
                 "--resume"]) == 0
    assert (a / "final.state").read_bytes() == (b / "final.state").read_bytes()
    assert (a / "iterations.csv").read_text() == (b / "iterations.csv").read_text()


def test_resume_without_checkpoint_exit_4(tmp_path):
    assert main(["minimize", "--config", str(FIXTURE), "--out", str(tmp_path), "--resume"]) == 4


def test_gamma_sweep_flat_identity(tmp_path, capsys):
    cfg = _write(tmp_path, PLATE + "[sweep]\namplitude = 0.0\nn3 = 3\n")
    assert main(["gamma-sweep", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = np.loadtxt(tmp_path / "gamma_sweep.csv", delimiter=",", skiprows=1)
    assert np.all(np.abs(rows[:, 3]) < 1e-10)
    assert "slope=nan" in capsys.readouterr().out


def test_gamma_sweep_cylinder(tmp_path, capsys):
    cfg = _write(tmp_path, """
[patch]
kind = "cylinder"
radius = 1.5
[grid]
n1 = 17
n2 = 17
[sweep]
n3 = 5
""")
    assert main(["gamma-sweep", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = np.loadtxt(tmp_path / "gamma_sweep.csv", delimiter=",", skiprows=1)
    assert np.all(np.diff(rows[:, 3]) < 0)
    out = capsys.readouterr().out
    assert "ci95=" in out


def test_gamma_sweep_inadmissible_h(tmp_path):
    cfg = _write(tmp_path, SPHERE.format(h=0.1) + "[sweep]\nh = [0.5, 2.5]\n")
    assert main(["gamma-sweep", "--config", cfg, "--out", str(tmp_path)]) == 3


def test_gap_slope_interval():
    hs = np.array([0.2, 0.1, 0.05, 0.025])
    s, lo, hi = gap_slope(hs, 3.0 * hs ** 2)
    assert s == pytest.approx(2.0, abs=1e-12) and lo <= s <= hi
    assert np.isnan(gap_slope(hs, np.zeros(4))[0])


def test_verify_passes_and_negative_control(tmp_path, capsys):
    assert main(["verify", "--samples", "5"]) == 0
    out = capsys.readouterr().out
    assert "[FAIL]" not in out
    cfg = _write(tmp_path, PLATE + "[material]\nmu = 1.3\nlambda = 0.7\nmu_c = 0.4\n"
                 "debug_b3 = 5.0\n")
    assert main(["verify", "--config", cfg, "--samples", "5"]) == 10
    out = capsys.readouterr().out
    assert "[FAIL] W_curv a-form vs b-form" in out


def test_export_identity_plate(tmp_path):
    assert main(["export", "--config", _write(tmp_path, PLATE), "--out", str(tmp_path)]) == 0
    pts, polys, data = read_vtk(tmp_path / "shell.vtk")
    assert np.all(pts[:, 2] == 0.0) and len(polys) == 36
    assert {"R1", "R2", "R3", "energy_density", "tr_E"} <= set(data)


def test_export_unwritable_exit_5(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["export", "--config", _write(tmp_path, PLATE), "--out",
                 str(blocker / "sub")]) == 5


def test_compare_report(capsys):
    assert main(["compare"]) == 0
    out = capsys.readouterr().out
    assert "alpha4" in out and "equivalent shear correction" in out


def test_console_script_runs():
    exe = shutil.which("shell")
    cmd = [exe] if exe else [sys.executable, "-m", "cosshell.cli"]
    r = subprocess.run(cmd + ["compare"], capture_output=True, text=True)
    assert r.returncode == 0 and "beta2" in r.stdout
