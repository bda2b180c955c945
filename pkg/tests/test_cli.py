from pathlib import Path
import re
import subprocess
import sys

import numpy as np
import pytest
import yaml

from tunnelctl import Grid1D, Grid2D, WaveFunction, gaussian
from tunnelctl.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from tunnelctl.io import encode_snapshot, write_snapshot

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SMALL = ["--set", "geometry.n_z=256", "--set", "geometry.z_min=-40.0", "--set", "geometry.z_max=40.0",
         "--set", "propagation.absorber_width=10.0"]


def test_eigen_table(capsys):
    assert main(["eigen", "--config", str(CONFIGS / "r20.yaml")]) == EXIT_OK
    out = capsys.readouterr().out
    rows = [ln for ln in out.splitlines() if re.match(r"\s*\d+\s", ln)]
    assert len(rows) == 6
    energies = [float(r.split()[1]) for r in rows]
    assert energies == sorted(energies)
    assert "tunneling ground:" in out and "tunneling first_excited:" in out
    t2 = float(re.search(r"tunneling first_excited: .* = (\S+) fs", out).group(1))
    assert t2 == pytest.approx(287.0, rel=0.05)


def test_propagate_summary_and_artifacts(tmp_path, capsys):
    out_dir = tmp_path / "run"
    argv = ["propagate", "--config", str(CONFIGS / "field_free_r10.yaml"), *SMALL,
            "--set", "propagation.t_final_fs=1.0", "--set", "propagation.dt=0.05", "--out", str(out_dir)]
    assert main(argv) == EXIT_OK
    out = capsys.readouterr().out
    line = next(ln for ln in out.splitlines() if ln.startswith("final:"))
    values = dict(re.findall(r"(\w+)=([-\d.eE+]+)", line))
    assert float(values["P_L"]) + float(values["P_R"]) == pytest.approx(float(values["P_T"]), abs=2e-6)
    for name in ("trace.dat", "field.dat", "manifest.yaml", "final.qwv"):
        assert (out_dir / name).exists()
    manifest = yaml.safe_load((out_dir / "manifest.yaml").read_text())
    assert manifest["status"] == "ok"
    assert manifest["config"]["propagation"]["t_final_fs"] == 1.0


def test_lct_replays_manifest(tmp_path, capsys):
    first, second = tmp_path / "a", tmp_path / "b"
    argv = ["lct", "--scenario", "lct-R10", *SMALL, "--set", "propagation.t_final_fs=0.5"]
    assert main(argv + ["--out", str(first)]) == EXIT_OK
    assert main(["lct", "--config", str(first / "manifest.yaml"), "--out", str(second)]) == EXIT_OK
    out = capsys.readouterr().out
    finals = [ln for ln in out.splitlines() if ln.startswith("final:")]
    assert len(finals) == 2 and finals[0] == finals[1]
    assert "replay:" in out
    assert (first / "field.dat").read_bytes() == (second / "field.dat").read_bytes()


class TestExitCodes:
    def test_unknown_key_exits_1(self, capsys):
        assert main(["eigen", "--set", "geometry.radius=3"]) == EXIT_USAGE
        assert "geometry.radius" in capsys.readouterr().err

    def test_unknown_key_in_file(self, tmp_path, capsys):
        path = tmp_path / "c.yaml"
        path.write_text("field:\n  lambda: 0.2\n")
        assert main(["propagate", "--config", str(path)]) == EXIT_USAGE
        assert "field.lambda" in capsys.readouterr().err

    def test_bad_subcommand_exits_1(self):
        with pytest.raises(SystemExit) as info:
            main(["frobnicate"])
        assert info.value.code == EXIT_USAGE

    def test_missing_file_exits_1(self, tmp_path):
        assert main(["husimi", str(tmp_path / "missing.qwv")]) == EXIT_USAGE

    def test_corrupt_snapshot_exits_1(self, tmp_path, capsys):
        path = tmp_path / "bad.qwv"
        path.write_bytes(encode_snapshot(gaussian(Grid1D(64, -10, 10), 0, 1))[:-3])
        assert main(["husimi", str(path)]) == EXIT_USAGE
        assert "byte offset" in capsys.readouterr().err

    def test_numerical_failure_exits_2(self, tmp_path, capsys):
        # a 1e-6 tilt cannot localize the R=4 ground level
        argv = ["propagate", *SMALL, "--set", "geometry.R=4.0", "--set", "initial.route=tilted",
                "--set", "field.e_dc=-1e-6", "--set", "propagation.t_final_fs=0.1", "--out", str(tmp_path)]
        assert main(argv) == EXIT_NUMERIC
        assert "numerical failure" in capsys.readouterr().err
        manifest = yaml.safe_load((tmp_path / "manifest.yaml").read_text())
        assert manifest["status"] == "failed" and manifest["stage"] == "initial_state"

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["--version"])
        assert info.value.code == 0
        assert "tunnelctl" in capsys.readouterr().out


def test_husimi_command(tmp_path, capsys):
    grid = Grid1D(256, -40.0, 40.0)
    path = tmp_path / "s.qwv"
    write_snapshot(path, gaussian(grid, -5.0, 1.0, 0.5), 10.0)
    assert main(["husimi", str(path), "--p-min", "-4", "--p-max", "5", "--out", str(tmp_path / "maps")]) == EXIT_OK
    out = capsys.readouterr().out
    assert float(re.search(r"<p>=(\S+)", out).group(1)) == pytest.approx(0.5, abs=1e-3)
    data = np.loadtxt(tmp_path / "maps" / "s.husimi.dat")
    assert data.shape[1] == 3 and data[:, 2].min() >= 0


def test_husimi_rejects_2d(tmp_path):
    grid = Grid2D(Grid1D(16, -5, 5), Grid1D(8, 1, 9))
    path = tmp_path / "s2.qwv"
    write_snapshot(path, WaveFunction(np.ones(grid.shape, complex), grid).normalized())
    assert main(["husimi", str(path)]) == EXIT_USAGE


def test_bo_project_command(tmp_path, capsys):
    grid = Grid2D(Grid1D(128, -40.0, 40.0), Grid1D(16, 18.0, 26.0))
    zg, rg = grid.axes
    amps = np.outer(gaussian(zg, -10.0, 1.0).amplitudes, gaussian(rg, 22.0, 1.0).amplitudes)
    path = tmp_path / "s.qwv"
    write_snapshot(path, WaveFunction(amps, grid).normalized(), 100.0)
    assert main(["bo-project", str(path), "--n-states", "4"]) == EXIT_OK
    out = capsys.readouterr().out
    pops = [float(x) for x in re.findall(r"population=(\S+)", out)]
    assert len(pops) == 4
    assert 0 < sum(pops) <= 1.0 + 1e-9
    assert re.search(r"S34=", out)


def test_bo_project_rejects_1d(tmp_path):
    path = tmp_path / "s.qwv"
    write_snapshot(path, gaussian(Grid1D(64, -10, 10), 0, 1))
    assert main(["bo-project", str(path)]) == EXIT_USAGE


def test_curves_command(tmp_path):
    out = tmp_path / "curves.dat"
    argv = ["curves", *SMALL, "--r-min", "2", "--r-max", "10", "--n-r", "5", "--n-curves", "3", "--out", str(out)]
    assert main(argv) == EXIT_OK
    data = np.loadtxt(out)
    assert data.shape == (5, 4)
    assert np.all(np.diff(data[:, 1:], axis=1) > 0)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tunnelctl", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for cmd in ("eigen", "propagate", "lct", "sweep", "husimi", "bo-project", "curves"):
        assert cmd in proc.stdout
