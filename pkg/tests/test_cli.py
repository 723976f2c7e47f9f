import subprocess
import sys

import numpy as np
import pytest

from diracfdtd import __version__
from diracfdtd.cli import main
from diracfdtd.oracle import planewave_step_rt

GOOD = """grid.dims = 1
grid.n = 256
grid.dx = 0.05
grid.origin = -6.4
packet.p_mev_c = 1.0, 0, 0
packet.x0_m = 2e-13
packet.center = -2.0
potential.kind = step
potential.height_volts = 1e5
potential.edge = 0.0
stepper.n_steps = 50
"""


def _write(tmp_path, text, name="s.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_version(capsys):
    assert main(["version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_oracle_rt(capsys):
    assert main(["oracle", "rt", "--E", "36.704", "--eV", "48.92"]) == 0
    out = dict(l.split("=") for l in capsys.readouterr().out.split())
    assert np.isclose(float(out["R"]), planewave_step_rt(36.704, eV=48.92)[0])


def test_oracle_bad_energy():
    assert main(["oracle", "rt", "--E", "0.5", "--eV", "1"]) == 1


def test_validate_ok_and_bad(tmp_path, capsys):
    assert main(["validate", str(_write(tmp_path, GOOD))]) == 0
    assert "subcritical" in capsys.readouterr().out
    assert main(["validate", str(_write(tmp_path, GOOD + "grid.bogus = 1\n", "b.cfg"))]) == 1
    assert "line 12" in capsys.readouterr().err


def test_run_writes_outputs(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(_write(tmp_path, GOOD)), "--out", str(out)]) == 0
    assert {"observables.csv", "report.txt"} <= {p.name for p in out.iterdir()}


def test_missing_file_is_io_error(tmp_path):
    assert main(["run", str(tmp_path / "nope.cfg")]) == 3


def test_unwritable_output_is_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", str(_write(tmp_path, GOOD)), "--out", str(blocker / "sub")]) == 3


def test_divergence_exit_code(tmp_path, monkeypatch):
    from diracfdtd import runner
    from diracfdtd.stepper import DivergenceError

    def boom(*a, **k):
        raise DivergenceError(7)

    monkeypatch.setattr("diracfdtd.cli.run_scenario", boom)
    assert main(["run", str(_write(tmp_path, GOOD))]) == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "diracfdtd", "version"], capture_output=True, text=True)
    assert r.returncode == 0 and __version__ in r.stdout
