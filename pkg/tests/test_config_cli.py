import csv
import io
import math
import subprocess
import sys

import numpy as np
import pytest

from granup.calibration import cooper_eaton_curve
from granup.cli import EXIT_CHECK, EXIT_FIT, EXIT_INPUT, EXIT_INTEGRATION, EXIT_OK, TRAJECTORY_COLUMNS, main
from granup.config import bundled_names, load_config, parse_config
from granup.errors import ConfigError
from granup.integrator import StepControls

OEDO_120 = """
[path.1]
control = stress strain strain
target = -120 0 0
increments = 200
"""


def rows_of(text):
    return [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]


def write(tmp_path, name, text):
    f = tmp_path / name
    f.write_text(text)
    return str(f)


def test_bundled_configs_parse():
    names = bundled_names()
    assert {"tablet_120MPa", "tablet_load_unload", "isotropic_n_sweep"} <= set(names)
    for name in names:
        cfg = load_config(name)
        assert cfg.program.steps
    sweep = load_config("isotropic_n_sweep")
    assert [v for v, _ in sweep.materials()] == [1.0, 6.0, 60.0, 600.0]
    assert [p.n for _, p in sweep.materials()] == [1.0, 6.0, 60.0, 600.0]


def test_material_and_controls_sections():
    cfg = parse_config("[material]\nmu0 = 2.5  ; stiffer\n[controls]\ntol_F = auto\nmax_iter = 7\n" + OEDO_120)
    assert cfg.material.mu0 == 2.5
    assert cfg.controls == StepControls(max_iter=7)
    assert cfg.program.steps[0].targets == (-120.0, 0.0, 0.0)


@pytest.mark.parametrize(
    "text",
    [
        "[material]\nfoo = 1\n",
        "[material]\ngamma = 1.0\n",
        "[material]\nkappa = -0.04\n",
        "[controls]\nmax_iter = many\n",
        "[extra]\n",
        "[path.1]\ncontrol = stress strain\ntarget = -1 0 0\n",
        "[sweep]\nparameter = n\nvalues = 1 2\non_failure = retry\n" + OEDO_120,
        "[sweep]\nparameter = colour\nvalues = 1 2\n" + OEDO_120,
    ],
)
def test_invalid_configs_are_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_missing_config_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.ini")


def test_simulate_tablet(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    assert main(["simulate", "--config", "tablet_120MPa", "--out", str(out)]) == EXIT_OK
    rows = rows_of(out.read_text())
    assert rows[0] == list(TRAJECTORY_COLUMNS)
    assert len(rows) == 1 + 200
    last = dict(zip(rows[0], map(float, rows[-1])))
    assert last["sig11"] == pytest.approx(-120.0, abs=1e-6)
    assert last["eps22"] == 0.0 and last["eps33"] == 0.0
    assert abs(last["F"]) <= StepControls().tolerance(1.1, last["pc"])


def test_simulate_empty_program_writes_header_only(tmp_path, capsys):
    cfg = write(tmp_path, "empty.ini", "[material]\n")
    assert main(["simulate", "--config", cfg]) == EXIT_OK
    assert capsys.readouterr().out == ",".join(TRAJECTORY_COLUMNS) + "\n"


def test_simulate_is_byte_deterministic(tmp_path):
    cfg = write(tmp_path, "short.ini", OEDO_120.replace("200", "20"))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["simulate", "--config", cfg, "--out", str(a)])
    main(["simulate", "--config", cfg, "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_simulate_failure_exit_code(tmp_path):
    text = (
        "[sweep]\nparameter = n\nvalues = 6 1\non_failure = stop\n"
        "[path.1]\ncontrol = stress stress stress\ntarget = -30 -30 -30\nincrements = 30\n"
    )
    out = tmp_path / "fail.csv"
    assert main(["simulate", "--config", write(tmp_path, "f.ini", text), "--out", str(out)]) == EXIT_INTEGRATION
    lines = out.read_text().splitlines()
    assert lines[0].startswith("n,step,inc")
    assert lines[-1].startswith("# error (n = 1):")
    assert sum(1 for l in lines if l.startswith("6,")) == 30


def test_sweep_continue_runs_every_value(tmp_path):
    text = (
        "[sweep]\nparameter = n\nvalues = 1 6\non_failure = continue\n"
        "[path.1]\ncontrol = stress stress stress\ntarget = -30 -30 -30\nincrements = 30\n"
    )
    out = tmp_path / "s.csv"
    assert main(["simulate", "--config", write(tmp_path, "s.ini", text), "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert any(l.startswith("# error (n = 1)") for l in lines)
    assert sum(1 for l in lines if l.startswith("6,")) == 30


def test_surface_sections(tmp_path):
    mer, dev = tmp_path / "m.csv", tmp_path / "d.csv"
    code = main(
        ["surface", "--config", "tablet_120MPa", "--pc", "2", "100", "--samples", "16",
         "--out", str(mer), "--deviatoric", str(dev)]
    )
    assert code == EXIT_OK
    rows = rows_of(mer.read_text())
    assert rows[0] == ["pc_MPa", "c_MPa", "d", "p_MPa", "q_MPa"]
    body = np.array(rows[1:], dtype=float)
    assert body.shape == (32, 5)
    low, high = body[body[:, 0] == 2.0], body[body[:, 0] == 100.0]
    # no cohesion below the threshold: the surface passes through the origin
    assert tuple(low[0, 3:]) == (0.0, 0.0)
    assert high[0, 3] == pytest.approx(-high[0, 1])
    assert high[-1, 3] == pytest.approx(100.0) and high[-1, 4] == pytest.approx(0.0, abs=1e-9)
    drows = rows_of(dev.read_text())
    assert drows[0] == ["pc_MPa", "theta_rad", "radius_MPa"]
    assert len(drows) == 33


def test_surface_requires_enough_samples(capsys):
    with pytest.raises(SystemExit) as info:
        main(["surface", "--config", "tablet_120MPa", "--pc", "10", "--samples", "4"])
    assert info.value.code == 2


def test_calibrate_beta_and_M(capsys):
    assert main(["calibrate", "beta", "--phi", "32"]) == EXIT_OK
    out = capsys.readouterr().out
    assert float(out.split("=")[1]) == pytest.approx(0.190733, abs=1e-6)
    assert main(["calibrate", "M", "--phi", "32"]) == EXIT_OK
    values = dict(line.split(" = ") for line in capsys.readouterr().out.splitlines())
    assert float(values["M"]) == pytest.approx(1.100649, abs=1e-6)


def test_calibrate_cooper_eaton_file(tmp_path, capsys):
    x = np.geomspace(0.5, 200.0, 20)
    y = cooper_eaton_curve(x, 1.8, 40.0, 0.37, 0.12)
    data = write(tmp_path, "ce.csv", "MPa,-\n" + "".join(f"{float(a)!r},{float(b)!r}\n" for a, b in zip(x, y)))
    assert main(["calibrate", "cooper-eaton", data]) == EXIT_OK
    values = dict(line.split(" = ") for line in capsys.readouterr().out.splitlines())
    assert float(values["Lambda2"]) == pytest.approx(40.0, rel=1e-6)
    assert float(values["a1t"]) == pytest.approx(0.37, rel=1e-6)


def test_calibrate_input_errors(tmp_path, capsys):
    bad = write(tmp_path, "bad.csv", "MPa,-\n1,2\nx,3\n")
    assert main(["calibrate", "cohesion", bad]) == EXIT_INPUT
    assert "bad.csv:3:" in capsys.readouterr().err
    assert main(["calibrate", "cohesion", str(tmp_path / "missing.csv")]) == EXIT_INPUT
    few = write(tmp_path, "few.csv", "MPa,MPa\n1,0\n2,1\n")
    assert main(["calibrate", "cohesion", few]) == EXIT_FIT


def test_check_command(capsys):
    assert main(["check", "--config", "tablet_120MPa"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert out.strip().endswith("8/8 checks passed")
    assert EXIT_CHECK == 1


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "granup", "calibrate", "beta", "--phi", "30", "--gamma", "0.8"],
        capture_output=True, text=True, check=True,
    )
    beta = float(res.stdout.split("=")[1])
    assert 0 <= beta <= 2 and math.isfinite(beta)
