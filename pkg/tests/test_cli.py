import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from isoflow.cli import main
from isoflow.experiments import CSV_HEADER, read_csv
from isoflow.symspace import read_matrix


def test_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(["run", "--fixture", "t5", "--flow", "db", "--tfinal", "5", "--out", str(out)])
    assert rc == 0
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0] == CSV_HEADER
    data = read_csv(out / "trajectory.csv")
    report = json.loads((out / "report.json").read_text())
    assert data[0, 0] == 0.0 and data[-1, 0] == 5.0
    assert report["max_d_ev"] == pytest.approx(np.max(data[:, 1]), rel=0, abs=0)
    assert report["flow"] == "double_bracket"
    final = read_matrix(out / "final.mat")
    assert final.shape == (5, 5)
    assert "set logscale y" in (out / "plot.gp").read_text()
    for p in report["paths"].values():
        assert Path(p).exists()
    assert "max d_ev" in capsys.readouterr().out


def test_csv_17_significant_digits(tmp_path):
    out = tmp_path / "run"
    main(["run", "--fixture", "t5", "--flow", "zero", "--tfinal", "1", "--out", str(out)])
    with open(out / "trajectory.csv") as fh:
        rows = list(csv.reader(fh))[1:]
    assert rows
    for row in rows:
        assert len(row) == 4
        for field in row:
            assert field == f"{float(field):.17g}"


def test_csv_rows_match_log(tmp_path):
    from isoflow.experiments import run
    from isoflow.integrate import IntegratorConfig

    _, log = run("example1", "toda", IntegratorConfig(t_final=2.0), tmp_path)
    assert len(read_csv(tmp_path / "trajectory.csv")) == len(log)


def test_compare(tmp_path, capsys):
    rc = main(["compare", "--fixture", "ts5", "--out", str(tmp_path)])
    assert rc == 0
    for kind in ("zero", "double_bracket"):
        assert (tmp_path / kind / "trajectory.csv").exists()
    assert (tmp_path / "compare.csv").read_text().startswith("flow," + CSV_HEADER)
    text = capsys.readouterr().out
    assert "double_bracket 0.5" in text


def test_scaling_command(capsys):
    assert main(["scaling", "--c", "2", "--fixture", "t5"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_counterexamples_command(capsys):
    assert main(["counterexamples"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 6 and "FAIL" not in out


def test_bad_input_exit_codes(tmp_path, capsys):
    assert main(["run", "--fixture", "nope"]) == 4
    assert main(["run", "--fixture", "t5", "--abstol", "-1"]) == 4
    assert main(["run", "--fixture", f"file:{tmp_path / 'missing.mat'}"]) == 4
    (tmp_path / "asym.mat").write_text("2\n1 2\n3 4\n")
    assert main(["run", "--fixture", f"file:{tmp_path / 'asym.mat'}"]) == 4
    assert main(["scaling", "--c", "-1"]) == 4
    with pytest.raises(SystemExit) as exc:
        main(["run", "--fixture", "t5", "--flow", "sideways"])
    assert exc.value.code == 4


def test_integrator_failure_exit_code(capsys):
    assert main(["run", "--fixture", "t5", "--max-steps", "3"]) == 3
    assert "max_steps reached" in capsys.readouterr().out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "isoflow", "run", "--fixture", "t5", "--tfinal", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "t5 zero" in res.stdout
