import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from lrdtrend import cli
from lrdtrend.exceptions import NumericalError
from lrdtrend.noise import NoiseModel, simulate


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _column(path):
    rows = list(csv.reader(open(path)))
    return rows[0], np.array([float(r[0]) for r in rows[1:]])


def test_simulate_writes_single_column(tmp_path, capsys):
    out = tmp_path / "xi.csv"
    code, stdout, _ = run(["simulate", "--n", 256, "--seed", 5, "--d", 0.3, "--output", out], capsys)
    assert code == 0 and stdout.strip() == str(out)
    header, values = _column(out)
    assert header == ["xi"]
    np.testing.assert_array_equal(values, simulate(NoiseModel(0.3), 256, 5).values)


def test_simulate_with_trend_default_path(tmp_path, capsys):
    code, stdout, _ = run(["simulate", "--n", 64, "--seed", 1, "--with-trend", "--output-dir", tmp_path], capsys)
    assert code == 0
    header, values = _column(stdout.strip())
    assert header == ["y"] and values.size == 64


def test_simulate_needs_one_n(tmp_path, capsys):
    code, _, err = run(["simulate", "--n", "64,128", "--seed", 1, "--output-dir", tmp_path], capsys)
    assert code == 2 and "exactly one" in err


def test_estimate_roundtrip(tmp_path, capsys):
    y = tmp_path / "y.csv"
    run(["simulate", "--n", 512, "--seed", 2, "--with-trend", "--output", y], capsys)
    est, coef = tmp_path / "est.csv", tmp_path / "coef.csv"
    code, _, _ = run(["estimate", "--input", y, "--output", est, "--coefficients", coef], capsys)
    assert code == 0
    rows = list(csv.reader(est.open()))
    assert rows[0] == ["t", "y", "g_true", "g_hat"] and len(rows) == 513
    crow = list(csv.reader(coef.open()))
    assert crow[0] == ["level", "shift", "value", "kept"]
    assert {r[3] for r in crow[1:]} <= {"0", "1"}


@pytest.mark.parametrize("method", ["minimax", "kernel"])
def test_estimate_other_methods(tmp_path, capsys, method):
    est = tmp_path / "est.csv"
    code, _, _ = run(["estimate", "--n", 256, "--seed", 0, "--method", method, "--output", est], capsys)
    assert code == 0 and est.exists()


def test_kernel_has_no_coefficients(tmp_path, capsys):
    code, _, err = run(["estimate", "--n", 256, "--seed", 0, "--method", "kernel", "--output",
                        tmp_path / "e.csv", "--coefficients", tmp_path / "c.csv"], capsys)
    assert code == 2 and "coefficients" in err


def test_estimate_bad_input(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("y\n1.0\nfoo\n")
    code, _, _ = run(["estimate", "--input", bad], capsys)
    assert code == 2
    code, _, _ = run(["estimate", "--input", tmp_path / "missing.csv"], capsys)
    assert code == 2


def test_constants_json(tmp_path, capsys):
    out = tmp_path / "c.json"
    code, stdout, _ = run(["constants", "--basis", "s6", "--d", 0.2, "--output", out], capsys)
    assert code == 0
    doc = json.loads(out.read_text())
    assert list(doc) == ["basis", "alpha", "C_phi_sq", "C_psi_sq", "nu_r", "regime"]
    assert doc["basis"] == "s6" and doc["regime"] == "tie" and json.loads(stdout) == doc


def test_mise_table_requires_seed(tmp_path, capsys):
    code, _, err = run(["mise-table", "--n", 128, "--replicates", 3, "--output-dir", tmp_path], capsys)
    assert code == 2 and "--seed" in err


def test_mise_table_and_figure(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_values": [128, 256], "replicates": 50, "seed": 1, "output_dir": str(tmp_path)}))
    code, stdout, _ = run(["mise-table", "--config", cfg, "--replicates", 4, "--seed", 3], capsys)
    assert code == 0
    assert stdout.splitlines()[0].startswith("method,n,replicates,mise")
    report = json.loads((tmp_path / "mise.json").read_text())
    assert report["config"]["replicates"] == 4 and report["config"]["seed"] == 3
    code, stdout, _ = run(["figure", "--report", tmp_path / "mise.json", "--stem", "fig"], capsys)
    assert code == 0
    assert (tmp_path / "fig.csv").exists() and (tmp_path / "fig.svg").exists()
    assert "adaptive" in json.loads(stdout.splitlines()[-1])


def test_compare_defaults_to_all_methods(tmp_path, capsys):
    code, stdout, _ = run(["compare", "--n", 128, "--replicates", 3, "--seed", 0, "--output-dir", tmp_path], capsys)
    assert code == 0
    methods = [line.split(",")[0] for line in stdout.splitlines()[1:]]
    assert methods == ["adaptive", "minimax", "kernel"]


def test_config_errors_exit_2(tmp_path, capsys):
    assert run(["mise-table", "--seed", 1, "--n", 100], capsys)[0] == 2
    assert run(["mise-table", "--seed", 1, "--trend", "square", "--n", 64, "--replicates", 2,
                "--output-dir", tmp_path], capsys)[0] == 2
    assert run(["constants", "--config", tmp_path / "nope.json"], capsys)[0] == 2
    assert run(["constants", "--basis", "db2"], capsys)[0] == 2
    assert run(["frobnicate"], capsys)[0] == 2
    assert run(["constants", "--help"], capsys)[0] == 0


def test_numerical_failure_exit_3(tmp_path, capsys, monkeypatch):
    def boom(*a, **k):
        raise NumericalError("embedding failed")

    monkeypatch.setattr(cli, "simulate", boom)
    code, _, err = run(["simulate", "--n", 64, "--seed", 0, "--output-dir", tmp_path], capsys)
    assert code == 3 and "numerical failure" in err


def test_failed_cells_exit_3(tmp_path, capsys, monkeypatch):
    from lrdtrend import harness

    def boom(self, Y):
        raise NumericalError("overflow")

    monkeypatch.setattr(harness._CellRunner, "estimates", boom)
    code, _, _ = run(["mise-table", "--n", 64, "--replicates", 2, "--seed", 0, "--output-dir", tmp_path], capsys)
    assert code == 3


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "lrdtrend", "constants", "--basis", "haar"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["basis"] == "haar"
