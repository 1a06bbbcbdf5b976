import json
import subprocess
import sys

import numpy as np
import pytest

from unifinsler.cli import main
from unifinsler.errors import ConfigError
from unifinsler.experiments import EXPERIMENT_IDS, RunConfig, run_experiment
from unifinsler.io import csv_text, fmt, matrix_to_json
from unifinsler.tolerances import TOL_SCALE_ENV, Tolerances, default_tolerances


def write_config(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_fmt_uses_17_digits():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(True) == "true"
    assert fmt(float("nan")) == "nan"


def test_csv_text_stable():
    text = csv_text(["a", "b"], [[1, 0.5], [2, 1 / 3]])
    assert text.splitlines() == ["a,b", "1,0.5", "2,0.33333333333333331"]


def test_tolerance_scale_env(monkeypatch):
    monkeypatch.setenv(TOL_SCALE_ENV, "10")
    tol = default_tolerances()
    assert tol.unit_tol == pytest.approx(10 * Tolerances().unit_tol)
    assert tol.scan_c == Tolerances().scan_c
    monkeypatch.setenv(TOL_SCALE_ENV, "not-a-number")
    with pytest.raises(ConfigError):
        default_tolerances()


def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig("nope")
    with pytest.raises(ConfigError):
        RunConfig("prop23", seed="x")
    with pytest.raises(ConfigError):
        RunConfig("prop23", tolerances={"bogus": 1.0})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"experiment": "prop23", "colour": "red"})
    cfg = RunConfig("prop23", tolerances={"fix_tol": 1e-5})
    assert cfg.tol.fix_tol == 1e-5
    assert set(EXPERIMENT_IDS) >= {"prop23", "center-oracle", "rigidity-demo"}


def test_experiment_is_deterministic(tmp_path, capsys):
    params = {"trials": 40, "n_max": 6}
    for sub in ("a", "b"):
        assert run_experiment(RunConfig("prop23", seed=7, out=tmp_path / sub, params=params)) == 0
    lines = capsys.readouterr().out.splitlines()
    assert any(line.startswith("[PASS] criterion 1 ") for line in lines)
    for name in ("chord_identity", "log_exp_roundtrip", "norm_metric_bridges"):
        a = (tmp_path / "a" / "prop23" / f"{name}.csv").read_bytes()
        b = (tmp_path / "b" / "prop23" / f"{name}.csv").read_bytes()
        assert a == b
    meta = json.loads((tmp_path / "a" / "prop23" / "metadata.json").read_text())
    assert "elapsed_seconds" in meta
    result = json.loads((tmp_path / "a" / "prop23" / "result.json").read_text())
    assert result["passed"] and result["seed"] == 7


def test_ex311_rows(tmp_path):
    cfg = RunConfig("ex311", out=tmp_path, params={"thetas": [0.5, 1.0, np.pi / 2 + 0.1]})
    assert run_experiment(cfg) == 0
    rows = (tmp_path / "ex311" / "example_family.csv").read_text().strip().splitlines()
    assert len(rows) == 4
    assert rows[0].startswith("theta,fpp0_measured,cot_theta")


def test_cli_unknown_experiment_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["experiment", "nope"])
    assert info.value.code != 0


def test_cli_experiment_via_config(tmp_path):
    cfg = write_config(tmp_path, {"experiment": "su-length", "params": {"trials": 5}})
    assert main(["experiment", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert (tmp_path / "su-length" / "su_closure.csv").exists()


def test_cli_bad_config_exit_2(tmp_path):
    assert main(["center", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["scan", "--config", str(bad)]) == 2
    assert main(["scan", "--config", write_config(tmp_path, {"kind": "zigzag"})]) == 2
    assert main(["center", "--config", write_config(tmp_path, {"sites": [{"n": 1}]})]) == 2


@pytest.mark.parametrize("kind", ["dinf", "dp", "strong", "theta", "counterexample"])
def test_cli_scan_kinds(tmp_path, kind):
    cfg = write_config(tmp_path, {"kind": kind, "grid": {"num": 41}})
    assert main(["scan", "--seed", "3", "--config", cfg, "--out", str(tmp_path)]) == 0
    obj = json.loads((tmp_path / "scan.json").read_text())
    assert obj["verdict"] in ("pass", "fail") and obj["kind"] == kind
    assert (tmp_path / "scan.csv").read_text().startswith("t,f,d2f")


def test_cli_scan_forced_counterexample(tmp_path, capsys):
    u = np.array([[np.exp(1j * (np.pi / 2 + 0.05))]])
    cfg = write_config(tmp_path, {"kind": "dinf", "force": True, "w": matrix_to_json(np.eye(1)),
                                  "u": matrix_to_json(u), "v": matrix_to_json(u.conj())})
    assert main(["scan", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert "scan dinf: fail" in capsys.readouterr().out


def test_cli_center(tmp_path):
    sites = [matrix_to_json(np.array([[np.exp(1j * a)]])) for a in (0.6, -0.6)]
    cfg = write_config(tmp_path, {"sites": sites, "radius": 0.61,
                                  "start": matrix_to_json(np.array([[np.exp(1e-3j)]]))})
    assert main(["center", "--config", cfg, "--out", str(tmp_path)]) == 0
    obj = json.loads((tmp_path / "center.json").read_text())
    assert obj["value"] == pytest.approx(0.36, abs=1e-8)
    assert (tmp_path / "trace.csv").read_text().startswith("iter,f_A,step")


def test_cli_center_demo(tmp_path):
    assert main(["center", "--seed", "2", "--out", str(tmp_path)]) == 0


def test_cli_rigidity_modes(tmp_path):
    assert main(["rigidity", "--seed", "1", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "rigidity.json").read_text())["status"] == "ok"
    swap = matrix_to_json(np.array([[0, 1], [1, 0]]))
    cfg = write_config(tmp_path, {"mode": "invariant-subspace", "generators": [swap], "rank": 1,
                                  "p0": matrix_to_json(np.diag([1.0, 0.0]))})
    assert main(["rigidity", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert json.loads((tmp_path / "rigidity.json").read_text())["status"] == "radius_too_large"
    shift = matrix_to_json(np.roll(np.eye(3), 1, axis=0))
    v = matrix_to_json(np.eye(3))
    cfg = write_config(tmp_path, {"mode": "fixed-point", "generators": {"left": [shift]}, "v": v})
    assert main(["rigidity", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert main(["rigidity", "--config", write_config(tmp_path, {"mode": "??"})]) == 2


def test_cli_flow(tmp_path):
    assert main(["flow", "--seed", "4", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "flow.csv").read_text().splitlines()
    assert lines[0] == "t,theta_min,theta_max,branch_ok" and len(lines) == 202


def test_cli_flow_is_deterministic(tmp_path):
    main(["flow", "--seed", "4", "--out", str(tmp_path / "a")])
    main(["flow", "--seed", "4", "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "flow.csv").read_bytes() == (tmp_path / "b" / "flow.csv").read_bytes()


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "unifinsler.cli", "flow", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
