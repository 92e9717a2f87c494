import csv
import json

import pytest

from kerrlab.cli import main


def run_json(tmp_path, args, name="report.json"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    data = json.loads(out.read_text()) if out.exists() else None
    return code, data


def test_index_example(tmp_path):
    code, rep = run_json(tmp_path,
                         ["index", "--T", "10", "--profile", "ramp:0.3:1.3",
                          "--kmax", "8"])
    assert code == 0
    r = rep["results"]["report"]
    assert r["index_lhs"] == 1 and round(r["index_rhs"]) == 1
    assert rep["passed"] is True
    assert rep["version"]


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"a": 0.9, "n_points": 2}))
    code, rep = run_json(tmp_path,
                         ["kerr-check", "--config", str(cfg), "--a", "0.5"])
    assert code == 0
    assert rep["config"]["a"] == 0.5  # flag wins
    assert rep["config"]["n_points"] == 2  # file value kept


def test_unknown_config_key_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["kerr-check", "--config", str(cfg)]) == 2


def test_unreadable_config_rejected(tmp_path):
    assert main(["kerr-check", "--config", str(tmp_path / "missing.json")]) == 2


def test_superextreme_rejected():
    assert main(["kerr-check", "--a", "1.5", "--m", "1"]) == 2


def test_morawetz_grid_below_minimum_rejected():
    assert main(["morawetz", "--n-r", "8"]) == 2


def test_unknown_flag_rejected():
    with pytest.raises(SystemExit) as exc:
        main(["kerr-check", "--no-such-flag", "1"])
    assert exc.value.code == 2


def test_geodesic_csv_schema(tmp_path):
    csv_path = tmp_path / "traj.csv"
    code, rep = run_json(tmp_path,
                         ["geodesic", "--t-max", "5", "--n-samples", "20",
                          "--csv", str(csv_path)])
    assert code == 0
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["tau", "t", "r", "theta", "phi", "ut", "ur", "utheta",
                       "uphi", "e", "lz", "k", "norm"]
    assert len(rows) == 21
    assert abs(float(rows[1][12]) + 1.0) < 1e-10  # timelike norm column


def test_wave_csv_schema(tmp_path):
    csv_path = tmp_path / "series.csv"
    code, rep = run_json(tmp_path,
                         ["wave-evolve", "--t-end", "2", "--n-r", "64",
                          "--n-theta", "8", "--csv", str(csv_path)])
    assert code == 0
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["step", "time", "e_model3", "bulk_increment",
                       "bulk_cumulative", "ratio"]
    assert float(rows[1][1]) == 0.0 and float(rows[1][5]) == 0.0


def test_reports_are_byte_identical(tmp_path):
    a = tmp_path / "a.json"
    for _ in range(2):
        code = main(["goursat", "--data", "linear", "--out", str(a)])
        assert code == 0
        if not hasattr(test_reports_are_byte_identical, "_first"):
            test_reports_are_byte_identical._first = a.read_bytes()
    assert a.read_bytes() == test_reports_are_byte_identical._first


def test_threads_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("BHL_THREADS", "3")
    code, rep = run_json(tmp_path, ["goursat", "--data", "linear"])
    assert code == 0 and rep["config"]["threads"] == 3
    monkeypatch.delenv("BHL_THREADS")
    code, rep = run_json(tmp_path, ["goursat", "--data", "linear"], name="r2.json")
    assert code == 0 and rep["config"]["threads"] == 1


def test_index_profile_file(tmp_path):
    prof = tmp_path / "profile.json"
    ts = [0.0, 0.5, 9.5, 10.0]
    prof.write_text(json.dumps({"t": ts, "a": [0.3, 0.3, 1.3, 1.3]}))
    code, rep = run_json(tmp_path, ["index", "--T", "10",
                                    "--profile", str(prof)])
    assert code == 0
    assert rep["results"]["report"]["index_lhs"] == 1


def test_invariant_violation_exits_one(tmp_path):
    # an impossible drift tolerance cannot be met: exit code 1, report written
    out = tmp_path / "geo.json"
    code = main(["geodesic", "--t-max", "50", "--drift-tol", "1e-18",
                 "--out", str(out)])
    assert code == 1
    rep = json.loads(out.read_text())
    assert rep["passed"] is False
    assert rep["failures"]
    f = rep["failures"][0]
    assert {"check", "value", "tolerance"} <= set(f)
