import csv
import json

import numpy as np
import pytest

from cyclefv.cli import main


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_spectrum(capsys, tmp_path):
    code, out, err = run(capsys, "spectrum", "--K", "4", "--theta", "1")
    assert code == 0
    summary = dict(line.split("=") for line in err.strip().splitlines())
    assert float(summary["rho"]) == pytest.approx(2) and float(summary["alpha"]) == pytest.approx(4)
    assert out.splitlines()[0] == "k,re_lambda,im_lambda"
    code, _, err = run(capsys, "spectrum", "--K", "6", "--theta", "1", "--p", "1")
    assert "cloez_lambda=0" in err


def test_missing_K_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["spectrum", "--K"])
    assert exc.value.code == 2
    code, _, err = run(capsys, "spectrum")
    assert code == 2 and "usage" in err
    code, _, _ = run(capsys, "covariance", "--K", "4", "--N", "1")
    assert code == 2


def test_covariance_csv(capsys, tmp_path):
    path = tmp_path / "c.csv"
    code, _, _ = run(capsys, "covariance", "--K", "5", "--N", "2", "--theta", "1", "--p", "1", "--checked", "--out", str(path))
    assert code == 0
    rows = list(csv.DictReader(open(path)))
    assert list(rows[0]) == ["k", "s_closed", "s_linear", "s_exact", "cov", "asym1", "asym2"]
    expect = [8 / 55, 1 / 55, 1 / 110, 1 / 110, 1 / 55]
    for row, e in zip(rows, expect):
        for col in ("s_closed", "s_linear", "s_exact"):
            assert float(row[col]) == pytest.approx(e, abs=1e-14)


def test_covariance_large_N(capsys):
    code, out, err = run(capsys, "covariance", "--K", "3", "--N", "100000", "--checked")
    assert code == 0
    rows = list(csv.DictReader(out.splitlines()))
    assert rows[0]["s_exact"] == ""
    assert 100000 * float(rows[0]["cov"]) == pytest.approx(8 / 27, rel=1e-3)


def test_simulate_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "--K", "4", "--N", "10", "--t-end", "5", "--replicas", "100", "--seed", "7"]
    assert run(capsys, *args, "--out", str(a))[0] == 0
    assert run(capsys, *args, "--out", str(b), "--threads", "3")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert run(capsys, "simulate", "--K", "4", "--N", "10", "--t-end", "5", "--replicas", "0")[0] == 2


def test_simulate_stationary_summary(capsys, tmp_path):
    summ = tmp_path / "s.json"
    code, _, err = run(capsys, "simulate", "--K", "4", "--N", "6", "--theta", "2", "--t-end", "0", "--n-samples", "1",
                       "--replicas", "20000", "--seed", "1", "--stationary", "--out", str(tmp_path / "x.csv"),
                       "--summary", str(summ))
    rep = json.loads(summ.read_text())
    assert code == 0 and rep["stationary_check"]["pass"]
    assert rep["seed"] == 1 and rep["params"]["K"] == 4 and "version" in rep


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"K": 5, "N": 2, "theta": 3.0}))
    code, out, _ = run(capsys, "covariance", "--config", str(cfg), "--theta", "1")
    assert code == 0
    rows = list(csv.DictReader(out.splitlines()))
    assert float(rows[0]["s_closed"]) == pytest.approx(8 / 55)
    cfg.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(SystemExit) as exc:
        main(["covariance", "--config", str(cfg)])
    assert exc.value.code == 2


def test_dynamics(capsys, tmp_path):
    path = tmp_path / "d.csv"
    code, _, err = run(capsys, "dynamics", "--K", "3", "--N", "2", "--t-end", "50", "--n-times", "6", "--out", str(path))
    assert code == 0 and "bound_violations=0" in err
    rows = list(csv.DictReader(open(path)))
    assert [float(rows[0][f"g0_{k}"]) for k in range(3)] == [0, 0, 0]
    last = rows[-1]
    for k in range(3):
        assert float(last[f"g0_{k}"]) == pytest.approx(float(last[f"ginf_{k}"]), abs=1e-8)
    for r in rows:
        assert float(r["var_gap_exact"]) <= float(r["var_gap_bound"]) + 1e-9
    # round trip at 17 digits
    assert float(rows[1]["s_0"]).__repr__() == repr(float(rows[1]["s_0"]))


def test_verify(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, _, _ = run(capsys, "verify", "--only", "rotation,kolmogorov,spectrum", "--json", str(path))
    rep = json.loads(path.read_text())
    assert code == 0 and rep["pass"]
    assert {c["check_id"] for c in rep["checks"]} >= {"spectrum_closed_form", "rotation_invariance"}
    assert set(rep["checks"][0]) == {"check_id", "paper_ref", "residual", "threshold", "pass"}
    code, _, _ = run(capsys, "verify", "--only", "spectrum", "--inject-theta-mismatch", "0.1", "--json", str(path))
    assert code == 1
    assert run(capsys, "verify", "--only", "nonexistent")[0] == 2


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "cyclefv", "spectrum", "--K", "3"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("k,re_lambda")
