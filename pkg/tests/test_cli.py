import json
import subprocess
import sys

import numpy as np
import pytest

from logcave.rng import make_rng


def run_cli(*args, **kw):
    return subprocess.run([sys.executable, "-m", "logcave.cli", *args],
                          capture_output=True, text=True, **kw)


@pytest.fixture(scope="module")
def data_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "pts.csv"
    pts = make_rng(0, 121).standard_normal((50, 2))
    np.savetxt(path, pts, delimiter=",")
    return str(path)


@pytest.fixture(scope="module")
def model_json(data_csv, tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "model.json"
    res = run_cli("fit", data_csv, "--smooth", "-o", str(path))
    assert res.returncode == 0, res.stderr
    return str(path)


@pytest.fixture(scope="module")
def clf_json(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli")
    csv = base / "labeled.csv"
    rng = make_rng(1, 121)
    rows = [f"{x},{y},a" for x, y in rng.standard_normal((30, 2))]
    rows += [f"{x},{y},b" for x, y in rng.standard_normal((30, 2)) + 2.0]
    csv.write_text("\n".join(rows) + "\n")
    out = base / "clf.json"
    res = run_cli("classify", "train", str(csv), "-o", str(out))
    assert res.returncode == 0, res.stderr
    return str(csv), str(out)


def test_fit_reports_summary(data_csv, tmp_path):
    res = run_cli("fit", data_csv)
    assert res.returncode == 0
    out = json.loads(res.stdout)
    assert out["n"] == 50 and out["d"] == 2
    assert out["converged"] is True
    assert out["normalization_residual"] < 1e-6


def test_fit_is_byte_identical(data_csv, tmp_path):
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    r1 = run_cli("fit", data_csv, "--smooth", "--seed", "5", "-o", str(p1))
    r2 = run_cli("fit", data_csv, "--smooth", "--seed", "5", "-o", str(p2))
    assert r1.returncode == r2.returncode == 0
    s1, s2 = json.loads(r1.stdout), json.loads(r2.stdout)
    s1.pop("archive"), s2.pop("archive")   # echoes the output path
    assert s1 == s2
    assert p1.read_bytes() == p2.read_bytes()


def test_malformed_csv_exits_2_with_line(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1.0,2.0\n3.0,oops\n")
    res = run_cli("fit", str(bad))
    assert res.returncode == 2
    assert "line 2" in res.stderr


def test_ragged_csv_exits_2_with_line(tmp_path):
    bad = tmp_path / "ragged.csv"
    bad.write_text("1.0,2.0\n3.0\n")
    res = run_cli("fit", str(bad))
    assert res.returncode == 2
    assert "line 2" in res.stderr


def test_degenerate_data_exits_3(tmp_path):
    bad = tmp_path / "flat.csv"
    bad.write_text("0.0,0.0\n1.0,1.0\n2.0,2.0\n3.0,3.0\n")
    res = run_cli("fit", str(bad))
    assert res.returncode == 3


def test_eval_points_and_determinism(model_json, tmp_path):
    q = tmp_path / "q.csv"
    q.write_text("0.0,0.0\n1.0,0.5\n")
    r1 = run_cli("eval", model_json, "--points", str(q))
    r2 = run_cli("eval", model_json, "--points", str(q))
    assert r1.returncode == 0
    assert r1.stdout == r2.stdout
    vals = json.loads(r1.stdout)["values"]
    assert len(vals) == 2 and all(v > 0 for v in vals)


def test_eval_requires_points_or_grid(model_json):
    res = run_cli("eval", model_json)
    assert res.returncode == 2


def test_sample_determinism(model_json):
    r1 = run_cli("sample", model_json, "-m", "20", "--seed", "3")
    r2 = run_cli("sample", model_json, "-m", "20", "--seed", "3")
    r3 = run_cli("sample", model_json, "-m", "20", "--seed", "4")
    assert r1.returncode == 0
    assert r1.stdout == r2.stdout
    assert r1.stdout != r3.stdout


def test_trace_test_command(data_csv):
    r1 = run_cli("test", data_csv, "-B", "5", "--seed", "2")
    r2 = run_cli("test", data_csv, "-B", "5", "--seed", "2")
    assert r1.returncode == 0, r1.stderr
    assert r1.stdout == r2.stdout
    out = json.loads(r1.stdout)
    assert out["B"] == 5 and len(out["boot_traces"]) == 5


def test_classify_roundtrip(clf_json, tmp_path):
    csv, model = clf_json
    q = tmp_path / "q.csv"
    q.write_text("-0.5,0.0\n3.0,0.0\n")
    res = run_cli("classify", "predict", model, str(q))
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)["labels"] == ["a", "b"]
    risk = run_cli("classify", "risk", model, csv)
    assert risk.returncode == 0
    assert 0.0 <= json.loads(risk.stdout)["risk"] <= 1.0


def test_classify_wrong_archive_kind(model_json, tmp_path):
    q = tmp_path / "q.csv"
    q.write_text("0.0,0.0\n")
    res = run_cli("classify", "predict", model_json, str(q))
    assert res.returncode == 2


def test_functional_command(model_json):
    r1 = run_cli("functional", model_json, "--g", "norm(x)**2",
                 "--draws", "2000", "--seed", "1")
    r2 = run_cli("functional", model_json, "--g", "norm(x)**2",
                 "--draws", "2000", "--seed", "1")
    assert r1.returncode == 0, r1.stderr
    assert r1.stdout == r2.stdout
    out = json.loads(r1.stdout)
    assert out["value"] > 0 and out["std_error"] > 0


def test_functional_rejects_bad_expression(model_json):
    res = run_cli("functional", model_json, "--g", "__import__('os')")
    assert res.returncode == 2


def test_experiment_independence_small():
    res = run_cli("experiment", "independence", "--n", "250", "--seed", "3")
    assert res.returncode == 0, res.stderr
    out = json.loads(res.stdout)
    assert out["gap_independent"] < out["gap_correlated"]
