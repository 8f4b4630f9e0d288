import csv
import json

import numpy as np
import pytest

from glmscreen.cli import main
from glmscreen.datasets import (
    Dataset,
    ParseError,
    dump_svmlight,
    edpp_counterexample,
    load_csv_dense,
    load_svmlight,
    make_synthetic,
)
from glmscreen.linalg import DesignMatrix


def test_svmlight_basic(tmp_path):
    f = tmp_path / "a.svm"
    f.write_text("1 1:0.5 3:2.0\n")
    ds = load_svmlight(f)
    assert ds.X.n == 1 and ds.X.p == 3
    assert ds.labels == pytest.approx([1.0])
    dense = ds.X.toarray()
    assert dense[0, 0] == 0.5 and dense[0, 1] == 0.0 and dense[0, 2] == 2.0


def test_svmlight_empty_feature_line(tmp_path):
    f = tmp_path / "a.svm"
    f.write_text("1 1:1.0\n-1\n")
    ds = load_svmlight(f)
    assert ds.X.n == 2
    assert np.all(ds.X.toarray()[1] == 0.0)


def test_svmlight_unsorted_and_strict(tmp_path):
    f = tmp_path / "a.svm"
    f.write_text("2 3:1 1:1\n")
    ds = load_svmlight(f)  # sorted on ingest by default
    assert ds.X.toarray()[0, 0] == 1.0 and ds.X.toarray()[0, 2] == 1.0
    with pytest.raises(ParseError):
        load_svmlight(f, strict_order=True)


def test_svmlight_duplicate_rejected(tmp_path):
    f = tmp_path / "a.svm"
    f.write_text("1 2:1 2:3\n")
    with pytest.raises(ParseError, match=":1:"):
        load_svmlight(f)


def test_svmlight_malformed_line_number(tmp_path):
    f = tmp_path / "a.svm"
    f.write_text("1 1:1\n1 borked\n")
    with pytest.raises(ParseError, match=":2:"):
        load_svmlight(f)


def test_svmlight_round_trip(tmp_path):
    X, model, _ = make_synthetic("lasso", 10, 8, density=0.4, seed=3)
    ds = Dataset(X, model.Y[:, 0])
    out = tmp_path / "rt.svm"
    dump_svmlight(ds, out)
    back = load_svmlight(out, n_features=8)
    a, b = ds.X.mat, back.X.mat
    assert np.array_equal(a.indptr, b.indptr)
    assert np.array_equal(a.indices, b.indices)
    assert np.array_equal(a.data, b.data)
    assert np.array_equal(ds.labels, back.labels)


def test_csv_basic(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("1.0,2.0,3.0\n4.0,5.0,6.0\n7.0,8.0,9.0\n")
    ds = load_csv_dense(f, label_column=0)
    assert ds.X.shape == (3, 2)
    assert ds.labels == pytest.approx([1.0, 4.0, 7.0])


def test_csv_single_row_and_header(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("y,x1,x2\n1.5,2.0,3.0\n")
    ds = load_csv_dense(f, label_column=0)
    assert ds.X.n == 1
    assert ds.labels == pytest.approx([1.5])


def test_csv_errors(tmp_path):
    ragged = tmp_path / "r.csv"
    ragged.write_text("1,2,3\n4,5\n")
    with pytest.raises(ParseError):
        load_csv_dense(ragged)
    bad = tmp_path / "b.csv"
    bad.write_text("1,2\n3,oops\n")
    with pytest.raises(ParseError):
        load_csv_dense(bad)


def test_csv_multi_label_columns(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("1,2,10,20\n3,4,30,40\n")
    ds = load_csv_dense(f, label_columns=[2, 3])
    assert ds.X.shape == (2, 2)
    assert ds.labels.shape == (2, 2)
    assert ds.labels[1, 1] == 40.0


def test_cli_lambda_max(tmp_path, capsys):
    f = tmp_path / "d.csv"
    f.write_text("3.0,1.0,0.0\n-1.0,0.0,1.0\n")
    rc = main(["lambda-max", "--model", "lasso", "--data", str(f), "--label-column", "0"])
    assert rc == 0
    assert float(capsys.readouterr().out.strip()) == pytest.approx(3.0)


def test_cli_solve_json(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main([
        "solve", "--model", "lasso", "--synthetic", "--n", "30", "--p", "50",
        "--seed", "1", "--lambda-ratio", "0.3", "--eps", "1e-8",
        "--out-dir", str(out),
    ])
    assert rc == 0
    payload = json.loads((out / "solve.json").read_text())
    assert payload["schema_version"] == 1
    assert payload["result"]["converged"] is True
    assert payload["result"]["gap"] <= 1e-8
    assert (out / "solve_trace.csv").exists()


def test_cli_path_rules_agree(tmp_path):
    data = tmp_path / "d.svm"
    X, model, _ = make_synthetic("lasso", 25, 40, seed=5)
    dump_svmlight(Dataset(DesignMatrix(np.asarray(X.toarray())), model.Y[:, 0]), data)
    eps = 1e-8
    coefs = {}
    for rule in ("none", "gap"):
        out = tmp_path / rule
        rc = main([
            "path", "--model", "lasso", "--data", str(data),
            "--eps", str(eps), "--n-lambdas", "6", "--delta", "1.5",
            "--rule", rule, "--out-dir", str(out), "--no-timing",
        ])
        assert rc == 0
        vals = {}
        with open(out / "path_coefs.csv") as fh:
            for row in csv.DictReader(fh):
                vals[(int(row["point"]), int(row["row"]), int(row["col"]))] = float(row["value"])
        coefs[rule] = vals
    keys = set(coefs["none"]) | set(coefs["gap"])
    for k in keys:
        a = coefs["none"].get(k, 0.0)
        b = coefs["gap"].get(k, 0.0)
        assert abs(a - b) <= 10 * eps


def test_cli_path_report_shape(tmp_path):
    out = tmp_path / "out"
    rc = main([
        "path", "--model", "logreg", "--synthetic", "--n", "25", "--p", "30",
        "--seed", "2", "--eps", "1e-6", "--n-lambdas", "5", "--delta", "1.0",
        "--out-dir", str(out), "--no-timing",
    ])
    assert rc == 0
    payload = json.loads((out / "path_report.json").read_text())
    assert payload["schema_version"] == 1
    assert len(payload["rows"]) == 5
    assert all("wall_ms" not in r for r in payload["rows"])


def test_cli_csv_bodies_deterministic(tmp_path):
    args = [
        "path", "--model", "lasso", "--synthetic", "--n", "20", "--p", "30",
        "--seed", "7", "--eps", "1e-7", "--n-lambdas", "4", "--delta", "1.0",
        "--no-timing",
    ]
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(args + ["--out-dir", str(out1)]) == 0
    assert main(args + ["--out-dir", str(out2)]) == 0
    for name in ("path_points.csv", "path_trace.csv", "path_coefs.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_cli_sweep(tmp_path):
    out = tmp_path / "out"
    rc = main([
        "sweep", "--model", "lasso", "--synthetic", "--n", "20", "--p", "30",
        "--seed", "3", "--n-lambdas", "4", "--delta", "1.0",
        "--budget-list", "2,16,128", "--out-dir", str(out), "--no-timing",
    ])
    assert rc == 0
    with open(out / "sweep.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["lambda", "K2", "K16", "K128"]
    assert len(rows) == 5
    fracs = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    assert np.all((fracs >= 0) & (fracs <= 1))


def test_cli_repro_edpp(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["repro-edpp", "--out-dir", str(out)])
    assert rc == 0
    report = capsys.readouterr().out
    assert "safe-rule failures: 0" in report
    with open(out / "repro_edpp.csv") as fh:
        rows = list(csv.DictReader(fh))
    unsafe_failures = [r for r in rows if r["rule"] != "gap" and r["failure"]]
    gap_failures = [r for r in rows if r["rule"] == "gap" and r["failure"]]
    assert unsafe_failures and not gap_failures


def test_cli_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--model", "mystery"])
    assert exc.value.code == 2


def test_counterexample_matrices():
    X, y = edpp_counterexample()
    arr = X.toarray()
    assert arr[0, 0] == pytest.approx(1 / np.sqrt(2))
    assert arr[0, 1] == pytest.approx(np.sqrt(2) / np.sqrt(3))
    assert arr[1, 1] == pytest.approx(-1 / np.sqrt(6))
    assert arr[2, 0] == pytest.approx(-1 / np.sqrt(2))
    assert y == pytest.approx([1 / np.sqrt(6), 1 / np.sqrt(6), -np.sqrt(2) / np.sqrt(3)])
    assert np.allclose(X.col_norms, 1.0)
    assert np.linalg.norm(y) == pytest.approx(1.0)
