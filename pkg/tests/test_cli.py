import csv
import json
import math

import numpy as np
import pytest

from gnb.classify import GnbModel
from gnb.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, RunConfig, UsageError, main
from gnb.data import load_csv, apply_discretization, fit_discretization
from gnb.featsel import stage2_curve
from gnb.learn import learn


def write_toy(path, n=120, d=4, seed=0, signal=0.9):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n)
    # signal=1 makes the first column an exact two-valued copy of the class
    cols = {"strong": y * 5 + rng.normal(size=n) * 3 if signal < 1 else y * 5}
    for j in range(1, d):
        cols[f"x{j}"] = rng.integers(0, 3, n)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*cols, "label"])
        for i in range(n):
            w.writerow([*(round(float(c[i]), 3) for c in cols.values()), "yes" if y[i] else "no"])
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def toy(tmp_path):
    return write_toy(tmp_path / "toy.csv")


def test_usage_errors(toy, tmp_path, capsys):
    assert main([]) == EXIT_USAGE
    assert main(["train", "--data", str(toy)]) == EXIT_USAGE
    assert main(["train", "--data", str(toy), "--class-col", "label", "--algo", "bogus",
                 "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["evaluate", "--data", str(toy), "--class-col", "label", "--test-frac", "1.5"]) == EXIT_USAGE
    assert main(["curves", "--data", str(toy), "--class-col", "label", "--algo", "nb"]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert all(line.startswith("gnb: usage error") for line in err.strip().splitlines())
    with pytest.raises(UsageError):
        RunConfig(toy, "label", n_runs=0)


def test_data_errors(toy, tmp_path, capsys):
    assert main(["train", "--data", str(tmp_path / "none.csv"), "--class-col", "label",
                 "--out", str(tmp_path)]) == EXIT_DATA
    assert main(["train", "--data", str(toy), "--class-col", "nope", "--out", str(tmp_path)]) == EXIT_DATA
    assert main(["evaluate", "--data", str(toy), "--class-col", "label", "--positive", "maybe",
                 "--out", str(tmp_path)]) == EXIT_DATA
    assert main(["predict", "--model", str(tmp_path / "m.json"), "--data", str(toy)]) == EXIT_DATA
    lines = capsys.readouterr().err.strip().splitlines()
    assert len(lines) == 4 and all(line.startswith("gnb: data error") for line in lines)


def test_version(capsys):
    assert main(["--version"]) == EXIT_OK
    assert "gnb" in capsys.readouterr().out


def test_train_three_columns_gives_one_triplet(tmp_path):
    p = tmp_path / "three.csv"
    p.write_text("a,b,y\n" + "".join(f"{i % 2},{i % 3},{(i // 2) % 2}\n" for i in range(30)))
    assert main(["train", "--data", str(p), "--class-col", "y", "--out", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "model.json").read_text())
    assert doc["schema_version"] == 1
    model = GnbModel.from_json((tmp_path / "model.json").read_text())
    assert len(model.cluster_tables) == 1
    assert len(read_csv(tmp_path / "importance.csv")) == 1


@pytest.mark.parametrize("algo", ["gnb-a", "gnb-o", "nb", "tan"])
def test_train_outputs(toy, tmp_path, capsys, algo):
    assert main(["train", "--data", str(toy), "--class-col", "label", "--algo", algo,
                 "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "total weight" in out and "bits" in out
    assert (tmp_path / "importance.csv").exists() == (algo != "nb")


def run_twice(tmp_path, argv, files):
    outs = []
    for tag in ("a", "b"):
        d = tmp_path / tag
        assert main([*argv, "--out", str(d)]) == EXIT_OK
        outs.append({f: (d / f).read_bytes() for f in files})
    return outs


def test_commands_are_byte_deterministic(toy, tmp_path):
    base = ["--data", str(toy), "--class-col", "label"]
    cases = [
        (["discretize", *base], ["discretization.json", "discretized.csv"]),
        (["train", *base, "--algo", "gnb-o"], ["model.json", "importance.csv"]),
        (["evaluate", *base, "--runs", "2", "--seed", "5"],
         ["evaluation.json", "evaluation_runs.csv", "evaluation_mean.csv"]),
        (["curves", *base, "--algo", "gnb-a,gnb-o", "--runs", "2"],
         ["curve_gnb-a.csv", "curve_gnb-a_runs.csv", "curve_gnb-o.csv"]),
    ]
    for i, (argv, files) in enumerate(cases):
        a, b = run_twice(tmp_path / str(i), argv, files)
        assert a == b


def test_predict_on_training_file(toy, tmp_path):
    assert main(["train", "--data", str(toy), "--class-col", "label", "--out", str(tmp_path)]) == EXIT_OK
    assert main(["predict", "--model", str(tmp_path / "model.json"), "--data", str(toy),
                 "--out", str(tmp_path)]) == EXIT_OK
    rows = read_csv(tmp_path / "predictions.csv")
    assert len(rows) == 120
    assert [int(r["row"]) for r in rows] == list(range(120))
    for r in rows:
        assert r["predicted"] in ("no", "yes")
        assert math.isclose(float(r["p_no"]) + float(r["p_yes"]), 1.0, abs_tol=1e-9)
    truth = [r["label"] for r in read_csv(toy)]
    acc = np.mean([r["predicted"] == t for r, t in zip(rows, truth)])
    assert acc > 0.8
    # a second prediction run produces the same bytes
    first = (tmp_path / "predictions.csv").read_bytes()
    main(["predict", "--model", str(tmp_path / "model.json"), "--data", str(toy), "--out", str(tmp_path)])
    assert (tmp_path / "predictions.csv").read_bytes() == first


def test_predict_unseen_category_sets_fallback(tmp_path):
    p = tmp_path / "cat.csv"
    p.write_text("c,d,y\n" + "".join(f"{'ab'[i % 2]},{'uv'[(i // 2) % 2]},{i % 2}\n" for i in range(20)))
    assert main(["train", "--data", str(p), "--class-col", "y", "--out", str(tmp_path)]) == EXIT_OK
    q = tmp_path / "new.csv"
    q.write_text("c,d\na,u\nz,u\n?,v\nb,v\n")
    assert main(["predict", "--model", str(tmp_path / "model.json"), "--data", str(q),
                 "--out", str(tmp_path)]) == EXIT_OK
    rows = read_csv(tmp_path / "predictions.csv")
    # the incomplete row is dropped but row numbers still refer to the input
    assert [r["row"] for r in rows] == ["0", "1", "3"]
    assert [r["fallback"] for r in rows] == ["false", "true", "false"]


def test_predict_reports_missing_columns(tmp_path, toy, capsys):
    main(["train", "--data", str(toy), "--class-col", "label", "--out", str(tmp_path)])
    q = tmp_path / "short.csv"
    q.write_text("x1\n1\n")
    assert main(["predict", "--model", str(tmp_path / "model.json"), "--data", str(q),
                 "--out", str(tmp_path)]) == EXIT_DATA
    err = capsys.readouterr().err
    assert "strong" in err


def test_curve_row_count(toy, tmp_path):
    assert main(["curves", "--data", str(toy), "--class-col", "label", "--runs", "2",
                 "--out", str(tmp_path)]) == EXIT_OK
    rows = read_csv(tmp_path / "curve_gnb-a.csv")
    assert len(rows) == 4 - 1
    assert all(r["seeds"] == "0;1" for r in rows)


def test_dominant_feature_curve_is_flat_and_high(tmp_path):
    p = write_toy(tmp_path / "dom.csv", n=200, d=5, seed=3, signal=1.0)
    assert main(["curves", "--data", str(p), "--class-col", "label", "--out", str(tmp_path)]) == EXIT_OK
    assert all(float(r["accuracy"]) >= 0.95 for r in read_csv(tmp_path / "curve_gnb-a.csv"))


def test_evaluate_equals_curve_last_point(toy, tmp_path):
    assert main(["evaluate", "--data", str(toy), "--class-col", "label", "--runs", "1", "--seed", "4",
                 "--algo", "gnb-a", "--positive", "yes", "--out", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "evaluation.json").read_text())
    raw = load_csv(toy, "label")
    table = apply_discretization(raw, fit_discretization(raw))
    positive = table.class_labels.index("yes")
    curve = stage2_curve(table, lambda t: learn(t, "gnb-a"), n_runs=1, base_seed=4, positive=positive)
    mean = doc["algorithms"]["gnb-a"]["mean"]
    last = curve.rows[-1]
    for m in ("accuracy", "precision", "recall", "f1", "auc"):
        assert math.isclose(mean[m], getattr(last, m), abs_tol=1e-12)
    assert doc["seeds"] == [4] and doc["positive_class"] == "yes"


def test_algorithms_share_test_rows(toy, tmp_path):
    assert main(["evaluate", "--data", str(toy), "--class-col", "label", "--runs", "1",
                 "--algo", "nb,gnb-a", "--out", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "evaluation.json").read_text())
    a, b = (doc["algorithms"][k]["runs"][0] for k in ("nb", "gnb-a"))
    assert a["seed"] == b["seed"] and a["n_test"] == b["n_test"] == 18
    # identical actual class counts on the shared test rows
    pos = lambda r: r["confusion"]["tp"] + r["confusion"]["fn"]
    assert pos(a) == pos(b)
    runs = read_csv(tmp_path / "evaluation_runs.csv")
    assert [r["algorithm"] for r in runs] == ["nb", "gnb-a"]
