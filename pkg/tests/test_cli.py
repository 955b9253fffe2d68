import csv
import hashlib
import json

import numpy as np
import pytest

from wbrier import cli
from wbrier import metrics as mt
from wbrier import weightfn as wf


def write(path, rows, header=("risk", "outcome")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return str(path)


@pytest.fixture
def toy_csv(tmp_path):
    return write(tmp_path / "toy.csv", [(0.2, 0), (0.4, 1), (0.6, 0), (0.8, 1)])


@pytest.fixture
def set_a(tmp_path, capsys):
    assert cli.main(["simulate", "set-a", "--n", "1000", "--seed", "7",
                     "--out", str(tmp_path / "sa")]) == 0
    capsys.readouterr()
    return {m: str(tmp_path / "sa" / f"set-a_{m}.csv") for m in ("model1", "model2", "model3")}


def run_json(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if code == 0 else None)


def test_eval_toy_hand_values(capsys, toy_csv):
    code, doc = run_json(capsys, ["eval", toy_csv, "--cutoff", "0.5", "--weight", "uniform"])
    assert code == 0 and doc["schema_version"] == 1 and doc["command"] == "eval"
    m = doc["models"]["toy.csv"]
    assert m["n"] == 4 and m["prevalence"] == 0.5
    cut = m["cutoffs"][0]
    assert cut["loss"] == pytest.approx(0.25) and cut["nb_opt_out"] == pytest.approx(0.0)
    # 0.5 * mean of (0.04, 0.36, 0.36, 0.04)
    assert m["weights"][0]["bs_w"] == pytest.approx(0.1, abs=1e-15)
    assert m["auc"] == pytest.approx(0.75)


def test_point_mass_report_matches_loss(capsys, set_a):
    code, doc = run_json(capsys, ["eval", set_a["model1"], "--weight", "point:0.3",
                                  "--cutoff", "0.3"])
    m = doc["models"]["set-a_model1.csv"]
    assert m["weights"][0]["bs_w"] == pytest.approx(m["cutoffs"][0]["loss"], abs=1e-15)


def test_simulate_round_trip_lossless(set_a):
    from wbrier.simlab import generate_set_a
    d = cli.read_validation_csv(set_a["model2"])
    ref = generate_set_a(1000, seed=7)["model2"]
    assert np.array_equal(d.risks, ref.risks) and np.array_equal(d.outcomes, ref.outcomes)


def test_simulate_deterministic(tmp_path):
    digests = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        cli.main(["simulate", "set-b", "--n", "1000", "--seed", "3", "--out", str(out)])
        digests.append(hashlib.sha256((out / "set-b_oh.csv").read_bytes()).hexdigest())
    assert digests[0] == digests[1]


def test_simulate_misclassified_no_flips(tmp_path):
    out = tmp_path / "mc"
    cli.main(["simulate", "misclassified", "--patients", "200", "--visits", "3",
              "--flip01", "0", "--flip10", "0", "--out", str(out)])
    with open(out / "misclassified.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 600
    assert all(r["outcome"] == r["surrogate"] for r in rows)
    d = cli.read_validation_csv(str(out / "misclassified.csv"))
    assert d.cluster_ids is not None and len(np.unique(d.cluster_ids)) == 200


def test_eval_bootstrap_and_csv(capsys, set_a):
    argv = ["eval", set_a["model1"], "--weight", "beta:2,5", "--cutoff", "0.3",
            "--bootstrap", "200", "--seed", "5", "--format", "csv"]
    assert cli.main(argv) == 0
    first = capsys.readouterr().out
    assert cli.main(argv + ["--workers", "3"]) == 0
    assert capsys.readouterr().out == first
    rows = list(csv.DictReader(first.splitlines()))
    bs = [r for r in rows if r["metric"] == "bs_w"][0]
    assert bs["method"] == "bootstrap-percentile" and float(bs["lower"]) < float(bs["upper"])
    assert {"auc", "ipa", "nb_opt_in", "h_measure", "sbs_w"} <= {r["metric"] for r in rows}


def test_compare_self_is_zero(capsys, set_a, tmp_path):
    copy = tmp_path / "copy.csv"
    copy.write_bytes(open(set_a["model1"], "rb").read())
    code, doc = run_json(capsys, ["compare", set_a["model1"], str(copy), "--weight", "beta:2,5",
                                  "--cutoff", "0.2", "--bootstrap", "100"])
    assert code == 0
    for row in doc["differences"]:
        assert row["difference"] == 0.0 and row["lower"] == 0.0 and row["upper"] == 0.0


def test_compare_paired_difference(capsys, set_a):
    code, doc = run_json(capsys, ["compare", set_a["model2"], set_a["model3"],
                                  "--weight", "beta:2,5", "--bootstrap", "200", "--seed", "1"])
    row = [r for r in doc["differences"] if r["statistic"] == "bs_w[beta:2,5]"][0]
    m2 = mt.weighted_brier(cli.read_validation_csv(set_a["model2"]), wf.Beta(2, 5))
    m3 = mt.weighted_brier(cli.read_validation_csv(set_a["model3"]), wf.Beta(2, 5))
    assert row["difference"] == pytest.approx(m2 - m3, abs=1e-15)
    assert row["lower"] <= row["difference"] <= row["upper"]
    auc_row = [r for r in doc["differences"] if r["statistic"] == "auc"][0]
    assert auc_row["difference"] == 0.0


def test_compare_misaligned(capsys, set_a, tmp_path):
    rows = list(csv.reader(open(set_a["model1"])))
    rows[1][1] = str(1 - int(rows[1][1]))
    bad = write(tmp_path / "flip.csv", rows[1:])
    assert cli.main(["compare", set_a["model1"], bad, "--cutoff", "0.3"]) == 4
    short = write(tmp_path / "short.csv", rows[1:50])
    assert cli.main(["compare", set_a["model1"], short, "--cutoff", "0.3"]) == 4


def test_curves(capsys, tmp_path):
    y = [0, 0, 1, 1]
    sep = write(tmp_path / "sep.csv", zip([0.1, 0.2, 0.8, 0.9], y))
    code, doc = run_json(capsys, ["curves", sep])
    roc = doc["models"]["sep.csv"]["roc"]
    assert [(p["fpr"], p["tpr"]) for p in roc] == [(0, 0), (0, 0.5), (0, 1), (0.5, 1), (1, 1)]
    none = write(tmp_path / "none.csv", zip([0.0] * 4, y))
    assert cli.main(["curves", none, "--table", "decision", "--format", "csv"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert len(rows) == 99 and all(float(r["nb_opt_in"]) == 0.0 for r in rows)
    assert cli.main(["curves", none, "--format", "csv"]) == 2


def test_curves_calibration_direction(capsys, tmp_path):
    cli.main(["simulate", "set-b", "--n", "50000", "--seed", "2", "--out", str(tmp_path)])
    capsys.readouterr()
    path = str(tmp_path / "set-b_ol.csv")
    assert cli.main(["curves", path, "--table", "calibration", "--format", "csv"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    low = [r for r in rows if float(r["mean_risk"]) < 0.4]
    assert low and all(float(r["event_rate"]) > float(r["mean_risk"]) for r in low)


def test_out_file(tmp_path, toy_csv):
    out = tmp_path / "report.json"
    assert cli.main(["eval", toy_csv, "--cutoff", "0.3", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["models"]["toy.csv"]["n"] == 4


@pytest.mark.parametrize("rows,msg", [
    ([(0.2, 0), (1.5, 1)], "line 3"),
    ([(0.2, 0), ("abc", 1)], "line 3"),
    ([(0.2, 0), (0.3, 2)], "line 3"),
    ([(0.2, 0, 9)], "line 2"),
])
def test_malformed_csv(capsys, tmp_path, rows, msg):
    path = write(tmp_path / "bad.csv", rows)
    assert cli.main(["eval", path, "--cutoff", "0.3"]) == 2
    assert msg in capsys.readouterr().err


def test_missing_column(capsys, tmp_path):
    path = write(tmp_path / "bad.csv", [(0.2, 0)], header=("p", "outcome"))
    assert cli.main(["eval", path, "--cutoff", "0.3"]) == 2


def test_degenerate_exit(capsys, tmp_path):
    path = write(tmp_path / "deg.csv", [(0.2, 1), (0.6, 1)])
    assert cli.main(["eval", path, "--weight", "beta:2,2"]) == 3
    assert cli.main(["eval", path, "--cutoff", "0.3"]) == 0


def test_io_error(capsys, tmp_path):
    assert cli.main(["eval", str(tmp_path / "nope.csv"), "--cutoff", "0.3"]) == 1


@pytest.mark.parametrize("argv", [
    ["eval", "x.csv"],
    ["eval", "x.csv", "--weight", "beta:0,1"],
    ["eval", "x.csv", "--cutoff", "1.0"],
    ["eval", "x.csv", "--cutoff", "0.2", "--bins", "1"],
    ["eval", "x.csv", "--cutoff", "0.2", "--seed", "-3"],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 2
