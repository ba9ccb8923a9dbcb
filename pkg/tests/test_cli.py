import json

import numpy as np
import pytest

from assetfail.artifact import ModelArtifact
from assetfail.asset_data import FeatureSchema, FeatureSpec
from assetfail.classifier import LogisticModel
from assetfail.cli import k_range, main
from assetfail.clustering import ClusterModel
from assetfail.conditional_age import AgedClusterModel
from assetfail.feature_space import EncodedSet, Encoder, NormalizationParams
from assetfail.reports import read_csv


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def fleet(tmp_path_factory):
    out = tmp_path_factory.mktemp("fleet")
    assert run("synthesize", "--seed", 4, "--n-assets", 150, "--out", out) == 0
    return out


@pytest.fixture(scope="module")
def model_dir(fleet, tmp_path_factory):
    out = tmp_path_factory.mktemp("model")
    assert run("learn", "--data", fleet / "history.csv", "--schema", fleet / "schema.json",
               "--seed", 4, "--k-range", "2..4", "--out", out) == 0
    return out


def test_synthesize_outputs(fleet):
    names = sorted(p.name for p in fleet.iterdir())
    assert names == ["fleet_config.json", "history.csv", "schema.json", "truth.csv"]
    assert json.loads((fleet / "fleet_config.json").read_text())["n_assets"] == 150


def test_learn_outputs(model_dir):
    names = {p.name for p in model_dir.iterdir()}
    assert names == {"model.json", "k_sweep.csv", "cluster_ages.csv", "holdout_metrics.csv",
                     "learning_report.txt"}
    meta, rows = read_csv(model_dir / "k_sweep.csv")
    assert [r["k"] for r in rows] == ["2", "3", "4"]
    assert {"seed", "config_hash", "mode"} <= set(meta)
    assert "chosen K=" in (model_dir / "learning_report.txt").read_text()


def test_predict_long_term(fleet, model_dir, tmp_path):
    assert run("predict", "--model", model_dir / "model.json", "--data", fleet / "history.csv",
               "--horizon", 8, "--mode", "long-term", "--out", tmp_path) == 0
    meta, rows = read_csv(tmp_path / "predictions.csv")
    assert len(rows) == 150 and meta["mode"] == "predict-long-term"
    r = rows[0]
    assert float(r["future_conditional_age"]) == pytest.approx(
        float(r["future_aging_rate"]) * (float(r["physical_age"]) + 8), rel=1e-9)


def test_byte_identical_reruns(fleet, model_dir, tmp_path):
    again = tmp_path / "fleet"
    assert run("synthesize", "--seed", 4, "--n-assets", 150, "--out", again) == 0
    for name in ("history.csv", "truth.csv", "schema.json", "fleet_config.json"):
        assert (again / name).read_bytes() == (fleet / name).read_bytes()
    m2 = tmp_path / "model"
    assert run("learn", "--data", fleet / "history.csv", "--schema", fleet / "schema.json",
               "--seed", 4, "--k-range", "2..4", "--out", m2) == 0
    for p in model_dir.iterdir():
        assert (m2 / p.name).read_bytes() == p.read_bytes(), p.name


def test_long_term_on_one_time_data(fleet, model_dir, tmp_path, capsys):
    lines = (fleet / "history.csv").read_text().splitlines()
    header = lines[0].split(",")
    year = header.index("InspectionYear")
    keep = [",".join(c for j, c in enumerate(l.split(",")) if j != year)
            for l in lines if l.startswith("AssetID") or l.split(",")[year] == "2012"]
    data = tmp_path / "one_time.csv"
    data.write_text("\n".join(keep) + "\n")
    code = run("predict", "--model", model_dir / "model.json", "--data", data,
               "--horizon", 5, "--mode", "long-term", "--out", tmp_path / "p")
    assert code == 1 and "long-term" in capsys.readouterr().err
    assert run("predict", "--model", model_dir / "model.json", "--data", data,
               "--horizon", 5, "--out", tmp_path / "p") == 0


def test_usage_errors(capsys):
    assert run("learn", "--data", "x", "--schema", "y", "--seed", 1, "--k-range", "2..1",
               "--out", "z") == 2
    assert run("learn", "--data", "x", "--schema", "y", "--out", "z") == 2
    with pytest.raises(Exception):
        k_range("1..4")
    assert k_range("2..6") == (2, 6)


def test_single_class_is_domain_error(fleet, tmp_path, capsys):
    text = (fleet / "history.csv").read_text().replace("Failed", "Working")
    data = tmp_path / "working.csv"
    data.write_text(text)
    code = run("learn", "--data", data, "--schema", fleet / "schema.json", "--seed", 1,
               "--out", tmp_path / "m")
    assert code == 1 and "error" in capsys.readouterr().err


def test_missing_file_is_domain_error(tmp_path):
    assert run("predict", "--model", tmp_path / "none.json", "--data", tmp_path / "none.csv",
               "--out", tmp_path) == 1


def _hand_model(path):
    schema = FeatureSchema((FeatureSpec("H"),))
    enc = Encoder(schema, NormalizationParams(("H",), [0.0], [100.0]))
    cents = EncodedSet(np.array([[0.2], [0.6]]), np.zeros((2, 0), dtype=np.int64))
    aged = AgedClusterModel(ClusterModel(2, cents, np.empty(0, dtype=np.int64), 0.0,
                                         np.array([5, 5])), np.array([20.0, 60.0]))
    ModelArtifact(enc, aged, LogisticModel(-10.0, 0.0, 0.1)).save(path)


def test_worked_example_one_time(tmp_path):
    # An asset sitting on the age-60 centroid at physical age 30 ages at rate 2.
    _hand_model(tmp_path / "model.json")
    data = tmp_path / "asset.csv"
    data.write_text("AssetID,H,Age,Status\nA1,60,30,Working\n")
    for horizon, expected in ((0, 60.0), (5, 70.0)):
        out = tmp_path / f"h{horizon}"
        assert run("predict", "--model", tmp_path / "model.json", "--data", data,
                   "--horizon", horizon, "--out", out) == 0
        _, rows = read_csv(out / "predictions.csv")
        r = rows[0]
        assert float(r["conditional_age"]) == 60.0
        assert float(r["aging_rate"]) == 2.0
        assert float(r["future_conditional_age"]) == expected
        assert r["status"] == ("Failed" if expected > 100 else "Working")


def test_evaluate_and_compare(fleet, tmp_path):
    common = ["--schema", fleet / "schema.json", "--seed", 4, "--k-range", "2..4"]
    assert run("evaluate", "--data", fleet / "history.csv", "--truth", fleet / "truth.csv",
               *common, "--out", tmp_path / "e") == 0
    assert {p.name for p in (tmp_path / "e").iterdir()} == {"metrics.csv", "metrics.txt",
                                                            "predictions.csv"}
    assert run("evaluate", "--data", fleet / "history.csv", "--truth", fleet / "truth.csv",
               *common, "--experiment", "noise", "--out", tmp_path / "n") == 0
    text = (tmp_path / "n" / "noise_sensitivity.txt").read_text()
    assert "Swap 10" in text and "Inflate 5" in text
    assert run("compare", "--data", fleet / "history.csv", "--truth", fleet / "truth.csv",
               *common, "--out", tmp_path / "c") == 0
    _, rows = read_csv(tmp_path / "c" / "comparison.csv")
    assert [r["method"] for r in rows] == ["classification", "predict-one-time",
                                           "predict-long-term", "weibull"]
    table = (tmp_path / "c" / "comparison.txt").read_text()
    assert "weibull (conditional)" in table
