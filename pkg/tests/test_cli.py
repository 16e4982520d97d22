import csv
import json

import pytest

from dimred import cli
from dimred.cli import main
from dimred.dataset import load_csv


@pytest.fixture
def blobs_csv(tmp_path):
    path = tmp_path / "blobs.csv"
    assert main(["generate", "blobs", "--param", "n_points=90", "--param", "n_blobs=3", "--param", "dim=4",
                 "--out", str(path)]) == 0
    return path


def test_generate(blobs_csv):
    cloud = load_csv(blobs_csv, "label")
    assert cloud.n == 90 and cloud.d == 4 and set(cloud.labels) == {0, 1, 2}


def test_embed_and_metrics(tmp_path, blobs_csv, capsys):
    out = tmp_path / "run"
    code = main(["embed", "--data", str(blobs_csv), "--label-column", "label", "--out", str(out),
                 "--n-iters", "10", "--subsample", "40", "--init", "pca"])
    assert code == 0
    assert (out / "metrics.json").exists() and (out / "plot.svg").exists()
    capsys.readouterr()
    assert main(["metrics", str(blobs_csv), str(out / "layout.csv"), "--label-column", "label",
                 "--subsample", "40", "--metrics", "stress,neighborhood"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["context"] is None and report["stress"]["sigma"] >= 0


def test_embed_with_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dataset": {"generator": "disk", "params": {"n_points": 60}},
                               "metrics": ["stress"], "n_iters": 3}))
    assert main(["embed", "--config", str(cfg), "--out", str(tmp_path / "o"), "--seed", "7"]) == 0
    echo = json.loads((tmp_path / "o" / "metrics.json").read_text())["config_echo"]
    assert echo["seed"] == 7 and echo["n_iters"] == 3


def test_compare(tmp_path, blobs_csv):
    assert main(["compare", str(blobs_csv), str(blobs_csv), "--label-column", "label", "--subsample", "30",
                 "--metrics", "stress,global", "--out", str(tmp_path / "cmp")]) == 0
    rows = list(csv.DictReader(open(tmp_path / "cmp" / "comparison.csv", newline="")))
    assert {r["metric"] for r in rows} >= {"stress.sigma", "global.dim0.bottleneck"}
    assert (tmp_path / "cmp" / "blobs.metrics.json").exists()


def test_plot(tmp_path, blobs_csv):
    out = tmp_path / "p.svg"
    assert main(["plot", str(blobs_csv), "--label-column", "label", "--out", str(out)]) == 0
    assert out.read_text().count("<circle") == 90


def test_benchmark_exit_codes(tmp_path):
    good = {"dataset": {"generator": "disk", "params": {"n_points": 40}}, "metrics": ["stress"], "n_iters": 2}
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps({"scenarios": [dict(good, name="ok")]}))
    assert main(["benchmark", str(suite), "--out", str(tmp_path / "b1")]) == 0
    suite.write_text(json.dumps({"scenarios": [dict(good, name="ok"), dict(good, name="bad", dimension=0)]}))
    assert main(["benchmark", str(suite), "--out", str(tmp_path / "b2")]) == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["embed", "--generator", "blobs", "--init", "umap"],
        ["embed", "--data", "does_not_exist.csv", "--metrics", "stress"],
        ["metrics", "missing.csv", "missing2.csv"],
        ["generate", "blobs", "--param", "n_points", "--out", "x.csv"],
        ["generate", "blobs", "--param", "bogus=1", "--out", "x.csv"],
        ["embed", "--generator", "blobs", "--metrics", "stress,foo"],
        [],
    ],
)
def test_invalid_input_exits_2(tmp_path, monkeypatch, argv):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 2


def test_internal_error_exits_3(tmp_path, monkeypatch, capsys):
    def boom(config):
        raise RuntimeError("unexpected")

    monkeypatch.setattr(cli, "run_pipeline", boom)
    assert main(["embed", "--generator", "disk", "--out", str(tmp_path / "o")]) == 3
    assert "internal error" in capsys.readouterr().err
