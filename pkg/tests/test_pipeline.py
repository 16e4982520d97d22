import csv
import json
from pathlib import Path

import numpy as np
import pytest

from dimred.dataset import generate_blobs, save_csv
from dimred.errors import ConfigInvalid, RowCountMismatch, StageError, SuiteConfigInvalid, UnlabeledData
from dimred.pipeline import (
    PipelineConfig,
    compare_embeddings,
    metrics_schema,
    run_benchmark_suite,
    run_pipeline,
    validate_metrics,
)

SMALL = {"generator": "blobs", "params": {"n_points": 150, "n_blobs": 3, "dim": 5}}


def config(tmp_path, name="run", **kw):
    base = dict(dataset=SMALL, n_iters=20, subsample=64, output_dir=str(tmp_path / name))
    base.update(kw)
    return PipelineConfig(**base)


def without_timing(path):
    data = json.loads(Path(path).read_text())
    data.pop("timing")
    return data


def test_run_writes_artifacts(tmp_path):
    art = run_pipeline(config(tmp_path))
    for p in (art.init_embedding_path, art.layout_path, art.metrics_path, art.plot_path):
        assert p.exists() and p.stat().st_size > 0
    metrics = json.loads(art.metrics_path.read_text())
    validate_metrics(metrics)
    assert set(metrics["timing"]) == {"ingest", "knn", "init", "layout", "metrics", "total"}
    assert metrics["config_echo"]["seed"] == 0 and "output_dir" not in metrics["config_echo"]
    assert metrics["distortion"]["init"]["n_pairs"] > 0
    assert all(metrics[k] is not None for k in ("stress", "neighborhood", "context", "global"))


def test_zero_iterations_copies_init(tmp_path):
    art = run_pipeline(config(tmp_path, n_iters=0, init_method="pca"))
    assert art.layout_path.read_bytes() == art.init_embedding_path.read_bytes()


@pytest.mark.filterwarnings("ignore::dimred.errors.DisconnectedGraphWarning")
@pytest.mark.parametrize("init", ["random", "pca", "spectral"])
def test_runs_are_deterministic(tmp_path, init):
    a = run_pipeline(config(tmp_path, "a", init_method=init))
    b = run_pipeline(config(tmp_path, "b", init_method=init))
    assert without_timing(a.metrics_path) == without_timing(b.metrics_path)
    for name in ("init_embedding.csv", "layout.csv", "plot.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_metric_subset_and_one_dimensional_layout(tmp_path):
    art = run_pipeline(config(tmp_path, dimension=1, metrics=["global", "stress"]))
    m = art.metrics
    assert m["neighborhood"] is None and m["context"] is None
    assert m["config_echo"]["metrics"] == ["stress", "global"]
    assert art.plot_path.read_text().count("<circle") == 150


def test_config_validation(tmp_path):
    with pytest.raises(ConfigInvalid):
        config(tmp_path, init_method="tsne")
    with pytest.raises(ConfigInvalid):
        config(tmp_path, metrics=["stress", "nope"])
    with pytest.raises(ConfigInvalid):
        config(tmp_path, n_neighbors=0)
    with pytest.raises(ConfigInvalid):
        PipelineConfig.from_dict({"dataset": SMALL, "colour": "red"})
    with pytest.raises(ConfigInvalid):
        PipelineConfig.from_dict({"n_iters": 3})
    cfg = PipelineConfig.from_dict({"dataset": SMALL, "seed": 1}, {"seed": 4, "n_iters": None})
    assert cfg.seed == 4 and cfg.n_iters == 128


def test_unlabeled_context_fails_in_ingest(tmp_path):
    cloud = generate_blobs(50, 2, 3)
    path = tmp_path / "plain.csv"
    save_csv(type(cloud)(cloud.coords), path)
    with pytest.raises(StageError) as info:
        run_pipeline(config(tmp_path, dataset={"csv": str(path)}))
    assert info.value.stage == "ingest" and isinstance(info.value.cause, UnlabeledData)


def test_schema_copies_match():
    docs = Path(__file__).resolve().parents[1] / "docs" / "metrics.schema.json"
    assert json.loads(docs.read_text()) == metrics_schema()


def test_schema_rejects_extra_keys(tmp_path):
    m = run_pipeline(config(tmp_path, n_iters=0)).metrics
    bad = dict(m, surprise=1)
    with pytest.raises(Exception):
        validate_metrics(bad)


def test_compare_identity(tmp_path):
    cloud = generate_blobs(120, 3, 4, seed=2)
    data = tmp_path / "data.csv"
    save_csv(cloud, data)
    emb = tmp_path / "emb.csv"
    save_csv(type(cloud)(cloud.coords), emb)
    m = compare_embeddings(data, emb, label_column="label", k=10, subsample=50)
    assert m["stress"]["sigma"] == 0.0
    assert m["neighborhood"]["mean"] == 1.0
    assert m["context"]["kappa_svm"] == 0.0 and m["context"]["kappa_knn"] == 0.0
    assert all(v == 0.0 for v in m["global"]["dim0"].values())
    assert m["distortion"]["init"] is None and m["distortion"]["layout"]["mean"] == pytest.approx(1.0)


def test_compare_row_mismatch(tmp_path):
    cloud = generate_blobs(40, 2, 3)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    save_csv(cloud, a)
    save_csv(type(cloud)(cloud.coords[:30]), b)
    with pytest.raises(RowCountMismatch):
        compare_embeddings(a, b, metrics=["stress"], label_column="label")


def write_suite(path, scenarios, defaults=None):
    body = {"scenarios": scenarios}
    if defaults is not None:
        body["defaults"] = defaults
    path.write_text(json.dumps(body))
    return path


def test_suite_partial_failure(tmp_path):
    suite = write_suite(
        tmp_path / "suite.json",
        [{"name": "good"}, {"name": "bad", "init_method": "nope"}, {"name": "missing", "dataset": {"csv": "nowhere.csv"}}],
        {"dataset": SMALL, "n_iters": 5, "subsample": 32, "metrics": ["stress"]},
    )
    summary, failures = run_benchmark_suite(suite, tmp_path / "bench")
    assert failures == 2
    with open(summary, newline="") as fh:
        rows = list(csv.DictReader(fh))
    status = {r["scenario"]: r["status"] for r in rows}
    assert status == {"good": "ok", "bad": "error", "missing": "error"}
    assert any(r["metric"] == "stress.sigma" for r in rows if r["scenario"] == "good")
    assert (tmp_path / "bench" / "good" / "metrics.json").exists()


def test_suite_validation(tmp_path):
    with pytest.raises(SuiteConfigInvalid):
        run_benchmark_suite(write_suite(tmp_path / "e.json", []), tmp_path / "o")
    with pytest.raises(SuiteConfigInvalid):
        run_benchmark_suite(write_suite(tmp_path / "d.json", [{"name": "x"}, {"name": "x"}]), tmp_path / "o")
    with pytest.raises(SuiteConfigInvalid):
        run_benchmark_suite(tmp_path / "absent.json", tmp_path / "o")


def test_suite_summary_is_deterministic(tmp_path):
    suite = write_suite(tmp_path / "s.json", [{"name": "a"}], {"dataset": SMALL, "n_iters": 5, "subsample": 32})
    s1, _ = run_benchmark_suite(suite, tmp_path / "o1")
    s2, _ = run_benchmark_suite(suite, tmp_path / "o2")

    def strip(path):
        return [r for r in csv.DictReader(open(path, newline="")) if not r["metric"].startswith("timing.")]

    assert strip(s1) == strip(s2)
