"""
Config-driven pipeline runs, metric reports for external embeddings, and
benchmark suites.

A run goes through the stages ingest -> knn -> init -> layout -> metrics in
that order and writes ``init_embedding.csv`` (+ ``.json`` sidecar),
``layout.csv`` (+ sidecar), ``metrics.json`` and ``plot.svg`` into its output
directory. Everything except the ``timing`` block of the metrics file is a
function of the config alone.
"""

import csv
import json
import math
import time
import traceback
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .dataset import GENERATORS, PointCloud, load_csv, make_rng, standardize
from .embedding import (
    distortion_stats,
    pca_embedding,
    pca_info_dict,
    random_projection,
    save_embedding,
    spectral_embedding,
)
from .errors import (
    ConfigInvalid,
    DimRedError,
    RowCountMismatch,
    StageError,
    SuiteConfigInvalid,
    UnlabeledData,
)
from .knn import build_knn, symmetrize
from .layout import LayoutParams, do_layout, fit_kernel
from .metrics import context_loss, embedding_stress, neighborhood_preservation
from .persistence import global_structure_report
from .plot import render_scatter_svg

METRIC_NAMES = ("stress", "neighborhood", "context", "global")
INIT_METHODS = ("random", "pca", "spectral")
STAGES = ("ingest", "knn", "init", "layout", "metrics")
DISTORTION_PAIRS = 10000


@dataclass
class PipelineConfig:
    dataset: dict
    n_neighbors: int = 15
    dimension: int = 2
    init_method: str = "random"
    min_dist: float = 0.1
    spread: float = 1.0
    n_iters: int = 128
    seed: int = 0
    metrics: list = field(default_factory=lambda: list(METRIC_NAMES))
    subsample: int = 512
    output_dir: str = "out"
    learning_rate: float = 1.0
    neg_samples_per_point: int = 5
    threads: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        _check_dataset(self.dataset)
        for name in ("n_neighbors", "dimension", "n_iters", "seed", "subsample", "neg_samples_per_point", "threads"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigInvalid(f"{name} must be an integer, got {value!r}")
        if self.dimension < 1:
            raise ConfigInvalid("dimension must be >= 1")
        if self.n_neighbors < 1:
            raise ConfigInvalid("n_neighbors must be >= 1")
        if self.n_iters < 0:
            raise ConfigInvalid("n_iters must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigInvalid("seed must be an unsigned 64-bit integer")
        if self.threads < 1 or self.neg_samples_per_point < 1:
            raise ConfigInvalid("threads and neg_samples_per_point must be >= 1")
        for name in ("min_dist", "spread", "learning_rate"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0 or not math.isfinite(value):
                raise ConfigInvalid(f"{name} must be a positive number, got {value!r}")
        if self.init_method not in INIT_METHODS:
            raise ConfigInvalid(f"init_method must be one of {INIT_METHODS}, got {self.init_method!r}")
        if isinstance(self.metrics, str) or not all(isinstance(m, str) for m in self.metrics):
            raise ConfigInvalid("metrics must be a list of metric names")
        unknown = sorted(set(self.metrics) - set(METRIC_NAMES))
        if unknown:
            raise ConfigInvalid(f"unknown metric names {unknown}; choose from {list(METRIC_NAMES)}")
        # canonical order so the echo does not depend on how the list was written
        self.metrics = [m for m in METRIC_NAMES if m in self.metrics]

    @classmethod
    def from_dict(cls, data, overrides=None):
        """Build from a parsed JSON object; ``overrides`` (None values ignored) win over ``data``."""
        if not isinstance(data, dict):
            raise ConfigInvalid("config must be a JSON object")
        merged = dict(data)
        merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(merged) - known)
        if unknown:
            raise ConfigInvalid(f"unknown config fields {unknown}")
        if "dataset" not in merged:
            raise ConfigInvalid("config needs a 'dataset' entry")
        return cls(**merged)

    @classmethod
    def from_json(cls, path, overrides=None):
        return cls.from_dict(_read_json(path, ConfigInvalid), overrides)

    def echo(self):
        """Every field that influences results; ``output_dir`` and ``threads`` are left out."""
        out = asdict(self)
        del out["output_dir"]
        del out["threads"]
        return out


def _read_json(path, error):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise error(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise error(f"config {path} is not valid JSON: {exc}") from exc


def _check_dataset(spec):
    if not isinstance(spec, dict):
        raise ConfigInvalid("dataset must be an object with either 'generator' or 'csv'")
    if ("generator" in spec) == ("csv" in spec):
        raise ConfigInvalid("dataset needs exactly one of 'generator' or 'csv'")
    allowed = {"generator", "params"} if "generator" in spec else {"csv", "label_column", "delimiter"}
    allowed |= {"standardize", "max_points"}
    extra = sorted(set(spec) - allowed)
    if extra:
        raise ConfigInvalid(f"unknown dataset fields {extra}")
    if "generator" in spec:
        if spec["generator"] not in GENERATORS:
            raise ConfigInvalid(f"unknown generator {spec['generator']!r}; choose from {sorted(GENERATORS)}")
        if not isinstance(spec.get("params", {}), dict):
            raise ConfigInvalid("dataset params must be an object")
    max_points = spec.get("max_points")
    if max_points is not None and (not isinstance(max_points, int) or max_points < 2):
        raise ConfigInvalid("max_points must be an integer >= 2")


def load_dataset(spec, seed=0) -> PointCloud:
    """
    Resolve a dataset spec.

    ``{"generator": name, "params": {...}}`` calls a built-in generator (its
    seed defaults to the run seed); ``{"csv": path, "label_column": ...}``
    reads a file. Optional keys: ``standardize`` (bool) and ``max_points``,
    which keeps a seeded uniform subset of rows in their original order.
    """
    _check_dataset(spec)
    if "generator" in spec:
        params = dict(spec.get("params", {}))
        params.setdefault("seed", seed)
        try:
            cloud = GENERATORS[spec["generator"]](**params)
        except TypeError as exc:
            raise ConfigInvalid(f"bad parameters for generator {spec['generator']!r}: {exc}") from exc
    else:
        cloud = load_csv(spec["csv"], spec.get("label_column"), spec.get("delimiter", ","))
    max_points = spec.get("max_points")
    if max_points is not None and max_points < cloud.n:
        idx = np.sort(make_rng(seed).choice(cloud.n, size=max_points, replace=False))
        cloud = cloud.subset(idx)
    if spec.get("standardize", False):
        cloud = standardize(cloud)
    return cloud


@dataclass
class RunArtifacts:
    init_embedding_path: Path
    layout_path: Path
    metrics_path: Path
    plot_path: Path
    timing: dict
    metrics: dict


class _Stages:
    """Times stages and attributes failures to the stage that raised them."""

    def __init__(self):
        self.timing = {}

    def run(self, name, fn, *args, **kwargs):
        start = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        except Exception as exc:
            raise StageError(name, exc) from exc
        finally:
            self.timing[name] = self.timing.get(name, 0.0) + time.perf_counter() - start


def _finite_or_none(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def compute_metrics(cloud, embedding, graph, selected, k, subsample, seed, stages=None):
    """Metric blocks for ``selected`` names; unselected blocks are ``None``."""
    stages = stages or _Stages()
    out = {name: None for name in METRIC_NAMES}
    if "stress" in selected:
        out["stress"] = stages.run("metrics", embedding_stress, cloud, embedding, graph).to_dict()
    if "neighborhood" in selected:
        out["neighborhood"] = stages.run("metrics", neighborhood_preservation, cloud, embedding, k).to_dict()
    if "context" in selected:
        report = stages.run("metrics", context_loss, cloud, embedding, seed=seed).to_dict()
        out["context"] = {key: _finite_or_none(v) for key, v in report.items()}
    if "global" in selected:
        out["global"] = stages.run("metrics", global_structure_report, cloud, embedding, subsample, seed=seed).to_dict()
    return out


def _require_labels(cloud, selected):
    if "context" in selected and cloud.labels is None:
        raise UnlabeledData("the context metric needs labeled data")


def run_pipeline(config: PipelineConfig) -> RunArtifacts:
    """Run every stage for ``config`` and write the four artifacts into ``config.output_dir``."""
    config.validate()
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stages = _Stages()
    seed = config.seed

    cloud = stages.run("ingest", load_dataset, config.dataset, seed)
    stages.run("ingest", _require_labels, cloud, config.metrics)
    graph = stages.run("knn", build_knn, cloud, config.n_neighbors, threads=config.threads)

    def initial():
        if config.init_method == "random":
            return random_projection(cloud, config.dimension, seed), {}
        if config.init_method == "pca":
            emb, info = pca_embedding(cloud, config.dimension)
            return emb, {"pca": pca_info_dict(info)}
        return spectral_embedding(cloud, graph, config.dimension), {}

    init, init_extra = stages.run("init", initial)

    def layout():
        params = LayoutParams(
            n_iters=config.n_iters,
            learning_rate_initial=config.learning_rate,
            neg_samples_per_point=config.neg_samples_per_point,
            kernel=fit_kernel(config.min_dist, config.spread),
            seed=seed,
        )
        return do_layout(init, symmetrize(graph), params)

    emb = stages.run("layout", layout)

    metrics = compute_metrics(cloud, emb, graph, config.metrics, config.n_neighbors, config.subsample, seed, stages)
    metrics["distortion"] = {
        "init": stages.run("metrics", _distortion, cloud, init, seed),
        "layout": stages.run("metrics", _distortion, cloud, emb, seed),
    }
    metrics["config_echo"] = config.echo()

    paths = {
        "init": out_dir / "init_embedding.csv",
        "layout": out_dir / "layout.csv",
        "metrics": out_dir / "metrics.json",
        "plot": out_dir / "plot.svg",
    }
    save_embedding(init, paths["init"], init_extra)
    save_embedding(emb, paths["layout"])
    if emb.dim >= 2:
        render_scatter_svg(emb, cloud.labels, paths["plot"])
    else:
        # a 1-D layout is drawn against the point index
        render_scatter_svg(np.column_stack([emb.coords[:, 0], np.arange(emb.n)]), cloud.labels, paths["plot"])
    metrics["timing"] = {name: stages.timing.get(name, 0.0) for name in STAGES}
    metrics["timing"]["total"] = sum(metrics["timing"].values())
    write_metrics(metrics, paths["metrics"])
    return RunArtifacts(paths["init"], paths["layout"], paths["metrics"], paths["plot"], metrics["timing"], metrics)


def _distortion(cloud, emb, seed):
    if cloud.n < 2:
        return None
    try:
        return distortion_stats(cloud, emb, DISTORTION_PAIRS, seed).to_dict()
    except DimRedError:
        return None


def metrics_schema():
    return json.loads(resources.files("dimred").joinpath("schemas/metrics.schema.json").read_text(encoding="utf-8"))


def validate_metrics(metrics):
    """Raise ``jsonschema.ValidationError`` when ``metrics`` does not follow the shipped schema."""
    jsonschema.validate(metrics, metrics_schema())


def dumps_metrics(metrics):
    return json.dumps(metrics, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_metrics(metrics, path):
    validate_metrics(metrics)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_metrics(metrics))


def _read_labels(path):
    """Integer labels from a column named ``label`` if the file has one, else from its first column."""
    try:
        with open(path, encoding="utf-8") as fh:
            header = [cell.strip() for cell in fh.readline().split(",")]
    except FileNotFoundError:
        header = []
    cloud = load_csv(path, "label" if "label" in header else None)
    if cloud.labels is not None:
        return cloud.labels
    values = cloud.coords[:, 0]
    if not np.all(values == np.round(values)):
        raise ConfigInvalid(f"labels file {path} must hold integer labels in its first column")
    return values.astype(np.int64)


def compare_embeddings(
    x_csv, y_csv, labels_csv=None, metrics=METRIC_NAMES, k=15, subsample=512, seed=0, label_column=None, threads=1
):
    """
    Metrics treating ``x_csv`` as the data and ``y_csv`` as its embedding.

    Labels come from ``labels_csv`` (first column) or from ``label_column``
    of ``x_csv``. No pipeline stage is run; ``init`` distortion is omitted.
    """
    unknown = sorted(set(metrics) - set(METRIC_NAMES))
    if unknown:
        raise ConfigInvalid(f"unknown metric names {unknown}; choose from {list(METRIC_NAMES)}")
    selected = [m for m in METRIC_NAMES if m in metrics]
    stages = _Stages()
    x = stages.run("ingest", load_csv, x_csv, label_column)
    y = stages.run("ingest", load_csv, y_csv)
    if x.n != y.n:
        raise RowCountMismatch(f"{x_csv} has {x.n} rows, {y_csv} has {y.n}")
    if labels_csv is not None:
        labels = _read_labels(labels_csv)
        if len(labels) != x.n:
            raise RowCountMismatch(f"{labels_csv} has {len(labels)} rows, {x_csv} has {x.n}")
        x = PointCloud(x.coords, labels, x.name)
    _require_labels(x, selected)
    graph = stages.run("knn", build_knn, x, k, threads=threads)
    out = compute_metrics(x, y, graph, selected, k, subsample, seed, stages)
    out["distortion"] = {"init": None, "layout": stages.run("metrics", _distortion, x, y, seed)}
    out["config_echo"] = {
        "x_csv": str(x_csv),
        "y_csv": str(y_csv),
        "labels_csv": None if labels_csv is None else str(labels_csv),
        "label_column": label_column,
        "metrics": selected,
        "n_neighbors": k,
        "subsample": subsample,
        "seed": seed,
    }
    out["timing"] = {name: stages.timing.get(name, 0.0) for name in STAGES}
    out["timing"]["total"] = sum(out["timing"].values())
    validate_metrics(out)
    return out


def flatten_metrics(metrics, prefix=""):
    """``{"a": {"b": 1}}`` -> ``[("a.b", 1)]``, sorted by key; lists are skipped."""
    rows = []
    for key in sorted(metrics):
        value = metrics[key]
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            rows.extend(flatten_metrics(value, name + "."))
        elif value is None or isinstance(value, (bool, int, float)):
            rows.append((name, value))
    return rows


SUMMARY_FIELDS = ("scenario", "metric", "value", "status", "error")


def load_suite(path):
    """
    Read a suite file: ``{"scenarios": [{"name": ..., <config fields>}, ...],
    "defaults": {<config fields>}}``. Each scenario writes into
    ``<output_dir>/<name>``.
    """
    data = _read_json(path, SuiteConfigInvalid)
    if not isinstance(data, dict) or not isinstance(data.get("scenarios"), list):
        raise SuiteConfigInvalid("suite must be an object with a 'scenarios' list")
    extra = sorted(set(data) - {"scenarios", "defaults"})
    if extra:
        raise SuiteConfigInvalid(f"unknown suite fields {extra}")
    if not data["scenarios"]:
        raise SuiteConfigInvalid("suite has no scenarios")
    defaults = data.get("defaults", {})
    if not isinstance(defaults, dict):
        raise SuiteConfigInvalid("suite defaults must be an object")
    names = set()
    scenarios = []
    for entry in data["scenarios"]:
        if not isinstance(entry, dict) or not isinstance(entry.get("name"), str) or not entry["name"]:
            raise SuiteConfigInvalid("every scenario needs a non-empty 'name'")
        if entry["name"] in names:
            raise SuiteConfigInvalid(f"duplicate scenario name {entry['name']!r}")
        names.add(entry["name"])
        body = dict(defaults)
        body.update({k: v for k, v in entry.items() if k != "name"})
        scenarios.append((entry["name"], body))
    return scenarios


def run_benchmark_suite(suite_config, output_dir, overrides=None):
    """
    Run every scenario of a suite and write ``summary.csv`` into ``output_dir``.

    A scenario that fails (bad config, unreadable data, stage error) gets a
    single ``error`` row and the suite carries on. Returns the summary path
    and the number of failed scenarios.
    """
    scenarios = load_suite(suite_config)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    failures = 0
    for name, body in scenarios:
        try:
            body = dict(body, output_dir=str(output_dir / name))
            config = PipelineConfig.from_dict(body, overrides)
            artifacts = run_pipeline(config)
        except Exception as exc:  # noqa: BLE001  a failing scenario must not stop the suite
            failures += 1
            rows.append({"scenario": name, "metric": "", "value": "", "status": "error", "error": _error_text(exc)})
            continue
        for metric, value in flatten_metrics(artifacts.metrics):
            if metric.startswith("config_echo."):
                continue
            rows.append({"scenario": name, "metric": metric, "value": _csv_value(value), "status": "ok", "error": ""})
    summary = output_dir / "summary.csv"
    with open(summary, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return summary, failures


def _csv_value(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _error_text(exc):
    if isinstance(exc, (DimRedError, StageError)):
        return f"{type(exc).__name__}: {exc}"
    return "".join(traceback.format_exception_only(type(exc), exc)).strip()


def config_with(config: PipelineConfig, **changes) -> PipelineConfig:
    """Copy of ``config`` with some fields replaced (re-validated)."""
    return replace(config, **changes)
