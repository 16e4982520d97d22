"""
Command-line entry point.

Exit codes: 0 success, 1 some benchmark scenarios failed, 2 invalid input or
configuration, 3 internal error.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

from .dataset import GENERATORS, load_csv, save_csv
from .errors import DimRedError, StageError
from .pipeline import (
    INIT_METHODS,
    METRIC_NAMES,
    PipelineConfig,
    compare_embeddings,
    dumps_metrics,
    flatten_metrics,
    run_benchmark_suite,
    run_pipeline,
    _read_labels,
)
from .plot import render_scatter_svg

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_INVALID = 2
EXIT_INTERNAL = 3

OVERRIDE_FLAGS = {
    "seed": "seed",
    "n_neighbors": "n_neighbors",
    "dimension": "dimension",
    "init": "init_method",
    "min_dist": "min_dist",
    "spread": "spread",
    "n_iters": "n_iters",
    "subsample": "subsample",
    "threads": "threads",
}


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _params(pairs):
    out = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise DimRedError(f"--param expects key=value, got {pair!r}")
        out[key] = _parse_value(value)
    return out


def _metric_list(text):
    names = [m.strip() for m in text.split(",") if m.strip()]
    unknown = sorted(set(names) - set(METRIC_NAMES))
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown metrics {unknown}; choose from {','.join(METRIC_NAMES)}")
    return names


def _add_overrides(p, with_out=True):
    p.add_argument("--config", type=Path, help="JSON config file; flags below override its fields")
    p.add_argument("--seed", type=int)
    if with_out:
        p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--n-neighbors", type=int)
    p.add_argument("--dimension", type=int)
    p.add_argument("--init", choices=INIT_METHODS)
    p.add_argument("--min-dist", type=float)
    p.add_argument("--spread", type=float)
    p.add_argument("--n-iters", type=int)
    p.add_argument("--subsample", type=int)
    p.add_argument("--threads", type=int)


def _overrides(args):
    out = {cfg: getattr(args, flag) for flag, cfg in OVERRIDE_FLAGS.items() if getattr(args, flag, None) is not None}
    if getattr(args, "out", None) is not None:
        out["output_dir"] = str(args.out)
    return out


def build_parser():
    parser = argparse.ArgumentParser(prog="dimred", description="Dimensionality reduction pipeline and embedding metrics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset to CSV")
    p.add_argument("generator", choices=sorted(GENERATORS))
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="generator parameter (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="CSV file to write")

    p = sub.add_parser("embed", help="run the full pipeline")
    _add_overrides(p)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--data", type=Path, help="input CSV (replaces the config dataset)")
    src.add_argument("--generator", choices=sorted(GENERATORS), help="built-in dataset (replaces the config dataset)")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="generator parameter (repeatable)")
    p.add_argument("--label-column", help="label column of --data (name or 0-based index)")
    p.add_argument("--metrics", type=_metric_list, help=f"comma-separated subset of {','.join(METRIC_NAMES)}")

    for name, helptext in (("metrics", "metrics for one embedding of a dataset"),
                           ("compare", "metrics for several embeddings of the same dataset")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("data", type=Path, help="high-dimensional data CSV")
        if name == "metrics":
            p.add_argument("embedding", type=Path, help="embedding CSV (same row order)")
            p.add_argument("--out", type=Path, help="metrics JSON file (default: stdout)")
        else:
            p.add_argument("embeddings", type=Path, nargs="+", help="embedding CSVs (same row order)")
            p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--labels", type=Path, help="CSV with a 'label' column, or integer labels in its first column")
        p.add_argument("--label-column", help="label column of the data CSV")
        p.add_argument("--metrics", type=_metric_list, default=list(METRIC_NAMES))
        p.add_argument("--n-neighbors", type=int, default=15)
        p.add_argument("--subsample", type=int, default=512)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("benchmark", help="run a suite of scenarios")
    p.add_argument("suite", type=Path, help="suite JSON file")
    _add_overrides(p)

    p = sub.add_parser("plot", help="SVG scatter plot of an embedding CSV")
    p.add_argument("embedding", type=Path)
    p.add_argument("--labels", type=Path, help="CSV with a 'label' column, or integer labels in its first column")
    p.add_argument("--label-column", help="label column of the embedding CSV itself")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--width", type=int, default=800)
    p.add_argument("--height", type=int, default=800)
    return parser


def cmd_generate(args):
    params = _params(args.param)
    params.setdefault("seed", args.seed)
    try:
        cloud = GENERATORS[args.generator](**params)
    except TypeError as exc:
        raise DimRedError(f"bad parameters for {args.generator}: {exc}") from exc
    save_csv(cloud, args.out)
    print(f"wrote {cloud.n} points ({cloud.d} dims) to {args.out}")
    return EXIT_OK


def cmd_embed(args):
    base = {}
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            try:
                base = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DimRedError(f"config {args.config} is not valid JSON: {exc}") from exc
    overrides = _overrides(args)
    if args.data is not None:
        overrides["dataset"] = {"csv": str(args.data)}
        if args.label_column is not None:
            overrides["dataset"]["label_column"] = args.label_column
    elif args.generator is not None:
        overrides["dataset"] = {"generator": args.generator, "params": _params(args.param)}
    if args.metrics is not None:
        overrides["metrics"] = args.metrics
    config = PipelineConfig.from_dict(base, overrides)
    artifacts = run_pipeline(config)
    for path in (artifacts.init_embedding_path, artifacts.layout_path, artifacts.metrics_path, artifacts.plot_path):
        print(path)
    return EXIT_OK


def _compare_one(args, embedding):
    return compare_embeddings(
        args.data, embedding, args.labels, args.metrics, args.n_neighbors, args.subsample, args.seed,
        args.label_column, args.threads,
    )


def cmd_metrics(args):
    text = dumps_metrics(_compare_one(args, args.embedding))
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8")
        print(args.out)
    return EXIT_OK


def cmd_compare(args):
    args.out.mkdir(parents=True, exist_ok=True)
    rows = []
    for emb in args.embeddings:
        report = _compare_one(args, emb)
        (args.out / f"{emb.stem}.metrics.json").write_text(dumps_metrics(report), encoding="utf-8")
        for metric, value in flatten_metrics(report):
            if metric.startswith(("config_echo.", "timing.")):
                continue
            rows.append((str(emb), metric, "" if value is None else f"{value:.17g}" if isinstance(value, float) else value))
    summary = args.out / "comparison.csv"
    with open(summary, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["embedding", "metric", "value"])
        writer.writerows(rows)
    print(summary)
    return EXIT_OK


def cmd_benchmark(args):
    out = args.out if args.out is not None else Path("bench_out")
    overrides = _overrides(args)
    overrides.pop("output_dir", None)
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            overrides = dict(json.load(fh), **overrides)
    summary, failures = run_benchmark_suite(args.suite, out, overrides)
    print(summary)
    if failures:
        print(f"{failures} scenario(s) failed; see the error column of {summary}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_plot(args):
    cloud = load_csv(args.embedding, args.label_column)
    labels = cloud.labels
    if args.labels is not None:
        labels = _read_labels(args.labels)
    render_scatter_svg(cloud, labels, args.out, args.width, args.height)
    print(args.out)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "embed": cmd_embed,
    "metrics": cmd_metrics,
    "compare": cmd_compare,
    "benchmark": cmd_benchmark,
    "plot": cmd_plot,
}


def _is_validation(exc):
    if isinstance(exc, StageError):
        exc = exc.cause
    return isinstance(exc, (DimRedError, FileNotFoundError, IsADirectoryError))


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad usage, which already is the validation code
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:  # noqa: BLE001  mapped to an exit code
        code = EXIT_INVALID if _is_validation(exc) else EXIT_INTERNAL
        label = "error" if code == EXIT_INVALID else "internal error"
        print(f"{label}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
