"""Config-driven command line: embed, cluster, baseline, eval, sweep, viz.

Each stage reads the shared YAML config (flags override individual keys),
writes its outputs atomically (temp file + rename) and drops a
``<output>.manifest.json`` next to its primary output recording the resolved
config, the dataset fingerprint, the provider tag and the wall time.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 provider error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import clustering, evaluation, viz
from .config import RunConfig, load_config
from .embedding import EmbeddingMatrix, embed_dataset, load_embeddings, save_embeddings
from .errors import ConfigError, DataError, DedupError, ProviderError
from .records import Dataset, dataset_fingerprint, load_csv

_EXIT_CODES = {ConfigError: 1, DataError: 2, ProviderError: 3}


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on usage errors; the contract here is 1."""

    def error(self, message: str):
        raise ConfigError(message)


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _atomic_write_with(path: Path, write_fn) -> None:
    """Run a file-writing function against a temp path, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    finally:
        tmp.unlink(missing_ok=True)


def _json_bytes(payload: dict) -> bytes:
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8")


def _write_manifest(
    primary_output: Path,
    *,
    stage: str,
    config: RunConfig,
    fingerprint: Optional[dict],
    provider_tag: Optional[str],
    outputs: dict[str, str],
    started: float,
) -> None:
    manifest = {
        "stage": stage,
        "config": config.to_dict(),
        "dataset_fingerprint": fingerprint,
        "provider_tag": provider_tag,
        "outputs": outputs,
        "wall_time_seconds": time.monotonic() - started,
    }
    _atomic_write(
        primary_output.with_name(primary_output.name + ".manifest.json"),
        _json_bytes(manifest),
    )


def _load_dataset(config: RunConfig) -> Dataset:
    return load_csv(
        config.dataset.path,
        id_column=config.dataset.id_column,
        truth_column=config.dataset.truth_column,
    )


def _check_embeddings_fresh(emb_path: Path, fingerprint: dict) -> None:
    """Compare the dataset hash against the manifest the embed stage left behind."""
    manifest_path = emb_path.with_name(emb_path.name + ".manifest.json")
    if not manifest_path.exists():
        return
    try:
        recorded = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"unreadable embeddings manifest {manifest_path}: {exc}") from exc
    stamped = (recorded.get("dataset_fingerprint") or {}).get("sha256")
    if stamped is not None and stamped != fingerprint["sha256"]:
        raise DataError(
            f"embeddings at {emb_path} were built from a different dataset "
            f"(fingerprint {stamped[:12]}... != {fingerprint['sha256'][:12]}...)"
        )


def _load_matrix(config: RunConfig, fingerprint: dict) -> EmbeddingMatrix:
    emb_path = config.resolved_embeddings_path()
    matrix = load_embeddings(emb_path)
    _check_embeddings_fresh(emb_path, fingerprint)
    return matrix


def cmd_embed(config: RunConfig) -> int:
    started = time.monotonic()
    dataset = _load_dataset(config)
    provider = config.provider.build()
    matrix = embed_dataset(dataset, config.match_sentence, provider)
    out_path = config.resolved_embeddings_path()
    _atomic_write_with(out_path, lambda tmp: save_embeddings(matrix, tmp))
    fingerprint = dataset_fingerprint(dataset)
    _write_manifest(
        out_path,
        stage="embed",
        config=config,
        fingerprint=fingerprint,
        provider_tag=matrix.provider_tag,
        outputs={"embeddings": str(out_path)},
        started=started,
    )
    print(f"embedded {len(matrix)} records (dim {matrix.dim}) -> {out_path}")
    return 0


def cmd_cluster(config: RunConfig) -> int:
    started = time.monotonic()
    if config.epsilon is None:
        raise ConfigError("cluster needs an epsilon (config key 'epsilon' or --epsilon)")
    dataset = _load_dataset(config)
    fingerprint = dataset_fingerprint(dataset)
    matrix = _load_matrix(config, fingerprint)
    params = clustering.ClusterParams(
        metric=config.metric,
        epsilon=config.epsilon,
        block_columns=config.block_columns,
    )
    assignment = clustering.cluster(
        matrix,
        dataset,
        params,
        sentence_spec=config.match_sentence,
        workers=config.workers,
    )
    stats = clustering.group_stats(assignment)
    out_dir = Path(config.output_dir)
    assignment_path = out_dir / "assignment.csv"
    stats_path = out_dir / "group_stats.json"
    _atomic_write_with(
        assignment_path, lambda tmp: clustering.save_assignment_csv(assignment, tmp)
    )
    _atomic_write(
        stats_path,
        _json_bytes(
            {
                "max_group_size": stats.max_group_size,
                "num_match_groups": stats.num_match_groups,
                "epsilon": config.epsilon,
                "metric": config.metric,
            }
        ),
    )
    _write_manifest(
        assignment_path,
        stage="cluster",
        config=config,
        fingerprint=fingerprint,
        provider_tag=matrix.provider_tag,
        outputs={"assignment": str(assignment_path), "group_stats": str(stats_path)},
        started=started,
    )
    print(
        f"clustered {len(dataset)} records at epsilon={config.epsilon:g} ({config.metric}): "
        f"{stats.num_match_groups} groups, max size {stats.max_group_size}"
    )
    return 0


def cmd_baseline(config: RunConfig) -> int:
    started = time.monotonic()
    if config.baseline is None:
        raise ConfigError("baseline needs a 'baseline' config section")
    dataset = _load_dataset(config)
    from .baseline import run_baseline

    assignment = run_baseline(dataset, config.baseline)
    stats = clustering.group_stats(assignment)
    out_path = Path(config.output_dir) / "baseline_assignment.csv"
    _atomic_write_with(out_path, lambda tmp: clustering.save_assignment_csv(assignment, tmp))
    _write_manifest(
        out_path,
        stage="baseline",
        config=config,
        fingerprint=dataset_fingerprint(dataset),
        provider_tag=None,
        outputs={"assignment": str(out_path)},
        started=started,
    )
    print(
        f"baseline matched {len(dataset)} records: "
        f"{stats.num_match_groups} groups, max size {stats.max_group_size}"
    )
    return 0


def cmd_eval(config: RunConfig, assignment_path: Optional[str], method: str) -> int:
    started = time.monotonic()
    dataset = _load_dataset(config)
    if config.dataset.truth_column is None:
        raise ConfigError("eval needs dataset.truth_column for ground truth")
    path = Path(assignment_path) if assignment_path else Path(config.output_dir) / "assignment.csv"
    assignment = clustering.load_assignment_csv(path)
    metrics = evaluation.pair_metrics(assignment, dataset)
    rows = [evaluation.ReportRow(method=method, epsilon=config.epsilon, metrics=metrics)]
    fingerprint = dataset_fingerprint(dataset)
    payload = evaluation.machine_report(
        rows,
        dataset_fingerprint=fingerprint,
        provider_tag=None,
        params={"metric": config.metric, "block_columns": list(config.block_columns)},
    )
    out_dir = Path(config.output_dir)
    metrics_path = out_dir / "metrics.json"
    report_path = out_dir / "report.txt"
    _atomic_write(metrics_path, _json_bytes(payload))
    _atomic_write(report_path, evaluation.render_report(rows).encode("utf-8"))
    _write_manifest(
        metrics_path,
        stage="eval",
        config=config,
        fingerprint=fingerprint,
        provider_tag=None,
        outputs={"metrics": str(metrics_path), "report": str(report_path)},
        started=started,
    )
    print(evaluation.render_report(rows), end="")
    return 0


def cmd_sweep(config: RunConfig) -> int:
    started = time.monotonic()
    if not config.epsilons:
        raise ConfigError("sweep needs an 'epsilons' list (config key or --epsilons)")
    dataset = _load_dataset(config)
    if config.dataset.truth_column is None:
        raise ConfigError("sweep needs dataset.truth_column for ground truth")
    fingerprint = dataset_fingerprint(dataset)
    matrix = _load_matrix(config, fingerprint)
    sweep = evaluation.epsilon_sweep(
        matrix,
        dataset,
        config.metric,
        list(config.epsilons),
        config.block_columns,
        sentence_spec=config.match_sentence,
        workers=config.workers,
    )
    rows = [
        evaluation.ReportRow(method="embedding", epsilon=eps, metrics=m)
        for eps, m in sweep.rows
    ]
    payload = evaluation.machine_report(
        rows,
        dataset_fingerprint=fingerprint,
        provider_tag=matrix.provider_tag,
        params={"metric": config.metric, "block_columns": list(config.block_columns)},
    )
    out_dir = Path(config.output_dir)
    curve_path = out_dir / "sweep.csv"
    metrics_path = out_dir / "sweep_metrics.json"
    report_path = out_dir / "sweep_report.txt"
    _atomic_write_with(curve_path, lambda tmp: viz.export_sweep_curve(sweep, tmp))
    _atomic_write(metrics_path, _json_bytes(payload))
    _atomic_write(report_path, evaluation.render_report(rows).encode("utf-8"))
    _write_manifest(
        curve_path,
        stage="sweep",
        config=config,
        fingerprint=fingerprint,
        provider_tag=matrix.provider_tag,
        outputs={
            "curve": str(curve_path),
            "metrics": str(metrics_path),
            "report": str(report_path),
        },
        started=started,
    )
    print(evaluation.render_report(rows), end="")
    return 0


def cmd_viz(config: RunConfig) -> int:
    started = time.monotonic()
    dataset = _load_dataset(config)
    fingerprint = dataset_fingerprint(dataset)
    matrix = _load_matrix(config, fingerprint)
    endpoint = config.viz.endpoint or config.provider.endpoint
    points = viz.project_2d(
        matrix,
        method=config.viz.method,
        endpoint=endpoint,
        n_neighbors=config.viz.n_neighbors,
    )
    out_path = Path(config.output_dir) / "projection.csv"
    _atomic_write_with(out_path, lambda tmp: viz.export_projection_csv(points, tmp))
    _write_manifest(
        out_path,
        stage="viz",
        config=config,
        fingerprint=fingerprint,
        provider_tag=matrix.provider_tag,
        outputs={"projection": str(out_path)},
        started=started,
    )
    print(f"projected {len(points)} records -> {out_path}")
    return 0


def _apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    updates: dict = {}
    if getattr(args, "dataset", None):
        updates["dataset"] = replace(config.dataset, path=args.dataset)
    if getattr(args, "output_dir", None):
        updates["output_dir"] = args.output_dir
    if getattr(args, "epsilon", None) is not None:
        updates["epsilon"] = args.epsilon
    if getattr(args, "epsilons", None):
        try:
            updates["epsilons"] = tuple(float(x) for x in args.epsilons.split(","))
        except ValueError:
            raise ConfigError(f"--epsilons must be comma-separated numbers, got {args.epsilons!r}")
    if getattr(args, "metric", None):
        updates["metric"] = args.metric
    if getattr(args, "workers", None) is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        updates["workers"] = args.workers
    if getattr(args, "embeddings", None):
        updates["embeddings_path"] = args.embeddings
    return replace(config, **updates) if updates else config


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dedupkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("-c", "--config", required=True, help="YAML run config")
        p.add_argument("--dataset", help="override dataset.path")
        p.add_argument("--output-dir", help="override output_dir")
        p.add_argument("--metric", choices=("l2", "cosine"), help="override metric")
        p.add_argument("--epsilon", type=float, help="override epsilon")
        p.add_argument("--epsilons", help="override epsilons (comma separated)")
        p.add_argument("--workers", type=int, help="override worker count")
        p.add_argument("--embeddings", help="override embeddings_path")
        return p

    add("embed", "embed every record's match sentence and write the vector file")
    add("cluster", "build match groups from an embedding file")
    add("baseline", "run the blocking + Levenshtein baseline")
    eval_p = add("eval", "score an assignment CSV against ground truth")
    eval_p.add_argument("--assignment", help="assignment CSV to score")
    eval_p.add_argument("--method", default="embedding", help="method label for the report")
    add("sweep", "evaluate a list of epsilons in one pass")
    add("viz", "export a 2-D projection with nearest-neighbor distances")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _apply_overrides(load_config(args.config), args)
        if args.command == "embed":
            return cmd_embed(config)
        if args.command == "cluster":
            return cmd_cluster(config)
        if args.command == "baseline":
            return cmd_baseline(config)
        if args.command == "eval":
            return cmd_eval(config, args.assignment, args.method)
        if args.command == "sweep":
            return cmd_sweep(config)
        if args.command == "viz":
            return cmd_viz(config)
        raise ConfigError(f"unknown command {args.command!r}")
    except DedupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for err_type, code in _EXIT_CODES.items():
            if isinstance(exc, err_type):
                return code
        return 1


if __name__ == "__main__":
    sys.exit(main())
