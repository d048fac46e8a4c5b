"""Run configuration: one YAML document drives every pipeline stage.

Unknown keys are rejected everywhere so typos fail fast, and the resolved
configuration is snapshotted into each stage's manifest for reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import yaml

from .baseline import BaselineParams
from .embedding import EmbeddingProvider, FileProvider, HttpProvider, MockProvider
from .errors import ConfigError, DataError
from .metrics import METRICS
from .records import MatchSentenceSpec

__all__ = ["RunConfig", "load_config"]


def _check_keys(section: str, mapping: dict, allowed: set[str]) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {sorted(unknown)}")


def _mapping(section: str, obj: Any) -> dict:
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise ConfigError(f"{section} must be a mapping, got {type(obj).__name__}")
    return obj


def _str_list(section: str, obj: Any) -> list[str]:
    if not isinstance(obj, list) or not all(isinstance(x, str) for x in obj):
        raise ConfigError(f"{section} must be a list of strings")
    return obj


@dataclass(frozen=True)
class DatasetConfig:
    path: str
    id_column: Optional[str] = None
    truth_column: Optional[str] = None

    @staticmethod
    def from_dict(obj: Any) -> "DatasetConfig":
        d = _mapping("dataset", obj)
        _check_keys("dataset", d, {"path", "id_column", "truth_column"})
        if "path" not in d or not isinstance(d["path"], str):
            raise ConfigError("dataset.path is required and must be a string")
        return DatasetConfig(
            path=d["path"],
            id_column=d.get("id_column"),
            truth_column=d.get("truth_column"),
        )


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "mock"
    dim: int = 32
    seed: int = 0
    path: Optional[str] = None
    endpoint: Optional[str] = None
    normalize: bool = True
    batch_size: int = 256
    max_in_flight: int = 4
    timeout: float = 60.0

    @staticmethod
    def from_dict(obj: Any) -> "ProviderConfig":
        d = _mapping("provider", obj)
        _check_keys(
            "provider",
            d,
            {
                "kind",
                "dim",
                "seed",
                "path",
                "endpoint",
                "normalize",
                "batch_size",
                "max_in_flight",
                "timeout",
            },
        )
        kind = d.get("kind", "mock")
        if kind not in ("mock", "file", "http"):
            raise ConfigError(f"provider.kind must be mock, file or http, got {kind!r}")
        if kind == "file" and not d.get("path"):
            raise ConfigError("provider.path is required for the file provider")
        if kind == "http" and not d.get("endpoint"):
            raise ConfigError("provider.endpoint is required for the http provider")
        return ProviderConfig(
            kind=kind,
            dim=int(d.get("dim", 32)),
            seed=int(d.get("seed", 0)),
            path=d.get("path"),
            endpoint=d.get("endpoint"),
            normalize=bool(d.get("normalize", True)),
            batch_size=int(d.get("batch_size", 256)),
            max_in_flight=int(d.get("max_in_flight", 4)),
            timeout=float(d.get("timeout", 60.0)),
        )

    def build(self) -> EmbeddingProvider:
        if self.kind == "mock":
            return MockProvider(dim=self.dim, seed=self.seed)
        if self.kind == "file":
            return FileProvider(self.path)
        return HttpProvider(
            self.endpoint,
            batch_size=self.batch_size,
            max_in_flight=self.max_in_flight,
            timeout=self.timeout,
            normalize=self.normalize,
        )


@dataclass(frozen=True)
class VizConfig:
    method: str = "pca"
    n_neighbors: int = 15
    endpoint: Optional[str] = None

    @staticmethod
    def from_dict(obj: Any) -> "VizConfig":
        d = _mapping("viz", obj)
        _check_keys("viz", d, {"method", "n_neighbors", "endpoint"})
        method = d.get("method", "pca")
        if method not in ("pca", "external"):
            raise ConfigError(f"viz.method must be pca or external, got {method!r}")
        return VizConfig(
            method=method,
            n_neighbors=int(d.get("n_neighbors", 15)),
            endpoint=d.get("endpoint"),
        )


@dataclass(frozen=True)
class RunConfig:
    dataset: DatasetConfig
    match_sentence: MatchSentenceSpec
    provider: ProviderConfig = ProviderConfig()
    metric: str = "cosine"
    epsilon: Optional[float] = None
    epsilons: tuple[float, ...] = ()
    block_columns: tuple[str, ...] = ()
    baseline: Optional[BaselineParams] = None
    viz: VizConfig = VizConfig()
    output_dir: str = "out"
    embeddings_path: Optional[str] = None
    workers: Optional[int] = None

    def resolved_embeddings_path(self) -> Path:
        if self.embeddings_path is not None:
            return Path(self.embeddings_path)
        return Path(self.output_dir) / "embeddings.emb"

    def to_dict(self) -> dict:
        """Resolved snapshot for run manifests (plain JSON-friendly types)."""
        return {
            "dataset": {
                "path": self.dataset.path,
                "id_column": self.dataset.id_column,
                "truth_column": self.dataset.truth_column,
            },
            "match_sentence": {
                "columns": list(self.match_sentence.columns),
                "separator": self.match_sentence.separator,
            },
            "provider": {
                "kind": self.provider.kind,
                "dim": self.provider.dim,
                "seed": self.provider.seed,
                "path": self.provider.path,
                "endpoint": self.provider.endpoint,
                "normalize": self.provider.normalize,
                "batch_size": self.provider.batch_size,
                "max_in_flight": self.provider.max_in_flight,
                "timeout": self.provider.timeout,
            },
            "metric": self.metric,
            "epsilon": self.epsilon,
            "epsilons": list(self.epsilons),
            "block_columns": list(self.block_columns),
            "baseline": None
            if self.baseline is None
            else {
                "block_columns": list(self.baseline.block_columns),
                "match_column": self.baseline.match_column,
                "similarity_threshold": self.baseline.similarity_threshold,
            },
            "viz": {
                "method": self.viz.method,
                "n_neighbors": self.viz.n_neighbors,
                "endpoint": self.viz.endpoint,
            },
            "output_dir": self.output_dir,
            "embeddings_path": self.embeddings_path,
            "workers": self.workers,
        }


_TOP_KEYS = {
    "dataset",
    "match_sentence",
    "provider",
    "metric",
    "epsilon",
    "epsilons",
    "block_columns",
    "baseline",
    "viz",
    "output_dir",
    "embeddings_path",
    "workers",
}


def _parse_match_sentence(obj: Any) -> MatchSentenceSpec:
    d = _mapping("match_sentence", obj)
    _check_keys("match_sentence", d, {"columns", "separator"})
    if "columns" not in d:
        raise ConfigError("match_sentence.columns is required")
    columns = _str_list("match_sentence.columns", d["columns"])
    sep = d.get("separator", " ")
    if not isinstance(sep, str):
        raise ConfigError("match_sentence.separator must be a string")
    return MatchSentenceSpec(columns=tuple(columns), separator=sep)


def _parse_baseline(obj: Any) -> Optional[BaselineParams]:
    if obj is None:
        return None
    d = _mapping("baseline", obj)
    _check_keys("baseline", d, {"block_columns", "match_column", "similarity_threshold"})
    if "match_column" not in d:
        raise ConfigError("baseline.match_column is required")
    return BaselineParams(
        block_columns=tuple(_str_list("baseline.block_columns", d.get("block_columns", []))),
        match_column=d["match_column"],
        similarity_threshold=float(d.get("similarity_threshold", 0.9)),
    )


def parse_config(data: Any) -> RunConfig:
    d = _mapping("config", data)
    _check_keys("config", d, _TOP_KEYS)
    if "dataset" not in d:
        raise ConfigError("config needs a dataset section")
    if "match_sentence" not in d:
        raise ConfigError("config needs a match_sentence section")
    metric = d.get("metric", "cosine")
    if metric not in METRICS:
        raise ConfigError(f"metric must be one of {METRICS}, got {metric!r}")
    epsilon = d.get("epsilon")
    if epsilon is not None and not isinstance(epsilon, (int, float)):
        raise ConfigError("epsilon must be a number")
    raw_eps = d.get("epsilons", [])
    if not isinstance(raw_eps, list) or not all(isinstance(x, (int, float)) for x in raw_eps):
        raise ConfigError("epsilons must be a list of numbers")
    workers = d.get("workers")
    if workers is not None and (not isinstance(workers, int) or workers < 1):
        raise ConfigError("workers must be a positive integer")
    return RunConfig(
        dataset=DatasetConfig.from_dict(d["dataset"]),
        match_sentence=_parse_match_sentence(d["match_sentence"]),
        provider=ProviderConfig.from_dict(d.get("provider")),
        metric=metric,
        epsilon=None if epsilon is None else float(epsilon),
        epsilons=tuple(float(x) for x in raw_eps),
        block_columns=tuple(_str_list("block_columns", d.get("block_columns", []))),
        baseline=_parse_baseline(d.get("baseline")),
        viz=VizConfig.from_dict(d.get("viz")),
        output_dir=str(d.get("output_dir", "out")),
        embeddings_path=d.get("embeddings_path"),
        workers=workers,
    )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    try:
        return parse_config(data)
    except (ConfigError, DataError) as exc:
        # Validation errors raised by domain types during parsing are still
        # configuration mistakes as far as the caller is concerned.
        raise ConfigError(f"{path}: {exc}") from exc
