"""Pair-counting evaluation against ground-truth clusters.

Every unordered record pair is classified by whether the two records share a
predicted group and whether they share a truth cluster; precision, recall and
F-score follow from the TP/FP/TN/FN pair counts. The implementation uses
per-group combinatorics rather than pair enumeration, so it is exact and
linear in the number of records.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterable, Optional, Sequence

from .clustering import ClusterAssignment, cluster_multi_epsilon
from .embedding import EmbeddingMatrix
from .errors import DataError
from .records import Dataset, MatchSentenceSpec, empty_sentence_ids

__all__ = [
    "PairMetrics",
    "SweepResult",
    "ReportRow",
    "pair_metrics",
    "epsilon_sweep",
    "render_report",
    "machine_report",
]


@dataclass(frozen=True)
class PairMetrics:
    """TP/FP/TN/FN pair counts with the derived quality scores.

    declared_duplicates is the number of record pairs the clustering claims
    are duplicates, i.e. TP + FP.
    """

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f_score(self) -> float:
        p, r = self.precision, self.recall
        return 2.0 * p * r / (p + r) if p + r else 0.0

    @property
    def declared_duplicates(self) -> int:
        return self.tp + self.fp

    def as_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "declared_duplicates": self.declared_duplicates,
            "precision": self.precision,
            "recall": self.recall,
            "f_score": self.f_score,
        }


def pair_metrics(predicted: ClusterAssignment, dataset: Dataset) -> PairMetrics:
    """Count pair agreements between a predicted partition and the truth.

    Requires a truth cluster on every record; singletons count as their own
    predicted group. The counts always satisfy tp+fp+tn+fn = C(N, 2).
    """
    truth: dict[str, str] = {}
    for rec in dataset.records:
        if rec.truth_cluster is None:
            raise DataError(f"record {rec.id!r} has no ground-truth cluster")
        truth[rec.id] = rec.truth_cluster
    pred = predicted.as_labels()
    if set(pred) != set(truth):
        raise DataError("predicted assignment does not cover the dataset ids")

    n = len(dataset)
    pred_sizes: dict[str, int] = {}
    truth_sizes: dict[str, int] = {}
    cell_sizes: dict[tuple[str, str], int] = {}
    for rid, t_label in truth.items():
        p_label = pred[rid]
        pred_sizes[p_label] = pred_sizes.get(p_label, 0) + 1
        truth_sizes[t_label] = truth_sizes.get(t_label, 0) + 1
        key = (p_label, t_label)
        cell_sizes[key] = cell_sizes.get(key, 0) + 1

    tp = sum(comb(c, 2) for c in cell_sizes.values())
    tp_fp = sum(comb(c, 2) for c in pred_sizes.values())
    tp_fn = sum(comb(c, 2) for c in truth_sizes.values())
    total = comb(n, 2)
    metrics = PairMetrics(tp=tp, fp=tp_fp - tp, tn=total - tp_fp - tp_fn + tp, fn=tp_fn - tp)
    if metrics.tp + metrics.fp + metrics.tn + metrics.fn != total:
        raise AssertionError("pair counts do not sum to C(N, 2)")
    return metrics


@dataclass(frozen=True)
class SweepResult:
    """Pair metrics at each epsilon of a strictly increasing sweep."""

    rows: tuple[tuple[float, PairMetrics], ...]

    def __post_init__(self) -> None:
        eps = [e for e, _ in self.rows]
        if any(b <= a for a, b in zip(eps, eps[1:])):
            raise DataError(f"sweep epsilons must be strictly increasing, got {eps}")

    def epsilons(self) -> list[float]:
        return [e for e, _ in self.rows]

    def f_scores(self) -> list[float]:
        return [m.f_score for _, m in self.rows]

    def best(self) -> tuple[float, PairMetrics]:
        return max(self.rows, key=lambda row: row[1].f_score)


def epsilon_sweep(
    matrix: EmbeddingMatrix,
    dataset: Dataset,
    metric: str,
    epsilons: Sequence[float],
    block_columns: Sequence[str] = (),
    *,
    sentence_spec: Optional[MatchSentenceSpec] = None,
    workers: Optional[int] = None,
) -> SweepResult:
    """Cluster and evaluate at every epsilon, sharing one distance pass."""
    if not epsilons:
        raise DataError("epsilon sweep needs at least one epsilon")
    forced: frozenset[str] = frozenset()
    if sentence_spec is not None:
        forced = empty_sentence_ids(dataset, sentence_spec)
    assignments = cluster_multi_epsilon(
        matrix,
        dataset,
        metric,
        epsilons,
        block_columns,
        forced_singletons=forced,
        workers=workers,
    )
    return SweepResult(
        rows=tuple(
            (float(eps), pair_metrics(asgn, dataset))
            for eps, asgn in zip(epsilons, assignments)
        )
    )


@dataclass(frozen=True)
class ReportRow:
    method: str
    epsilon: Optional[float]
    metrics: PairMetrics


_COLUMNS = ("method", "epsilon", "Dup", "TP", "FP", "FN", "F-score")


def render_report(rows: Iterable[ReportRow]) -> str:
    """Fixed-order results table; F-scores shown to 2 decimals."""
    table = [_COLUMNS]
    for row in rows:
        m = row.metrics
        table.append(
            (
                row.method,
                "" if row.epsilon is None else f"{row.epsilon:g}",
                f"{m.declared_duplicates:,}",
                f"{m.tp:,}",
                f"{m.fp:,}",
                f"{m.fn:,}",
                f"{m.f_score:.2f}",
            )
        )
    widths = [max(len(r[i]) for r in table) for i in range(len(_COLUMNS))]
    lines = []
    for idx, r in enumerate(table):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * w for w in widths))
    lines.append("")
    lines.append("Dup = declared duplicate pairs (TP + FP).")
    return "\n".join(lines) + "\n"


def machine_report(
    rows: Iterable[ReportRow],
    *,
    dataset_fingerprint: dict,
    provider_tag: str,
    params: dict,
) -> dict:
    """Machine-readable run report with full-precision metrics."""
    return {
        "results": [
            {
                "method": row.method,
                "epsilon": row.epsilon,
                **row.metrics.as_dict(),
            }
            for row in rows
        ],
        "params": params,
        "dataset_fingerprint": dataset_fingerprint,
        "provider_tag": provider_tag,
    }
