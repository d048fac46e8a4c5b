"""Traditional entity-matching pipeline: blocking, string matching, clustering.

Candidate pairs agreeing on the block columns are scored with normalized
Levenshtein similarity on one attribute; pairs at or above the threshold are
matched and their connected components become the match groups. This is the
naive-blocking baseline the embedding clusterer is compared against.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .clustering import ClusterAssignment, assignment_from_components
from .errors import DataError
from .records import Dataset

__all__ = [
    "CandidatePair",
    "BaselineParams",
    "candidate_count",
    "generate_candidates",
    "levenshtein_similarity",
    "match_pairs",
    "baseline_cluster",
    "run_baseline",
]


@dataclass(frozen=True, order=True)
class CandidatePair:
    """Unordered record pair, stored once with left_id < right_id."""

    left_id: str
    right_id: str

    def __post_init__(self) -> None:
        if self.left_id >= self.right_id:
            raise DataError(
                f"candidate pair must have left_id < right_id, got "
                f"({self.left_id!r}, {self.right_id!r})"
            )


@dataclass(frozen=True)
class BaselineParams:
    block_columns: tuple[str, ...] = ()
    match_column: str = "title"
    similarity_threshold: float = 0.9

    def __post_init__(self) -> None:
        if not 0.0 <= self.similarity_threshold <= 1.0:
            raise DataError(
                f"similarity threshold must be in [0, 1], got {self.similarity_threshold}"
            )


def candidate_count(n: int) -> int:
    """Ordered candidate-record count for an n-row table: n^2 - n.

    Every row pairs with every other row in both orders; a row is never
    combined with itself. The pipeline enumerates each unordered pair once,
    i.e. half this number.
    """
    if n < 0:
        raise DataError(f"dataset size must be >= 0, got {n}")
    return n * n - n


def generate_candidates(
    dataset: Dataset, block_columns: Sequence[str] = ()
) -> Iterator[CandidatePair]:
    """Stream the unordered pairs agreeing on all block columns.

    Pairs are yielded sorted by (left_id, right_id) without ever
    materializing the full cross product.
    """
    missing = [c for c in block_columns if c not in dataset.schema]
    if missing:
        raise DataError(f"block columns not in schema: {missing}")
    key_of = {
        rec.id: tuple(rec.attributes[c] for c in block_columns)
        for rec in dataset.records
    }
    blocks: dict[tuple[str, ...], list[str]] = {}
    for rid in sorted(key_of):
        blocks.setdefault(key_of[rid], []).append(rid)
    for left in sorted(key_of):
        mates = blocks[key_of[left]]
        for right in mates[bisect_right(mates, left):]:
            yield CandidatePair(left, right)


def levenshtein_similarity(a: str, b: str) -> float:
    """1 - editdistance(a, b) / max(len(a), len(b)); both empty -> 1.0.

    Lengths and edits are counted in Unicode code points.
    """
    if a == b:
        return 1.0
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost)
            )
        previous = current
    return 1.0 - previous[-1] / longest


def match_pairs(
    dataset: Dataset,
    candidates: Iterable[CandidatePair],
    params: BaselineParams,
) -> list[CandidatePair]:
    """Keep candidates whose match-column similarity reaches the threshold."""
    if params.match_column not in dataset.schema:
        raise DataError(f"match column {params.match_column!r} not in schema")
    values = {rec.id: rec.attributes[params.match_column] for rec in dataset.records}
    matched = [
        pair
        for pair in candidates
        if levenshtein_similarity(values[pair.left_id], values[pair.right_id])
        >= params.similarity_threshold
    ]
    matched.sort()
    return matched


def baseline_cluster(
    pairs: Iterable[CandidatePair], record_ids: Iterable[str]
) -> ClusterAssignment:
    """Connected components over matched pairs; unmatched ids stay singletons."""
    ids = list(record_ids)
    ordinal = {rid: i for i, rid in enumerate(ids)}
    parent = list(range(len(ids)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for pair in pairs:
        try:
            a, b = ordinal[pair.left_id], ordinal[pair.right_id]
        except KeyError as exc:
            raise DataError(f"matched pair references unknown id {exc.args[0]!r}") from exc
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    comps: dict[int, list[str]] = {}
    for i, rid in enumerate(ids):
        comps.setdefault(find(i), []).append(rid)
    return assignment_from_components(comps.values(), ids)


def run_baseline(dataset: Dataset, params: BaselineParams) -> ClusterAssignment:
    """Full pipeline: blocked candidates -> threshold matching -> components."""
    candidates = generate_candidates(dataset, params.block_columns)
    matched = match_pairs(dataset, candidates, params)
    return baseline_cluster(matched, dataset.record_ids())
