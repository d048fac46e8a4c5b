"""Blocked epsilon-neighborhood clustering into match groups.

Two records land in the same group only if they agree exactly on every block
column and are connected by a chain of record pairs each within epsilon under
the chosen metric. This is the connected-components closure of the epsilon
graph restricted to blocks (a minPts=1 density clustering where every point
is core), which makes the result independent of record visiting order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .embedding import EmbeddingMatrix
from .errors import DataError
from .metrics import as_metric, iter_threshold_pairs
from .records import Dataset, MatchSentenceSpec, empty_sentence_ids

__all__ = [
    "ClusterParams",
    "ClusterAssignment",
    "GroupStats",
    "cluster",
    "cluster_multi_epsilon",
    "group_stats",
    "save_assignment_csv",
    "load_assignment_csv",
]


@dataclass(frozen=True)
class ClusterParams:
    """Operating point for the clusterer."""

    metric: str = "cosine"
    epsilon: float = 0.0
    block_columns: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        as_metric(self.metric)
        if self.epsilon < 0:
            raise DataError(f"epsilon must be >= 0, got {self.epsilon}")


@dataclass(frozen=True)
class ClusterAssignment:
    """Partition of the record ids into match groups (size >= 2) and singletons.

    Group ids are the smallest member record id, so equal partitions always
    carry equal labels.
    """

    groups: dict[str, frozenset[str]]
    singletons: frozenset[str]

    def __post_init__(self) -> None:
        seen: set[str] = set(self.singletons)
        for gid, members in self.groups.items():
            if len(members) < 2:
                raise DataError(f"group {gid!r} has fewer than 2 members")
            if gid != min(members):
                raise DataError(f"group id {gid!r} is not the smallest member id")
            if seen & members:
                raise DataError("groups and singletons overlap")
            seen |= members

    def all_ids(self) -> frozenset[str]:
        out = set(self.singletons)
        for members in self.groups.values():
            out |= members
        return frozenset(out)

    def as_labels(self) -> dict[str, str]:
        """record id -> group label; singletons label as themselves."""
        labels = {rid: rid for rid in self.singletons}
        for gid, members in self.groups.items():
            for rid in members:
                labels[rid] = gid
        return labels

    def __len__(self) -> int:
        return len(self.singletons) + sum(len(m) for m in self.groups.values())


@dataclass(frozen=True)
class GroupStats:
    """Size of the largest match group and how many groups there are."""

    max_group_size: int
    num_match_groups: int


class _UnionFind:
    """Array union-find with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def components(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for x in range(len(self.parent)):
            out.setdefault(self.find(x), []).append(x)
        return out


def assignment_from_components(
    components: Iterable[Iterable[str]],
    universe: Iterable[str],
) -> ClusterAssignment:
    """Build a ClusterAssignment from id groupings plus the full id universe.

    Components of size one and universe ids missing from any component end up
    as singletons.
    """
    groups: dict[str, frozenset[str]] = {}
    grouped: set[str] = set()
    for comp in components:
        members = frozenset(comp)
        if len(members) < 2:
            continue
        if members & grouped:
            raise DataError("components overlap")
        grouped |= members
        groups[min(members)] = members
    singles = frozenset(rid for rid in universe if rid not in grouped)
    if len(singles) + len(grouped) != len(set(universe)):
        raise DataError("components contain ids outside the universe")
    return ClusterAssignment(groups=groups, singletons=singles)


def _block_partitions(
    dataset: Dataset, block_columns: Sequence[str]
) -> Iterable[list[str]]:
    """Record-id lists per block, in first-seen order."""
    missing = [c for c in block_columns if c not in dataset.schema]
    if missing:
        raise DataError(f"block columns not in schema: {missing}")
    if not block_columns:
        yield [rec.id for rec in dataset.records]
        return
    blocks: dict[tuple[str, ...], list[str]] = {}
    for rec in dataset.records:
        key = tuple(rec.attributes[c] for c in block_columns)
        blocks.setdefault(key, []).append(rec.id)
    yield from blocks.values()


def cluster_multi_epsilon(
    matrix: EmbeddingMatrix,
    dataset: Dataset,
    metric: str,
    epsilons: Sequence[float],
    block_columns: Sequence[str] = (),
    *,
    forced_singletons: Iterable[str] = (),
    workers: Optional[int] = None,
) -> list[ClusterAssignment]:
    """Cluster once per epsilon while paying for the distance pass once.

    Epsilons must be strictly increasing. Records named in
    ``forced_singletons`` never join any group.
    """
    as_metric(metric)
    eps_list = list(epsilons)
    if not eps_list:
        raise DataError("need at least one epsilon")
    if any(nxt <= prev for prev, nxt in zip(eps_list, eps_list[1:])):
        raise DataError(f"epsilons must be strictly increasing, got {eps_list}")

    dataset_ids = dataset.record_ids()
    rows = matrix.row_index()
    if set(rows) != set(dataset_ids):
        raise DataError(
            f"embedding matrix ids do not match dataset ids "
            f"({len(rows)} vs {len(dataset_ids)} records)"
        )
    forced = set(forced_singletons)
    unknown = forced - set(dataset_ids)
    if unknown:
        raise DataError(f"forced singleton ids not in dataset: {sorted(unknown)[:3]}")

    ordinal = {rid: i for i, rid in enumerate(dataset_ids)}
    finders = [_UnionFind(len(dataset_ids)) for _ in eps_list]

    for block_ids in _block_partitions(dataset, block_columns):
        active = [rid for rid in block_ids if rid not in forced]
        if len(active) < 2:
            continue
        sub_rows = np.fromiter((rows[rid] for rid in active), dtype=np.intp)
        sub_vectors = matrix.vectors[sub_rows]
        sub_ordinals = [ordinal[rid] for rid in active]
        for k, li, lj in iter_threshold_pairs(
            sub_vectors, metric, eps_list, workers=workers
        ):
            uf = finders[k]
            for a, b in zip(li.tolist(), lj.tolist()):
                uf.union(sub_ordinals[a], sub_ordinals[b])

    out: list[ClusterAssignment] = []
    for uf in finders:
        comps = (
            [dataset_ids[i] for i in members]
            for members in uf.components().values()
        )
        out.append(assignment_from_components(comps, dataset_ids))
    return out


def cluster(
    matrix: EmbeddingMatrix,
    dataset: Dataset,
    params: ClusterParams,
    *,
    sentence_spec: Optional[MatchSentenceSpec] = None,
    workers: Optional[int] = None,
) -> ClusterAssignment:
    """Match-group the dataset at one operating point.

    When ``sentence_spec`` is given, records whose match sentence is empty
    are kept but never match anything (forced singletons).
    """
    forced: frozenset[str] = frozenset()
    if sentence_spec is not None:
        forced = empty_sentence_ids(dataset, sentence_spec)
    return cluster_multi_epsilon(
        matrix,
        dataset,
        params.metric,
        [params.epsilon],
        params.block_columns,
        forced_singletons=forced,
        workers=workers,
    )[0]


def group_stats(assignment: ClusterAssignment) -> GroupStats:
    sizes = [len(m) for m in assignment.groups.values()]
    return GroupStats(
        max_group_size=max(sizes) if sizes else 0,
        num_match_groups=len(sizes),
    )


def save_assignment_csv(assignment: ClusterAssignment, path: str | Path) -> None:
    """Write record_id,group_id,is_singleton rows sorted by record id."""
    labels = assignment.as_labels()
    singles = assignment.singletons
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["record_id", "group_id", "is_singleton"])
        for rid in sorted(labels):
            writer.writerow([rid, labels[rid], "1" if rid in singles else "0"])


def load_assignment_csv(path: str | Path) -> ClusterAssignment:
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["record_id", "group_id", "is_singleton"]:
            raise DataError(f"{path}: not an assignment file (header {header})")
        singles: list[str] = []
        members: dict[str, list[str]] = {}
        for row in reader:
            if len(row) != 3:
                raise DataError(f"{path}: malformed assignment row {row}")
            rid, gid, flag = row
            if flag == "1":
                singles.append(rid)
            else:
                members.setdefault(gid, []).append(rid)
    return assignment_from_components(
        members.values(), [*singles, *(rid for ms in members.values() for rid in ms)]
    )
