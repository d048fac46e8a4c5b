"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the library's fast paths: pair counting
enumerates every record pair, clustering builds the full distance matrix row
by row from the definitional formula and takes connected components via
networkx.
"""

from __future__ import annotations

import csv
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

from dedupkit import (
    Dataset,
    EmbeddingMatrix,
    MatchSentenceSpec,
    MockProvider,
    Record,
    embed_dataset,
)


def make_dataset(rows, schema, truth=None, name="test", **kwargs) -> Dataset:
    """Build a Dataset from a list of attribute-value tuples."""
    records = []
    for i, row in enumerate(rows):
        records.append(
            Record(
                id=str(i),
                attributes=dict(zip(schema, row)),
                truth_cluster=None if truth is None else str(truth[i]),
            )
        )
    return Dataset(records=tuple(records), schema=tuple(schema), name=name, **kwargs)


def write_csv(path: Path, header, rows) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def oracle_pair_counts(pred_labels, truth_labels) -> tuple[int, int, int, int]:
    """All-pairs enumeration of (tp, fp, tn, fn) over two label sequences."""
    pred = np.asarray(pred_labels)
    truth = np.asarray(truth_labels)
    n = len(pred)
    iu, ju = np.triu_indices(n, k=1)
    same_pred = pred[iu] == pred[ju]
    same_truth = truth[iu] == truth[ju]
    tp = int(np.sum(same_pred & same_truth))
    fp = int(np.sum(same_pred & ~same_truth))
    fn = int(np.sum(~same_pred & same_truth))
    tn = int(np.sum(~same_pred & ~same_truth))
    return tp, fp, tn, fn


def oracle_distance_matrix(vectors, metric) -> np.ndarray:
    """Row-by-row definitional distances in float64 (no Gram shortcut)."""
    v = np.asarray(vectors, dtype=np.float64)
    n = v.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    if metric == "l2":
        for i in range(n):
            out[i] = np.sqrt(np.sum((v[i][None, :] - v) ** 2, axis=1))
        return out
    norms = np.sqrt(np.sum(v * v, axis=1))
    assert np.all(norms > 0), "oracle: zero vector under cosine"
    for i in range(n):
        out[i] = 1.0 - (v @ v[i]) / (norms * norms[i])
    np.fill_diagonal(out, 0.0)
    for i in range(n):
        for j in range(i + 1, n):
            if np.array_equal(v[i], v[j]):
                out[i, j] = out[j, i] = 0.0
    return np.clip(out, 0.0, 2.0)


def oracle_cluster_labels(
    dataset: Dataset,
    matrix: EmbeddingMatrix,
    metric: str,
    epsilon: float,
    block_columns=(),
    forced_singletons=(),
) -> dict[str, str]:
    """Independent clustering: full distance matrix + networkx components.

    Returns record id -> group label, singletons labelled as themselves and
    groups labelled by their smallest member id.
    """
    ids = dataset.record_ids()
    rows = matrix.row_index()
    order = [rows[rid] for rid in ids]
    dist = oracle_distance_matrix(matrix.vectors[order], metric)
    by_id = dataset.by_id()
    forced = set(forced_singletons)

    graph = nx.Graph()
    graph.add_nodes_from(range(len(ids)))
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            if ids[i] in forced or ids[j] in forced:
                continue
            key_i = tuple(by_id[ids[i]].attributes[c] for c in block_columns)
            key_j = tuple(by_id[ids[j]].attributes[c] for c in block_columns)
            if key_i == key_j and dist[i, j] <= epsilon:
                graph.add_edge(i, j)

    labels: dict[str, str] = {}
    for comp in nx.connected_components(graph):
        members = [ids[i] for i in comp]
        label = min(members) if len(members) >= 2 else members[0]
        for rid in members:
            labels[rid] = label if len(members) >= 2 else rid
    return labels


def margin_safe_epsilon(distances, rng, min_gap=1e-6) -> float:
    """Pick an epsilon that no pairwise distance comes close to.

    Samples a midpoint between consecutive distinct distance values (or a
    point beyond either extreme), so threshold decisions are robust for any
    distance computation accurate to ``min_gap``.
    """
    vals = np.unique(np.asarray(distances, dtype=np.float64))
    candidates = [float(vals[0]) / 2.0 if vals[0] > 0 else None, float(vals[-1]) + 0.1]
    for lo, hi in zip(vals, vals[1:]):
        if hi - lo > 4 * min_gap:
            candidates.append(float((lo + hi) / 2.0))
    candidates = [c for c in candidates if c is not None and c > 0]
    return float(rng.choice(candidates))


WORD_BANK = [
    "river", "stone", "meadow", "harbor", "lantern", "crystal", "thunder",
    "violet", "ember", "willow", "falcon", "marble", "cedar", "aurora",
    "bramble", "copper", "dusk", "fathom", "glacier", "hollow",
]


def random_sentences(rng, n_clusters, sizes):
    """Sentences in planted clusters: shared long core, per-member typo.

    Returns (sentences, truth_labels); members of one cluster differ by a
    single appended token so their 3-gram profiles stay close.
    """
    sentences = []
    truth = []
    for c in range(n_clusters):
        words = rng.choice(WORD_BANK, size=4, replace=False)
        core = " ".join(words) + f" base{c}"
        for m in range(sizes[c]):
            suffix = "" if m == 0 else f" v{m}"
            sentences.append(core + suffix)
            truth.append(c)
    return sentences, truth


@pytest.fixture
def planted():
    """20 records in 4 planted clusters with a clear mock-embedding margin.

    Provides the dataset, matrix, truth labels, and an epsilon chosen from
    the measured intra/inter margin.
    """
    rng = np.random.default_rng(2024)
    sizes = [6, 5, 5, 4]
    sentences, truth = random_sentences(rng, 4, sizes)
    rows = [(s,) for s in sentences]
    dataset = make_dataset(rows, ["text"], truth=truth)
    spec = MatchSentenceSpec(columns=("text",))
    matrix = embed_dataset(dataset, spec, MockProvider(dim=64, seed=11))

    dist = oracle_distance_matrix(matrix.vectors, "cosine")
    truth_arr = np.asarray(truth)
    same = truth_arr[:, None] == truth_arr[None, :]
    iu, ju = np.triu_indices(len(truth), k=1)
    intra = dist[iu, ju][same[iu, ju]]
    inter = dist[iu, ju][~same[iu, ju]]
    assert intra.max() < inter.min(), "fixture lost its margin"
    epsilon = float((intra.max() + inter.min()) / 2.0)

    return {
        "dataset": dataset,
        "spec": spec,
        "matrix": matrix,
        "truth": [str(t) for t in truth],
        "epsilon": epsilon,
        "max_intra": float(intra.max()),
        "min_inter": float(inter.min()),
        "sizes": sizes,
    }
