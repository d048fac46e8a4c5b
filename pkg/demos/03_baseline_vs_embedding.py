#!/usr/bin/env python3
"""Score the traditional baseline against the embedding clusterer.

Builds a corpus of noisy duplicate "track" records with ground truth, runs
the blocking + Levenshtein pipeline and the embedding pipeline (picking
epsilon from a sweep), and prints both pair-counting results in one table.
The strict string-similarity threshold misses heavily mistyped duplicates;
the embedding neighborhood still catches them.
"""

import random

from dedupkit import (
    BaselineParams,
    ClusterParams,
    Dataset,
    MatchSentenceSpec,
    MockProvider,
    Record,
    ReportRow,
    cluster,
    embed_dataset,
    epsilon_sweep,
    pair_metrics,
    render_report,
    run_baseline,
)

WORDS = [
    "ballade", "harbor", "lantern", "crows", "waltz", "copper", "winter",
    "glass", "memphis", "train", "aurora", "meadow", "thunder", "violet",
    "ember", "willow", "falcon", "marble", "cedar", "bramble", "quarry",
    "sparrow", "juniper", "anchor", "drift", "hollow", "sienna", "garnet",
    "pewter", "clover", "raven", "tundra", "onyx", "prairie", "saffron", "dune",
]
ARTISTS = [
    "luce dufault", "marble owls", "cedar vine", "aurora quartet",
    "vesper lane", "golden harriers", "silver birch", "kestrel family",
    "june holloway", "harlan reed", "indigo sons", "rosa marchetti",
]


def corrupt(text: str, edits: int, rnd: random.Random) -> str:
    """Random character edits, the way manual entry mangles titles."""
    for _ in range(edits):
        pos = rnd.randrange(len(text))
        op = rnd.random()
        if op < 0.4:
            text = text[:pos] + rnd.choice("abcdefghijklmnopqrstuvwxyz") + text[pos + 1 :]
        elif op < 0.7 and len(text) > 4:
            text = text[:pos] + text[pos + 1 :]
        else:
            text = text[:pos] + rnd.choice("aeiou") + text[pos:]
    return text


def build_corpus(n_entities=60, rnd=None) -> Dataset:
    rnd = rnd or random.Random(20)
    records = []
    rid = 0
    for entity in range(n_entities):
        title = " ".join(rnd.sample(WORDS, 4))
        artist = rnd.choice(ARTISTS)
        for copy in range(rnd.choice([1, 1, 2, 2, 3])):
            # first copy is clean; later copies carry up to 3 typos, which is
            # where a strict Levenshtein threshold starts missing duplicates
            edits = 0 if copy == 0 else rnd.choice([1, 2, 3, 3])
            records.append(
                Record(
                    f"{rid:03d}",
                    {"title": corrupt(title, edits, rnd), "artist": artist},
                    truth_cluster=f"e{entity}",
                )
            )
            rid += 1
    return Dataset(records=tuple(records), schema=("title", "artist"), truth_column="truth")


def main():
    dataset = build_corpus()
    print(f"corpus: {len(dataset)} records")

    baseline_assignment = run_baseline(
        dataset,
        BaselineParams(
            block_columns=("artist",), match_column="title", similarity_threshold=0.9
        ),
    )

    spec = MatchSentenceSpec(columns=("title", "artist"))
    matrix = embed_dataset(dataset, spec, MockProvider(dim=96, seed=3))
    sweep = epsilon_sweep(
        matrix, dataset, "cosine", [0.1, 0.15, 0.2, 0.25, 0.3, 0.35], sentence_spec=spec
    )
    print("\nepsilon sweep for the embedding clusterer:")
    for eps, metrics in sweep.rows:
        print(f"  eps {eps:4.2f}  F={metrics.f_score:.3f}")
    best_eps, _ = sweep.best()

    embedding_assignment = cluster(
        matrix, dataset, ClusterParams(metric="cosine", epsilon=best_eps), sentence_spec=spec
    )
    rows = [
        ReportRow("baseline", None, pair_metrics(baseline_assignment, dataset)),
        ReportRow("embedding", best_eps, pair_metrics(embedding_assignment, dataset)),
    ]
    print()
    print(render_report(rows))


if __name__ == "__main__":
    main()
