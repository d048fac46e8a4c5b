"""Batch exporter: CSV in, EMB1 vector file out.

Builds the same space-joined match sentences the dedup toolkit builds
(values joined by the separator, runs collapsed, ends trimmed), encodes
them through the model in batches, and writes the toolkit's EMB1 format.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import ServiceConfig
from .emb_format import write_emb1
from .encoder import Encoder, SentenceTransformerEncoder


def build_sentence(values: Sequence[str], separator: str = " ") -> str:
    joined = separator.join(values)
    return separator.join(t for t in joined.split(separator) if t)


def read_rows(
    csv_path: str | Path,
    columns: Sequence[str],
    id_column: Optional[str],
    separator: str = " ",
) -> tuple[list[str], list[str]]:
    """Record ids (ordinals when no id column) and their match sentences."""
    with Path(csv_path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{csv_path}: empty file")
        missing = [c for c in [*columns, *([id_column] if id_column else [])] if c not in header]
        if missing:
            raise ValueError(f"{csv_path}: columns not in header: {missing}")
        col_pos = [header.index(c) for c in columns]
        id_pos = header.index(id_column) if id_column else None
        ids: list[str] = []
        sentences: list[str] = []
        for ordinal, row in enumerate(reader):
            if len(row) != len(header):
                raise ValueError(f"{csv_path}: row {ordinal + 2} has {len(row)} fields")
            ids.append(row[id_pos] if id_pos is not None else str(ordinal))
            sentences.append(build_sentence([row[i] for i in col_pos], separator))
    return ids, sentences


def export_embeddings(
    csv_path: str | Path,
    columns: Sequence[str],
    out_path: str | Path,
    *,
    id_column: Optional[str] = None,
    separator: str = " ",
    config: Optional[ServiceConfig] = None,
    encoder: Optional[Encoder] = None,
) -> int:
    """Encode every row of the CSV and write the EMB1 file. Returns row count."""
    config = config or ServiceConfig()
    enc = encoder if encoder is not None else SentenceTransformerEncoder(config)
    ids, sentences = read_rows(csv_path, columns, id_column, separator)
    parts = []
    for start in range(0, len(sentences), config.max_batch_size):
        batch = sentences[start : start + config.max_batch_size]
        vectors = np.asarray(enc.encode(batch), dtype=np.float32)
        if vectors.shape != (len(batch), config.dim):
            raise ValueError(f"encoder returned shape {vectors.shape} for batch at {start}")
        parts.append(vectors)
    all_vectors = (
        np.concatenate(parts, axis=0)
        if parts
        else np.empty((0, config.dim), dtype=np.float32)
    )
    if config.normalize and len(all_vectors):
        norms = np.linalg.norm(all_vectors.astype(np.float64), axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise ValueError("zero-norm embedding cannot be normalized")
        all_vectors = (all_vectors / norms).astype(np.float32)
    write_emb1(out_path, ids, all_vectors, config.provider_tag())
    return len(ids)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="embed-service-export",
        description="encode a CSV's match sentences and write an EMB1 vector file",
    )
    parser.add_argument("csv", help="input CSV with a header row")
    parser.add_argument("--columns", required=True, help="comma-separated attribute columns")
    parser.add_argument("--out", required=True, help="output .emb path")
    parser.add_argument("--id-column", default=None)
    parser.add_argument("--separator", default=" ")
    parser.add_argument("--model", default=None, help="override model name")
    parser.add_argument("--dim", type=int, default=None, help="override advertised dim")
    parser.add_argument("--batch-size", type=int, default=None)
    parser.add_argument("--no-normalize", action="store_true")
    args = parser.parse_args(argv)

    config = ServiceConfig()
    updates = {}
    if args.model:
        updates["model_name"] = args.model
    if args.dim:
        updates["dim"] = args.dim
    if args.batch_size:
        updates["max_batch_size"] = args.batch_size
    if args.no_normalize:
        updates["normalize"] = False
    if updates:
        from dataclasses import replace

        config = replace(config, **updates)

    try:
        count = export_embeddings(
            args.csv,
            [c for c in args.columns.split(",") if c],
            args.out,
            id_column=args.id_column,
            separator=args.separator,
            config=config,
        )
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {count} vectors (dim {config.dim}) -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
