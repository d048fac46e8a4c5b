"""Tabular record ingestion and match-sentence construction.

A Dataset is an immutable, rectangular table of string-valued records.
Match sentences are built by concatenating selected attribute values with a
separator; they are the text fed to the embedding providers.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .errors import DataError

__all__ = [
    "Record",
    "Dataset",
    "MatchSentenceSpec",
    "load_csv",
    "save_csv",
    "build_match_sentence",
    "empty_sentence_ids",
    "dataset_fingerprint",
]


@dataclass(frozen=True)
class Record:
    """One table row: a stable id, named string attributes, optional truth label.

    Record ids are strings everywhere in the toolkit; ordinal ids are their
    decimal rendering ("0", "1", ...). Attribute values may be empty strings.
    """

    id: str
    attributes: Mapping[str, str]
    truth_cluster: Optional[str] = None


@dataclass(frozen=True)
class Dataset:
    """An ordered, rectangular collection of records.

    Every record carries exactly the attribute keys listed in ``schema``;
    record order is the ingestion order and is stable across a run.
    ``id_column`` / ``truth_column`` remember where ids and ground-truth labels
    came from so the dataset can be written back out losslessly.
    """

    records: tuple[Record, ...]
    schema: tuple[str, ...]
    name: str = "dataset"
    id_column: Optional[str] = None
    truth_column: Optional[str] = None

    def __post_init__(self) -> None:
        seen: set[str] = set()
        schema_set = set(self.schema)
        if len(schema_set) != len(self.schema):
            raise DataError(f"dataset {self.name!r}: duplicate column names in schema")
        for rec in self.records:
            if rec.id in seen:
                raise DataError(f"dataset {self.name!r}: duplicate record id {rec.id!r}")
            seen.add(rec.id)
            if set(rec.attributes) != schema_set:
                raise DataError(
                    f"dataset {self.name!r}: record {rec.id!r} attribute keys do not match schema"
                )

    def __len__(self) -> int:
        return len(self.records)

    def record_ids(self) -> list[str]:
        return [rec.id for rec in self.records]

    def by_id(self) -> dict[str, Record]:
        return {rec.id: rec for rec in self.records}


@dataclass(frozen=True)
class MatchSentenceSpec:
    """Which columns to concatenate, in which order, with which separator."""

    columns: tuple[str, ...]
    separator: str = " "

    def __post_init__(self) -> None:
        if not self.columns:
            raise DataError("match-sentence spec needs at least one column")
        if len(set(self.columns)) != len(self.columns):
            raise DataError("match-sentence spec lists a column twice")
        if self.separator == "":
            raise DataError("match-sentence separator must be non-empty")

    def validate_against(self, schema: Sequence[str]) -> None:
        missing = [c for c in self.columns if c not in schema]
        if missing:
            raise DataError(f"match-sentence columns not in schema: {missing}")


def build_match_sentence(record: Record, spec: MatchSentenceSpec) -> str:
    """Join the spec's attribute values with the separator.

    Runs of the separator are collapsed to a single occurrence and leading or
    trailing separators are trimmed, so empty attribute values never leave
    doubled separators behind. No other normalization is applied.
    """
    try:
        values = [record.attributes[c] for c in spec.columns]
    except KeyError as exc:
        raise DataError(f"record {record.id!r} has no column {exc.args[0]!r}") from exc
    joined = spec.separator.join(values)
    tokens = [t for t in joined.split(spec.separator) if t]
    return spec.separator.join(tokens)


def load_csv(
    path: str | Path,
    id_column: Optional[str] = None,
    truth_column: Optional[str] = None,
    name: Optional[str] = None,
) -> Dataset:
    """Read a header-first CSV (RFC-4180, UTF-8) into a Dataset.

    Without ``id_column`` the ids are 0-based row ordinals (as strings).
    ``truth_column`` values populate ``truth_cluster``. Ragged rows and
    duplicate ids are hard errors; empty cells become empty strings.
    """
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected a header row") from None
        except csv.Error as exc:
            raise DataError(f"{path}: CSV parse error: {exc}") from exc

        if len(set(header)) != len(header):
            raise DataError(f"{path}: duplicate column names in header")
        for col, label in ((id_column, "id_column"), (truth_column, "truth_column")):
            if col is not None and col not in header:
                raise DataError(f"{path}: {label} {col!r} not found in header {header}")

        attr_columns = [c for c in header if c != id_column and c != truth_column]
        id_pos = header.index(id_column) if id_column is not None else None
        truth_pos = header.index(truth_column) if truth_column is not None else None

        records: list[Record] = []
        seen_ids: set[str] = set()
        try:
            for ordinal, row in enumerate(reader):
                if len(row) != len(header):
                    raise DataError(
                        f"{path}: row {ordinal + 2} has {len(row)} fields, header has {len(header)}"
                    )
                rec_id = row[id_pos] if id_pos is not None else str(ordinal)
                if rec_id in seen_ids:
                    raise DataError(f"{path}: duplicate record id {rec_id!r} at row {ordinal + 2}")
                seen_ids.add(rec_id)
                truth = row[truth_pos] if truth_pos is not None else None
                attrs = {
                    col: row[i]
                    for i, col in enumerate(header)
                    if i != id_pos and i != truth_pos
                }
                records.append(Record(id=rec_id, attributes=attrs, truth_cluster=truth))
        except csv.Error as exc:
            raise DataError(f"{path}: CSV parse error: {exc}") from exc

    return Dataset(
        records=tuple(records),
        schema=tuple(attr_columns),
        name=name if name is not None else path.stem,
        id_column=id_column,
        truth_column=truth_column,
    )


def save_csv(dataset: Dataset, path: str | Path) -> None:
    """Write a Dataset back to CSV so that ``load_csv`` round-trips it.

    The id column is emitted only when the dataset was loaded with one
    (ordinal ids are regenerated on re-load), likewise the truth column.
    """
    path = Path(path)
    header: list[str] = []
    if dataset.id_column is not None:
        header.append(dataset.id_column)
    header.extend(dataset.schema)
    if dataset.truth_column is not None:
        header.append(dataset.truth_column)

    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for rec in dataset.records:
            row: list[str] = []
            if dataset.id_column is not None:
                row.append(rec.id)
            row.extend(rec.attributes[c] for c in dataset.schema)
            if dataset.truth_column is not None:
                row.append(rec.truth_cluster if rec.truth_cluster is not None else "")
            writer.writerow(row)


def empty_sentence_ids(dataset: Dataset, spec: MatchSentenceSpec) -> frozenset[str]:
    """Ids of records whose match sentence collapses to the empty string.

    Such records are retained in the dataset but never match anything during
    clustering; callers pass this set through as forced singletons.
    """
    spec.validate_against(dataset.schema)
    return frozenset(
        rec.id for rec in dataset.records if build_match_sentence(rec, spec) == ""
    )


def dataset_fingerprint(dataset: Dataset) -> dict:
    """Stable identity of a dataset: record count, schema, and content hash.

    Stage manifests carry this so downstream stages can detect stale
    embedding files produced from a different dataset.
    """
    h = hashlib.sha256()
    h.update("\x1f".join(dataset.schema).encode("utf-8"))
    for rec in dataset.records:
        parts = [rec.id, *(rec.attributes[c] for c in dataset.schema)]
        if rec.truth_cluster is not None:
            parts.append(rec.truth_cluster)
        h.update(b"\x1e")
        h.update("\x1f".join(parts).encode("utf-8"))
    return {
        "records": len(dataset),
        "schema": list(dataset.schema),
        "sha256": h.hexdigest(),
    }
