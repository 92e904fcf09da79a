"""Ingestion of raw event, label, and embedding files into a Dataset.

Events arrive as line-delimited JSON, one event per line, with keys
``sequence_id``, the schema's timestamp field, and any subset of the
schema fields (absent or null-valued keys become missing values).
Labels and embeddings arrive as CSV keyed by sequence id.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from pathlib import Path

import numpy as np

from .core import (
    BINARY,
    MULTICLASS,
    REGRESSION,
    DataError,
    Dataset,
    EmbeddingMatrix,
    EventSequence,
    TargetLabels,
)
from .schema import CATEGORICAL, MISSING_CATEGORY, EventSchema

logger = logging.getLogger(__name__)

SEQUENCE_ID_KEY = "sequence_id"


class IngestError(DataError):
    """Raised for malformed input files; message carries the line number."""


def ingest_events(events_path: str | Path, schema_path: str | Path) -> Dataset:
    """Group raw events into per-sequence columns under the given schema.

    Events are sorted by timestamp within each sequence with input order
    as the tie-break; sequences are ordered lexicographically by id.
    Unseen categorical values extend the vocabulary in first-seen order,
    so the returned dataset's schema may supersede the input schema.
    """
    schema = EventSchema.loads(Path(schema_path).read_text())
    vocabs: dict[str, list[str]] = {
        name: list(schema.vocabulary(name)) for name in schema.categorical_fields()
    }
    vocab_index: dict[str, dict[str, int]] = {
        name: {v: i for i, v in enumerate(vals)} for name, vals in vocabs.items()
    }
    known_keys = {SEQUENCE_ID_KEY, schema.timestamp_field, *schema.field_names}

    # per sequence id: list of (timestamp, {field: raw value})
    groups: dict[str, list[tuple[float, dict]]] = {}
    with open(events_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
            if not isinstance(rec, dict):
                raise IngestError(f"line {lineno}: event must be a JSON object")
            for key in rec:
                if key not in known_keys:
                    raise IngestError(f"line {lineno}: unknown field name {key!r}")
            if SEQUENCE_ID_KEY not in rec:
                raise IngestError(f"line {lineno}: missing {SEQUENCE_ID_KEY!r}")
            if schema.timestamp_field not in rec:
                raise IngestError(f"line {lineno}: missing timestamp field")
            ts_raw = rec[schema.timestamp_field]
            try:
                ts = float(ts_raw)
            except (TypeError, ValueError):
                raise IngestError(f"line {lineno}: timestamp {ts_raw!r} is not numeric") from None
            if not math.isfinite(ts):
                raise IngestError(f"line {lineno}: non-finite timestamp {ts_raw!r}")
            seq_id = str(rec[SEQUENCE_ID_KEY])
            groups.setdefault(seq_id, []).append((ts, rec))

    sequences = []
    for seq_id in sorted(groups):
        events = groups[seq_id]
        ts = np.array([t for t, _ in events], dtype=np.float64)
        order = np.argsort(ts, kind="stable")  # stable: equal timestamps keep input order
        ts = ts[order]
        cat_cols: dict[str, np.ndarray] = {}
        num_cols: dict[str, np.ndarray] = {}
        for f in schema.fields:
            raw = [events[i][1].get(f.name) for i in order]
            if f.kind == CATEGORICAL:
                idx = vocab_index[f.name]
                ids = np.empty(len(raw), dtype=np.uint32)
                for i, v in enumerate(raw):
                    if v is None:
                        ids[i] = MISSING_CATEGORY
                        continue
                    v = str(v)
                    code = idx.get(v)
                    if code is None:
                        code = len(vocabs[f.name])
                        vocabs[f.name].append(v)
                        idx[v] = code
                    ids[i] = code
                cat_cols[f.name] = ids
            else:
                vals = np.empty(len(raw), dtype=np.float64)
                for i, v in enumerate(raw):
                    if v is None:
                        vals[i] = np.nan
                    else:
                        try:
                            vals[i] = float(v)
                        except (TypeError, ValueError):
                            raise IngestError(
                                f"sequence {seq_id!r}: non-numeric value {v!r} for {f.name!r}"
                            ) from None
                num_cols[f.name] = vals
        sequences.append(EventSequence(seq_id, ts, cat_cols, num_cols))

    final_schema = EventSchema(
        schema.timestamp_field,
        schema.fields,
        {name: tuple(vals) for name, vals in vocabs.items()},
    )
    return Dataset(final_schema, tuple(sequences))


def _infer_target_kind(values: np.ndarray) -> str:
    if np.all(np.isin(values, (0.0, 1.0))):
        return BINARY
    if np.all(values == np.round(values)) and np.unique(values).size <= 20:
        return MULTICLASS
    return REGRESSION


def import_labels(
    dataset: Dataset,
    csv_path: str | Path,
    kinds: dict[str, str] | None = None,
) -> Dataset:
    """Attach labels from a CSV with header ``id,target1,...``.

    Target kinds are inferred (0/1 -> binary, small integer range ->
    multiclass, else regression) unless overridden via ``kinds``.
    """
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "id":
            raise IngestError("labels CSV must start with an 'id' column")
        targets = header[1:]
        if not targets:
            raise IngestError("labels CSV has no target columns")
        by_id: dict[str, list[float]] = {}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise IngestError(f"line {lineno}: expected {len(header)} cells")
            seq_id = row[0]
            if seq_id in by_id:
                raise IngestError(f"line {lineno}: duplicate label id {seq_id!r}")
            try:
                by_id[seq_id] = [float(v) for v in row[1:]]
            except ValueError:
                raise IngestError(f"line {lineno}: non-numeric label cell") from None

    extra = sorted(set(by_id) - set(dataset.sequence_ids))
    if extra:
        warnings.warn(f"labels CSV: dropped {len(extra)} ids not in dataset", stacklevel=2)
    missing = [i for i in dataset.sequence_ids if i not in by_id]
    if missing:
        raise IngestError(f"labels CSV: missing id {missing[0]!r} ({len(missing)} total)")

    rows = np.array([by_id[i] for i in dataset.sequence_ids], dtype=np.float64)
    if not np.all(np.isfinite(rows)):
        raise IngestError("labels CSV contains non-finite values")
    labels = {}
    for j, name in enumerate(targets):
        kind = (kinds or {}).get(name) or _infer_target_kind(rows[:, j])
        labels[name] = TargetLabels(kind, rows[:, j])
    return dataset.with_labels(labels)


def import_embeddings(dataset: Dataset, csv_path: str | Path) -> Dataset:
    """Attach embeddings from a CSV with header ``id,e0..e{d-1}``.

    Rows are reordered to the dataset's sequence order. Ids absent from
    the dataset are dropped with a warning; missing or duplicate dataset
    ids are errors, as are non-finite cells.
    """
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "id":
            raise IngestError("embeddings CSV must start with an 'id' column")
        dim = len(header) - 1
        expected = [f"e{j}" for j in range(dim)]
        if dim < 1 or header[1:] != expected:
            raise IngestError("embeddings CSV header must be id,e0..e{d-1}")
        by_id: dict[str, np.ndarray] = {}
        n_dropped = 0
        wanted = set(dataset.sequence_ids)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != dim + 1:
                raise IngestError(f"line {lineno}: expected {dim + 1} cells")
            seq_id = row[0]
            if seq_id not in wanted:
                n_dropped += 1
                continue
            if seq_id in by_id:
                raise IngestError(f"line {lineno}: duplicate embedding id {seq_id!r}")
            try:
                vec = np.array([float(v) for v in row[1:]], dtype=np.float64)
            except ValueError:
                raise IngestError(f"line {lineno}: non-numeric embedding cell") from None
            if not np.all(np.isfinite(vec)):
                raise IngestError(f"line {lineno}: non-finite embedding cell")
            by_id[seq_id] = vec

    if n_dropped:
        warnings.warn(f"embeddings CSV: dropped {n_dropped} extra ids", stacklevel=2)
        logger.warning("embeddings CSV: dropped %d ids not present in dataset", n_dropped)
    missing = [i for i in dataset.sequence_ids if i not in by_id]
    if missing:
        raise IngestError(f"embeddings CSV: missing id {missing[0]!r} ({len(missing)} total)")
    rows = np.stack([by_id[i] for i in dataset.sequence_ids])
    return dataset.with_embeddings(EmbeddingMatrix(rows))


def _fmt(x: float) -> str:
    """Shortest decimal form that round-trips to the same float64."""
    return repr(float(x))


def export_embeddings(dataset: Dataset, csv_path: str | Path) -> None:
    if dataset.embeddings is None:
        raise DataError("dataset has no embeddings to export")
    write_embeddings_csv(dataset.sequence_ids, dataset.embeddings.rows, csv_path)


def write_embeddings_csv(ids, rows: np.ndarray, csv_path: str | Path) -> None:
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + [f"e{j}" for j in range(rows.shape[1])])
        for seq_id, row in zip(ids, rows):
            writer.writerow([seq_id] + [_fmt(v) for v in row])


def export_events(dataset: Dataset, events_path: str | Path) -> None:
    """Write events back to line-delimited JSON (inverse of ingest_events)."""
    with open(events_path, "w", encoding="utf-8") as fh:
        for seq in dataset.sequences:
            for i in range(len(seq)):
                rec: dict = {SEQUENCE_ID_KEY: seq.sequence_id,
                             dataset.schema.timestamp_field: seq.timestamps[i]}
                for name, col in seq.categorical.items():
                    if col[i] != MISSING_CATEGORY:
                        rec[name] = dataset.schema.vocabulary(name)[col[i]]
                for name, col in seq.numeric.items():
                    if not math.isnan(col[i]):
                        rec[name] = col[i]
                fh.write(json.dumps(rec) + "\n")


def export_labels(dataset: Dataset, csv_path: str | Path) -> None:
    names = sorted(dataset.labels)
    if not names:
        raise DataError("dataset has no labels to export")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + names)
        for i, seq_id in enumerate(dataset.sequence_ids):
            writer.writerow([seq_id] + [_fmt(dataset.labels[n].values[i]) for n in names])
