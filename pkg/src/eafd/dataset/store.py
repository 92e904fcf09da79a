"""On-disk dataset store.

Layout of a store directory:

    schema.json         event schema
    events.bin          column-major little-endian blocks, one block per
                        column (timestamps then schema fields), each the
                        concatenation of per-sequence arrays in dataset order
    events_index.json   sequence ids, lengths, and block offsets
    labels.csv          optional, ``id,target1,...``
    labels_kinds.json   optional, target name -> kind
    embeddings.csv      optional, ``id,e0..e{d-1}``
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import DataError, Dataset, EventSequence
from .ingest import export_embeddings, export_labels, import_embeddings, import_labels
from .schema import CATEGORICAL, EventSchema

_TS = "__timestamp__"
_DTYPES = {"f8": "<f8", "u4": "<u4"}


def save_store(dataset: Dataset, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "schema.json").write_text(dataset.schema.dumps())

    lengths = [len(s) for s in dataset.sequences]
    columns = [(_TS, "f8")]
    for f in dataset.schema.fields:
        columns.append((f.name, "u4" if f.kind == CATEGORICAL else "f8"))

    blocks = []
    offset = 0
    with open(out / "events.bin", "wb") as fh:
        for name, code in columns:
            if name == _TS:
                parts = [s.timestamps for s in dataset.sequences]
            elif code == "u4":
                parts = [s.categorical[name] for s in dataset.sequences]
            else:
                parts = [s.numeric[name] for s in dataset.sequences]
            if parts:
                block = np.concatenate(parts).astype(_DTYPES[code])
            else:
                block = np.empty(0, dtype=_DTYPES[code])
            raw = block.tobytes()
            fh.write(raw)
            blocks.append({"name": name, "dtype": code, "offset": offset, "nbytes": len(raw)})
            offset += len(raw)

    index = {
        "version": 1,
        "sequence_ids": dataset.sequence_ids,
        "lengths": lengths,
        "blocks": blocks,
    }
    (out / "events_index.json").write_text(json.dumps(index, indent=2) + "\n")

    if dataset.labels:
        export_labels(dataset, out / "labels.csv")
        kinds = {name: t.kind for name, t in sorted(dataset.labels.items())}
        (out / "labels_kinds.json").write_text(json.dumps(kinds, indent=2, sort_keys=True) + "\n")
    if dataset.embeddings is not None:
        export_embeddings(dataset, out / "embeddings.csv")


def load_store(store_dir: str | Path) -> Dataset:
    root = Path(store_dir)
    if not (root / "schema.json").exists():
        raise DataError(f"{root}: not a dataset store (schema.json missing)")
    schema = EventSchema.loads((root / "schema.json").read_text())
    index = json.loads((root / "events_index.json").read_text())
    ids: list[str] = index["sequence_ids"]
    lengths = np.asarray(index["lengths"], dtype=np.int64)
    raw = (root / "events.bin").read_bytes()

    cols: dict[str, np.ndarray] = {}
    for block in index["blocks"]:
        dtype = _DTYPES[block["dtype"]]
        start, nbytes = block["offset"], block["nbytes"]
        cols[block["name"]] = np.frombuffer(raw[start : start + nbytes], dtype=dtype)

    bounds = np.concatenate([[0], np.cumsum(lengths)])
    sequences = []
    for i, seq_id in enumerate(ids):
        lo, hi = bounds[i], bounds[i + 1]
        cat = {}
        num = {}
        for f in schema.fields:
            if f.kind == CATEGORICAL:
                cat[f.name] = cols[f.name][lo:hi]
            else:
                num[f.name] = cols[f.name][lo:hi]
        sequences.append(EventSequence(seq_id, cols[_TS][lo:hi], cat, num))
    dataset = Dataset(schema, tuple(sequences))

    if (root / "labels.csv").exists():
        kinds = None
        if (root / "labels_kinds.json").exists():
            kinds = json.loads((root / "labels_kinds.json").read_text())
        dataset = import_labels(dataset, root / "labels.csv", kinds=kinds)
    if (root / "embeddings.csv").exists():
        dataset = import_embeddings(dataset, root / "embeddings.csv")
    return dataset
