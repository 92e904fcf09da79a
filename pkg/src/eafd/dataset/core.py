"""Immutable event-sequence collections with aligned labels and embeddings."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .schema import CATEGORICAL, MISSING_CATEGORY, NUMERIC, EventSchema

BINARY = "binary"
MULTICLASS = "multiclass"
REGRESSION = "regression"


class DataError(ValueError):
    pass


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class EventSequence:
    """One entity's time-ordered events.

    Categorical columns hold vocabulary ids (uint32, ``MISSING_CATEGORY``
    for absent values); numeric columns hold float64 with NaN for absent
    values. Timestamps are float seconds, non-decreasing.
    """

    sequence_id: str
    timestamps: np.ndarray
    categorical: dict[str, np.ndarray] = field(default_factory=dict)
    numeric: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.float64)
        object.__setattr__(self, "timestamps", _freeze(ts))
        if ts.ndim != 1:
            raise DataError(f"{self.sequence_id}: timestamps must be 1-D")
        if not np.all(np.isfinite(ts)):
            raise DataError(f"{self.sequence_id}: non-finite timestamp")
        if ts.size > 1 and np.any(np.diff(ts) < 0):
            raise DataError(f"{self.sequence_id}: timestamps not sorted")
        n = ts.size
        cats = {}
        for name, col in self.categorical.items():
            arr = _freeze(np.asarray(col, dtype=np.uint32))
            if arr.shape != (n,):
                raise DataError(f"{self.sequence_id}: column {name!r} length mismatch")
            cats[name] = arr
        nums = {}
        for name, col in self.numeric.items():
            arr = _freeze(np.asarray(col, dtype=np.float64))
            if arr.shape != (n,):
                raise DataError(f"{self.sequence_id}: column {name!r} length mismatch")
            nums[name] = arr
        object.__setattr__(self, "categorical", cats)
        object.__setattr__(self, "numeric", nums)

    def __len__(self) -> int:
        return self.timestamps.size

    def validate_against(self, schema: EventSchema) -> None:
        for f in schema.fields:
            if f.kind == CATEGORICAL:
                if f.name not in self.categorical:
                    raise DataError(f"{self.sequence_id}: missing column {f.name!r}")
                ids = self.categorical[f.name]
                size = len(schema.vocabulary(f.name))
                bad = (ids >= size) & (ids != MISSING_CATEGORY)
                if np.any(bad):
                    raise DataError(
                        f"{self.sequence_id}: {f.name!r} id out of vocabulary range"
                    )
            else:
                if f.name not in self.numeric:
                    raise DataError(f"{self.sequence_id}: missing column {f.name!r}")


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Frozen n x d embedding rows aligned to a dataset's sequence order."""

    rows: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.rows, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] < 1:
            raise DataError("embeddings must be a 2-D matrix with d >= 1")
        if not np.all(np.isfinite(arr)):
            raise DataError("embeddings contain non-finite entries")
        object.__setattr__(self, "rows", _freeze(arr))

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    @property
    def n(self) -> int:
        return self.rows.shape[0]


@dataclass(frozen=True)
class TargetLabels:
    kind: str  # binary | multiclass | regression
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise DataError("labels must be 1-D")
        if not np.all(np.isfinite(arr)):
            raise DataError("labels contain non-finite values")
        if self.kind not in (BINARY, MULTICLASS, REGRESSION):
            raise DataError(f"unknown target kind {self.kind!r}")
        if self.kind == BINARY and not np.all(np.isin(arr, (0.0, 1.0))):
            raise DataError("binary labels must be 0/1")
        if self.kind == MULTICLASS and not np.all(arr == np.round(arr)):
            raise DataError("multiclass labels must be integral")
        object.__setattr__(self, "values", _freeze(arr))

    @property
    def n_classes(self) -> int:
        if self.kind == REGRESSION:
            raise DataError("regression target has no classes")
        return int(self.values.max()) + 1


@dataclass(frozen=True)
class Dataset:
    """Schema + sequences with optionally attached labels and embeddings.

    Construction validates row alignment and id uniqueness; all arrays are
    frozen so the object can be shared across workers.
    """

    schema: EventSchema
    sequences: tuple[EventSequence, ...]
    labels: dict[str, TargetLabels] = field(default_factory=dict)
    embeddings: EmbeddingMatrix | None = None

    def __post_init__(self):
        object.__setattr__(self, "sequences", tuple(self.sequences))
        ids = [s.sequence_id for s in self.sequences]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate sequence ids")
        for seq in self.sequences:
            seq.validate_against(self.schema)
        n = len(self.sequences)
        for name, target in self.labels.items():
            if target.values.shape[0] != n:
                raise DataError(f"labels for {name!r} have {target.values.shape[0]} rows, expected {n}")
        if self.embeddings is not None and self.embeddings.n != n:
            raise DataError(f"embeddings have {self.embeddings.n} rows, expected {n}")

    @property
    def n_sequences(self) -> int:
        return len(self.sequences)

    @property
    def sequence_ids(self) -> list[str]:
        return [s.sequence_id for s in self.sequences]

    def with_labels(self, labels: dict[str, TargetLabels]) -> "Dataset":
        merged = dict(self.labels)
        merged.update(labels)
        return Dataset(self.schema, self.sequences, merged, self.embeddings)

    def with_embeddings(self, embeddings: EmbeddingMatrix) -> "Dataset":
        return Dataset(self.schema, self.sequences, dict(self.labels), embeddings)

    def target(self, name: str) -> TargetLabels:
        try:
            return self.labels[name]
        except KeyError:
            raise DataError(f"no labels for target {name!r}") from None
