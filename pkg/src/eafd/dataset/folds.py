"""Deterministic cross-validation fold assignment."""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass

import numpy as np

from .core import REGRESSION, DataError, Dataset


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray  # fold index per row
    seed: int
    stratified: bool

    def __post_init__(self):
        arr = np.asarray(self.assignments, dtype=np.int32)
        arr.flags.writeable = False
        object.__setattr__(self, "assignments", arr)
        counts = np.bincount(arr, minlength=self.k)
        if np.any(counts == 0):
            raise DataError("every fold must be non-empty")

    @property
    def n(self) -> int:
        return self.assignments.size

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def digest(self) -> str:
        """Content hash used to assert paired models saw identical folds."""
        h = hashlib.sha256()
        h.update(f"{self.k}:{self.seed}:".encode())
        h.update(self.assignments.tobytes())
        return h.hexdigest()


def split_folds(dataset_or_labels, target: str | None = None, k: int = 5, seed: int = 0) -> FoldPlan:
    """Assign each row to one of ``k`` folds, stratified for classification.

    Accepts either a Dataset plus target name, or a bare label array
    (kind inferred as regression when ``target`` is None). Stratification
    keeps per-fold class counts within one sample of proportionality;
    classes smaller than ``k`` trigger an unstratified fallback with a
    warning.
    """
    if isinstance(dataset_or_labels, Dataset):
        labels = dataset_or_labels.target(target)
        values, kind = labels.values, labels.kind
    else:
        values = np.asarray(dataset_or_labels, dtype=np.float64)
        kind = REGRESSION if target is None else target
    n = values.shape[0]
    if k < 2:
        raise DataError("fold count must be >= 2")
    if n < 2 * k:
        raise DataError(f"need at least {2 * k} rows for k={k}, got {n}")

    rng = np.random.default_rng(seed)
    assignments = np.empty(n, dtype=np.int32)
    stratified = kind != REGRESSION
    if stratified:
        classes, counts = np.unique(values, return_counts=True)
        if np.any(counts < k):
            small = classes[counts < k]
            warnings.warn(
                f"class {small[0]!r} has fewer than {k} members; falling back to unstratified folds",
                stacklevel=2,
            )
            stratified = False
    if stratified:
        # Deal each class round-robin after a seeded shuffle; fold sizes per
        # class differ by at most one sample from exact proportionality.
        for cls in classes:
            rows = np.flatnonzero(values == cls)
            rng.shuffle(rows)
            assignments[rows] = np.arange(rows.size) % k
    else:
        order = rng.permutation(n)
        assignments[order] = np.arange(n) % k
    return FoldPlan(k=k, assignments=assignments, seed=seed, stratified=stratified)
