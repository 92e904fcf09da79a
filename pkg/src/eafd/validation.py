"""Small input-validation helpers shared across estimators and pipelines."""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_float_matrix",
    "as_float_vector",
    "check_aligned_rows",
    "check_finite",
]


def as_float_matrix(x, name: str = "X", *, allow_nan: bool = False) -> np.ndarray:
    """Coerce to a 2-D float64 array, (n,) inputs become (n, 1)."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 1-D or 2-D, got shape {arr.shape}")
    if not allow_nan and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_float_vector(x, name: str = "y", *, allow_nan: bool = False) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if not allow_nan and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_aligned_rows(*arrays, names: tuple[str, ...] | None = None) -> int:
    """Assert all arrays share the same number of rows; returns that count."""
    lengths = [a.shape[0] for a in arrays]
    if len(set(lengths)) > 1:
        labels = names if names is not None else [f"arg{i}" for i in range(len(arrays))]
        detail = ", ".join(f"{n}={l}" for n, l in zip(labels, lengths))
        raise ValueError(f"row counts differ: {detail}")
    return lengths[0]


def check_finite(arr: np.ndarray, name: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr
