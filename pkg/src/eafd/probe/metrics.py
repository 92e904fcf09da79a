"""Evaluation metrics for probe and downstream models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ..validation import as_float_vector

_P_CLIP = 1e-15


@dataclass(frozen=True)
class EvalMetrics:
    """Per-task metric bundle; fields are None when not applicable."""

    r2: float | None = None
    auc: float | None = None
    accuracy: float | None = None
    mae: float | None = None
    logloss: float | None = None

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def metric_r2(y_true, y_pred) -> float:
    """1 - SSE/SST with SST computed from y_true on the same rows.

    Zero-variance targets: defined as 1.0 for perfect predictions and 0.0
    otherwise. May be negative for predictors worse than the mean.
    """
    y_true = as_float_vector(y_true, "y_true")
    y_pred = as_float_vector(y_pred, "y_pred")
    if y_true.shape[0] != y_pred.shape[0]:
        raise ValueError("length mismatch")
    if y_true.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    sse = float(np.sum((y_true - y_pred) ** 2))
    sst = float(np.sum((y_true - y_true.mean()) ** 2))
    if sst == 0.0:
        return 1.0 if sse == 0.0 else 0.0
    return 1.0 - sse / sst


def metric_auc(y_true, scores) -> float:
    """Rank-based ROC-AUC (Mann-Whitney) with midranks for ties."""
    y_true = as_float_vector(y_true, "y_true")
    scores = as_float_vector(scores, "scores")
    if y_true.shape[0] != scores.shape[0]:
        raise ValueError("length mismatch")
    pos = y_true == 1.0
    n_pos = int(pos.sum())
    n_neg = y_true.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    ranks = rankdata(scores)  # midranks on ties
    rank_sum = float(ranks[pos].sum())
    u = rank_sum - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def metric_logloss(y_true, prob) -> float:
    y_true = as_float_vector(y_true, "y_true")
    p = np.clip(as_float_vector(prob, "prob"), _P_CLIP, 1.0 - _P_CLIP)
    return float(-np.mean(y_true * np.log(p) + (1.0 - y_true) * np.log1p(-p)))


def metric_multiclass_logloss(y_true, probs: np.ndarray) -> float:
    y_idx = as_float_vector(y_true, "y_true").astype(np.int64)
    p = np.clip(np.asarray(probs, dtype=np.float64), _P_CLIP, 1.0)
    p = p / p.sum(axis=1, keepdims=True)
    return float(-np.mean(np.log(p[np.arange(y_idx.size), y_idx])))


def metric_mae(y_true, y_pred) -> float:
    y_true = as_float_vector(y_true, "y_true")
    y_pred = as_float_vector(y_pred, "y_pred")
    return float(np.mean(np.abs(y_true - y_pred)))


def metric_accuracy(y_true, y_pred_class) -> float:
    y_true = as_float_vector(y_true, "y_true")
    y_pred_class = as_float_vector(y_pred_class, "y_pred_class")
    return float(np.mean(y_true == y_pred_class))
