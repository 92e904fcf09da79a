"""Cross-validated losses and pooled out-of-fold metrics.

Binary targets use log-loss, multiclass targets use one-vs-rest softmax
log-loss, regression targets use MAE. Per-fold losses are retained so
paired significance tests can run over the same folds.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from ..dataset.core import BINARY, MULTICLASS, REGRESSION
from ..dataset.folds import FoldPlan
from .gbt import LOGISTIC, SQUARED, GbtConfig, GbtModel, fit
from .metrics import (
    EvalMetrics,
    metric_accuracy,
    metric_auc,
    metric_logloss,
    metric_mae,
    metric_multiclass_logloss,
    metric_r2,
)


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _fit_predict(config: GbtConfig, kind: str, X_tr, y_tr, X_te) -> np.ndarray:
    """Predictions on the test split: probabilities (binary), class
    probability matrix (multiclass), or values (regression)."""
    if kind == BINARY:
        model = fit(replace(config, loss=LOGISTIC), X_tr, y_tr)
        return model.predict(X_te)
    if kind == MULTICLASS:
        n_classes = int(y_tr.max()) + 1
        raw = np.empty((X_te.shape[0], n_classes), dtype=np.float64)
        for c in range(n_classes):
            model = fit(replace(config, loss=LOGISTIC), X_tr, (y_tr == c).astype(np.float64))
            raw[:, c] = model.predict_raw(X_te)
        return _softmax(raw)
    model = fit(replace(config, loss=SQUARED), X_tr, y_tr)
    return model.predict(X_te)


def _fold_loss(kind: str, y_te: np.ndarray, pred) -> float:
    if kind == BINARY:
        return metric_logloss(y_te, pred)
    if kind == MULTICLASS:
        return metric_multiclass_logloss(y_te, pred)
    return metric_mae(y_te, pred)


def cross_val_loss(
    config: GbtConfig,
    X,
    y,
    fold_plan: FoldPlan,
    kind: str = REGRESSION,
    workers: int = 1,
) -> tuple[float, np.ndarray]:
    """Mean CV loss and per-fold losses under the given fold plan."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)

    def one_fold(f: int) -> float:
        tr, te = fold_plan.train_rows(f), fold_plan.test_rows(f)
        pred = _fit_predict(config, kind, X[tr], y[tr], X[te])
        return _fold_loss(kind, y[te], pred)

    if workers <= 1:
        per_fold = [one_fold(f) for f in range(fold_plan.k)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_fold = list(pool.map(one_fold, range(fold_plan.k)))
    per_fold = np.asarray(per_fold, dtype=np.float64)
    return float(per_fold.mean()), per_fold


def oof_predictions(
    config: GbtConfig,
    X,
    y,
    fold_plan: FoldPlan,
    kind: str = REGRESSION,
    workers: int = 1,
) -> np.ndarray:
    """Pooled out-of-fold predictions, each row predicted by the model
    that never saw it."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if kind == MULTICLASS:
        out = np.empty((X.shape[0], int(y.max()) + 1), dtype=np.float64)
    else:
        out = np.empty(X.shape[0], dtype=np.float64)

    def one_fold(f: int) -> None:
        tr, te = fold_plan.train_rows(f), fold_plan.test_rows(f)
        out[te] = _fit_predict(config, kind, X[tr], y[tr], X[te])

    if workers <= 1:
        for f in range(fold_plan.k):
            one_fold(f)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one_fold, range(fold_plan.k)))
    return out


def cv_metric(
    config: GbtConfig, X, y, fold_plan: FoldPlan, kind: str, workers: int = 1
) -> float:
    """Scalar validation metric on pooled OOF predictions: AUC (binary),
    accuracy (multiclass), MAE (regression)."""
    pred = oof_predictions(config, X, y, fold_plan, kind, workers)
    y = np.asarray(y, dtype=np.float64)
    if kind == BINARY:
        return metric_auc(y, pred)
    if kind == MULTICLASS:
        return metric_accuracy(y, np.argmax(pred, axis=1).astype(np.float64))
    return metric_mae(y, pred)


def metric_improves(kind: str, new: float, old: float) -> bool:
    """Strict improvement in the task's metric direction."""
    if kind == REGRESSION:
        return new < old
    return new > old


def cv_metrics_report(
    config: GbtConfig, X, y, fold_plan: FoldPlan, kind: str, workers: int = 1
) -> EvalMetrics:
    """Full metric bundle on pooled OOF predictions for report output."""
    pred = oof_predictions(config, X, y, fold_plan, kind, workers)
    y = np.asarray(y, dtype=np.float64)
    if kind == BINARY:
        return EvalMetrics(
            auc=metric_auc(y, pred),
            accuracy=metric_accuracy(y, (pred > 0.5).astype(np.float64)),
            logloss=metric_logloss(y, pred),
        )
    if kind == MULTICLASS:
        return EvalMetrics(
            accuracy=metric_accuracy(y, np.argmax(pred, axis=1).astype(np.float64)),
            logloss=metric_multiclass_logloss(y, pred),
        )
    return EvalMetrics(
        r2=metric_r2(y, pred),
        mae=metric_mae(y, pred),
    )
