from .cv import (
    cross_val_loss,
    cv_metric,
    cv_metrics_report,
    metric_improves,
    oof_predictions,
)
from .gbt import (
    LOGISTIC,
    SQUARED,
    BoostedTreesClassifier,
    BoostedTreesRegressor,
    GbtConfig,
    GbtModel,
    fit,
)
from .metrics import (
    EvalMetrics,
    metric_accuracy,
    metric_auc,
    metric_logloss,
    metric_mae,
    metric_multiclass_logloss,
    metric_r2,
)

__all__ = [
    "LOGISTIC",
    "SQUARED",
    "BoostedTreesClassifier",
    "BoostedTreesRegressor",
    "EvalMetrics",
    "GbtConfig",
    "GbtModel",
    "cross_val_loss",
    "cv_metric",
    "cv_metrics_report",
    "fit",
    "metric_accuracy",
    "metric_auc",
    "metric_improves",
    "metric_logloss",
    "metric_mae",
    "metric_multiclass_logloss",
    "metric_r2",
    "oof_predictions",
]
