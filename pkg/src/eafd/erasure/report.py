"""Before/after erasure report: per-group reconstruction and downstream impact."""

from __future__ import annotations

import numpy as np

from ..dataset.folds import FoldPlan
from ..fdsl.categories import ALL_CATEGORIES
from ..probe.cv import cv_metrics_report
from ..scoring.records import ScoringConfig
from ..scoring.scores import reconstruction_ef


def erasure_report(
    Z: np.ndarray,
    Z_erased: np.ndarray,
    catalog: list[dict],
    columns: np.ndarray,
    y: np.ndarray,
    kind: str,
    fold_plan: FoldPlan,
    config: ScoringConfig,
    erased_group: str,
    workers: int = 1,
) -> dict:
    """Reconstruction R^2 for every catalog feature from the original and
    erased embeddings, aggregated per category with delta in percentage
    points, plus the downstream CV metrics before and after."""
    columns = np.asarray(columns, dtype=np.float64)

    def recon(embeddings, j):
        return reconstruction_ef(
            columns[:, j], embeddings, fold_plan, config.probe,
            config.min_rows_for_reconstruction,
        )

    features = []
    for j, entry in enumerate(catalog):
        before = recon(Z, j)
        after = recon(Z_erased, j)
        features.append(
            {
                "dsl": entry["dsl"],
                "category": entry["category"],
                "r2_before": before,
                "r2_after": after,
                "delta_pp": None if before is None or after is None
                else (after - before) * 100.0,
            }
        )

    groups = {}
    for cat in ALL_CATEGORIES:
        rows = [f for f in features if f["category"] == cat and f["delta_pp"] is not None]
        if not rows:
            continue
        groups[cat] = {
            "mean_r2_before": float(np.mean([f["r2_before"] for f in rows])),
            "mean_r2_after": float(np.mean([f["r2_after"] for f in rows])),
            "mean_delta_pp": float(np.mean([f["delta_pp"] for f in rows])),
            "n_features": len(rows),
        }

    downstream_before = cv_metrics_report(config.probe, Z, y, fold_plan, kind, workers)
    downstream_after = cv_metrics_report(config.probe, Z_erased, y, fold_plan, kind, workers)
    return {
        "erased_group": erased_group,
        "groups": groups,
        "features": features,
        "downstream_before": downstream_before.to_json(),
        "downstream_after": downstream_after.to_json(),
    }
