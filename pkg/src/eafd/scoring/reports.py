"""Group-level reconstruction reports, importance ranking, and
multi-target aggregation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..dataset.folds import FoldPlan
from ..fdsl.categories import ALL_CATEGORIES
from ..probe.gbt import GbtConfig, GbtModel
from .records import ScoringConfig
from .scores import baseline_cv_losses, reconstruction_ef, utility


def feature_importance(model: GbtModel) -> list[tuple[int, float]]:
    """Total split gain per feature, normalized to sum 1, ranked
    descending with ties broken by the lower column index."""
    totals = model.split_gain_totals()
    s = totals.sum()
    if s > 0:
        totals = totals / s
    order = np.lexsort((np.arange(totals.size), -totals))
    return [(int(j), float(totals[j])) for j in order]


def group_report(
    catalog: list[dict],
    columns: np.ndarray,
    embeddings,
    fold_plan: FoldPlan,
    config: ScoringConfig,
    workers: int = 1,
) -> dict:
    """Per-category mean reconstruction R^2 with a per-feature breakdown.

    ``catalog`` entries carry ``dsl`` and ``category``; ``columns[:, i]``
    is the evaluated column of catalog entry i. Empty categories are
    omitted and listed under ``omitted_groups``.
    """
    columns = np.asarray(columns, dtype=np.float64)

    def one(i: int) -> float | None:
        return reconstruction_ef(
            columns[:, i], embeddings, fold_plan, config.probe,
            config.min_rows_for_reconstruction,
        )

    if workers <= 1:
        scores = [one(i) for i in range(len(catalog))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(one, range(len(catalog))))

    features = [
        {"dsl": entry["dsl"], "category": entry["category"], "reconstruction_ef": score}
        for entry, score in zip(catalog, scores)
    ]
    groups = {}
    omitted = []
    for cat in ALL_CATEGORIES:
        member_scores = [
            f["reconstruction_ef"]
            for f in features
            if f["category"] == cat and f["reconstruction_ef"] is not None
        ]
        if not member_scores:
            omitted.append(cat)
            continue
        groups[cat] = {
            "mean_reconstruction_ef": float(np.mean(member_scores)),
            "n_features": len(member_scores),
        }
    return {
        "groups": groups,
        "omitted_groups": omitted,
        "features": features,
    }


def multi_target_utility(
    candidate_column,
    embeddings,
    targets: dict[str, tuple[np.ndarray, str]],
    fold_plans: dict[str, FoldPlan],
    config: ScoringConfig,
    accepted_columns=None,
) -> dict:
    """Aggregate uplift across several targets.

    Each target's uplift is normalized by that target's baseline loss so
    classification and regression scales mix; the aggregate is the mean
    of the normalized uplifts, and the candidate counts as multi-target
    complementary when the aggregate is positive and at least one target
    is individually significant.
    """
    if len(targets) < 2:
        raise ValueError("multi-target aggregation needs at least 2 targets")
    per_target = {}
    normalized = []
    any_significant = False
    for name in sorted(targets):
        y, kind = targets[name]
        plan = fold_plans[name]
        baseline = baseline_cv_losses(
            embeddings, accepted_columns, y, kind, plan, config.probe
        )
        u, per_fold, p = utility(
            candidate_column, accepted_columns, embeddings, y, kind, plan,
            config.probe, baseline,
        )
        base_mean = float(baseline.per_fold.mean())
        norm = u / base_mean if base_mean != 0.0 else 0.0
        significant = u > 0.0 and p <= config.alpha
        any_significant = any_significant or significant
        normalized.append(norm)
        per_target[name] = {
            "kind": kind,
            "utility": u,
            "p_value": p,
            "baseline_loss": base_mean,
            "normalized_uplift": norm,
            "significant": significant,
        }
    aggregate = float(np.mean(normalized))
    return {
        "per_target": per_target,
        "aggregate_normalized_uplift": aggregate,
        "multi_target_complementary": bool(aggregate > 0.0 and any_significant),
    }
