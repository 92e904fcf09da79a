"""Alignment, reconstruction, and uplift scores for candidate features.

Two probe directions are computed for every candidate: feature(s) ->
embedding (``alignment_fe``, averaged over embedding dimensions) and
embedding -> feature (``reconstruction_ef``). The headline number used
by the verdict rule is the reconstruction direction; a single scalar
column rarely pins down a high-dimensional embedding, so the
feature->embedding direction is reported alongside rather than
thresholded.

Utility is the paired CV-loss drop from appending the candidate to the
embedding-plus-accepted representation, with a one-sided paired t-test
across folds.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import ttest_rel

from ..dataset.folds import FoldPlan
from ..probe.cv import cross_val_loss
from ..probe.gbt import GbtConfig, fit
from ..probe.metrics import metric_r2
from ..validation import check_aligned_rows
from .records import CandidateRecord, ScoringConfig, categorize


def _hstack(*parts) -> np.ndarray:
    cols = []
    n = None
    for part in parts:
        if part is None:
            continue
        arr = np.asarray(part, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.shape[1] == 0:
            continue
        cols.append(arr)
        n = arr.shape[0]
    if not cols:
        return np.empty((0 if n is None else n, 0))
    return np.concatenate(cols, axis=1)


def _oof_r2(
    probe: GbtConfig,
    X: np.ndarray,
    y: np.ndarray,
    plan: FoldPlan,
    rows: np.ndarray | None = None,
) -> float | None:
    """Pooled out-of-fold R^2 of a regression probe X -> y.

    ``rows`` restricts both training and evaluation (pairwise exclusion
    of missing targets). Returns None when a training split is too small
    to fit.
    """
    keep = np.ones(y.shape[0], dtype=bool) if rows is None else rows
    pred = np.empty(y.shape[0], dtype=np.float64)
    for f in range(plan.k):
        tr = plan.train_rows(f)
        tr = tr[keep[tr]]
        te = plan.test_rows(f)
        te = te[keep[te]]
        if tr.size < 2 * probe.min_samples_leaf or te.size == 0:
            return None
        model = fit(probe, X[tr], y[tr])
        pred[te] = model.predict(X[te])
    idx = np.flatnonzero(keep)
    if idx.size < 2:
        return None
    return metric_r2(y[idx], pred[idx])


def alignment_fe(
    candidate_columns,
    embeddings,
    fold_plan: FoldPlan,
    probe: GbtConfig = GbtConfig(),
) -> float:
    """Mean out-of-fold R^2 of probes mapping the candidate column(s) to
    each embedding dimension; zero-variance dimensions are excluded, and
    a fully excluded embedding scores 0."""
    X = np.asarray(candidate_columns, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    Z = np.asarray(embeddings, dtype=np.float64)
    check_aligned_rows(X, Z, names=("candidates", "embeddings"))
    scores = []
    for j in range(Z.shape[1]):
        zj = Z[:, j]
        if np.ptp(zj) == 0.0:
            continue
        r2 = _oof_r2(probe, X, zj, fold_plan)
        if r2 is not None:
            scores.append(r2)
    if not scores:
        return 0.0
    return float(np.mean(scores))


def reconstruction_ef(
    feature_column,
    embeddings,
    fold_plan: FoldPlan,
    probe: GbtConfig = GbtConfig(),
    min_rows: int = 50,
) -> float | None:
    """Out-of-fold R^2 of a probe mapping embeddings to the feature.

    Missing feature cells are excluded pairwise; with fewer than
    ``min_rows`` usable rows the score is undefined (None).
    """
    y = np.asarray(feature_column, dtype=np.float64).reshape(-1)
    Z = np.asarray(embeddings, dtype=np.float64)
    check_aligned_rows(y.reshape(-1, 1), Z, names=("feature", "embeddings"))
    keep = ~np.isnan(y)
    if int(keep.sum()) < min_rows:
        return None
    return _oof_r2(probe, Z, y, fold_plan, rows=keep)


@dataclass(frozen=True)
class BaselineLosses:
    """Cached per-fold CV losses of the embedding-plus-accepted model."""

    per_fold: np.ndarray
    fold_digest: str
    kind: str


def baseline_cv_losses(
    embeddings,
    accepted_columns,
    y,
    kind: str,
    fold_plan: FoldPlan,
    probe: GbtConfig = GbtConfig(),
    workers: int = 1,
) -> BaselineLosses:
    X = _hstack(embeddings, accepted_columns)
    _, per_fold = cross_val_loss(probe, X, y, fold_plan, kind=kind, workers=workers)
    return BaselineLosses(per_fold=per_fold, fold_digest=fold_plan.digest(), kind=kind)


def paired_uplift_pvalue(base_per_fold: np.ndarray, aug_per_fold: np.ndarray) -> float:
    """One-sided paired t-test p-value for mean(base - aug) > 0.

    Identical fold losses (zero variance in the differences) are
    maximally insignificant: p = 1.
    """
    diff = np.asarray(base_per_fold) - np.asarray(aug_per_fold)
    if np.all(diff == 0.0):
        return 1.0
    with np.errstate(all="ignore"):
        result = ttest_rel(base_per_fold, aug_per_fold, alternative="greater")
    p = float(result.pvalue)
    return 1.0 if np.isnan(p) else p


def utility(
    candidate_columns,
    accepted_columns,
    embeddings,
    y,
    kind: str,
    fold_plan: FoldPlan,
    probe: GbtConfig = GbtConfig(),
    baseline: BaselineLosses | None = None,
) -> tuple[float, np.ndarray, float]:
    """Uplift of appending the candidate to [embeddings, accepted].

    Returns (mean uplift, per-fold uplifts, one-sided p-value). Both
    models are evaluated on exactly the same folds; a cached baseline is
    accepted only if its fold digest matches.
    """
    y = np.asarray(y, dtype=np.float64)
    if baseline is None:
        baseline = baseline_cv_losses(embeddings, accepted_columns, y, kind, fold_plan, probe)
    if baseline.fold_digest != fold_plan.digest():
        raise ValueError("baseline losses were computed under a different fold plan")
    X_aug = _hstack(embeddings, accepted_columns, candidate_columns)
    _, aug_per_fold = cross_val_loss(probe, X_aug, y, fold_plan, kind=kind)
    per_fold_uplift = baseline.per_fold - aug_per_fold
    p = paired_uplift_pvalue(baseline.per_fold, aug_per_fold)
    return float(per_fold_uplift.mean()), per_fold_uplift, p


def score_candidates(
    columns: np.ndarray,
    texts: list[str],
    categories: list[str],
    iteration: int,
    embeddings,
    y,
    kind: str,
    fold_plan: FoldPlan,
    config: ScoringConfig,
    accepted_columns=None,
    baseline: BaselineLosses | None = None,
    workers: int = 1,
) -> list[CandidateRecord]:
    """Score a batch of candidate columns independently against the same
    accepted set; results come back in input order regardless of workers."""
    columns = np.asarray(columns, dtype=np.float64)
    if columns.ndim == 1:
        columns = columns.reshape(-1, 1)
    if baseline is None:
        baseline = baseline_cv_losses(
            embeddings, accepted_columns, y, kind, fold_plan, config.probe, workers=workers
        )

    def score_one(j: int) -> CandidateRecord:
        col = columns[:, j]
        align = alignment_fe(col, embeddings, fold_plan, config.probe)
        recon = reconstruction_ef(
            col, embeddings, fold_plan, config.probe, config.min_rows_for_reconstruction
        )
        u, per_fold, p = utility(
            col, accepted_columns, embeddings, y, kind, fold_plan, config.probe, baseline
        )
        verdict = categorize(u, p, recon, config)
        return CandidateRecord(
            dsl=texts[j],
            category=categories[j],
            iteration=iteration,
            alignment_fe=align,
            reconstruction_ef=recon,
            utility=u,
            utility_per_fold=tuple(per_fold.tolist()),
            p_value=p,
            verdict=verdict,
        )

    indices = range(columns.shape[1])
    if workers <= 1:
        return [score_one(j) for j in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(score_one, indices))
