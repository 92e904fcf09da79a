"""The iterative discovery loop: reflect, generate, repair, score, select.

Each iteration asks the generator for candidates conditioned on a
reflection of everything learned so far, validates and repairs them,
scores survivors against the current accepted set, and greedily accepts
complementary candidates in descending uplift order while the feature
budget lasts and each acceptance strictly improves the accepted-set CV
metric. With the mock generator the whole run is a pure function of
(dataset, config, script).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field

import numpy as np

from .. import __version__
from ..dataset.core import Dataset
from ..dataset.folds import FoldPlan, split_folds
from ..fdsl import CompiledFeature, DslError, compile_feature, evaluate_batch
from ..fdsl.categories import ALL_CATEGORIES
from ..probe.cv import cv_metric, metric_improves
from ..probe.gbt import LOGISTIC, SQUARED, fit
from ..scoring.records import COMPLEMENTARY, CandidateRecord, ScoringConfig
from ..scoring.reports import feature_importance, group_report
from ..scoring.scores import baseline_cv_losses, score_candidates
from .generators import GeneratorSpec, GeneratorUnreachable, make_generator
from .prompts import PROMPT_VERSION
from .reflection import build_reflection, reflection_text

PROBE_SEQUENCES = 10


@dataclass(frozen=True)
class DiscoveryConfig:
    target: str
    generator: GeneratorSpec
    iterations: int = 5
    budget: int = 40
    batch_size: int = 10
    scoring: ScoringConfig = dc_field(default_factory=ScoringConfig)
    reflection_token_budget: int = 6000
    repair_max_rounds: int = 3
    workers: int = 1

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "generator": self.generator.to_json(),
            "iterations": self.iterations,
            "budget": self.budget,
            "batch_size": self.batch_size,
            "scoring": self.scoring.to_json(),
            "reflection_token_budget": self.reflection_token_budget,
            "repair_max_rounds": self.repair_max_rounds,
        }


@dataclass
class IterationState:
    """Mutable loop state; ``column_cache`` keeps every scored column so
    final reports can probe ledger features without re-evaluating."""

    iteration: int = 0
    accepted: list[CandidateRecord] = dc_field(default_factory=list)
    accepted_columns: np.ndarray | None = None
    ledger: list[CandidateRecord] = dc_field(default_factory=list)
    rejections: list[dict] = dc_field(default_factory=list)
    metric: float = 0.0
    budget_remaining: int = 0
    trajectory: list[dict] = dc_field(default_factory=list)
    column_cache: dict = dc_field(default_factory=dict)

    def ledger_texts(self) -> set[str]:
        return {r.dsl for r in self.ledger}


def validate_candidate(dsl_text: str, dataset: Dataset) -> CompiledFeature:
    """Parse, type-check, and smoke-evaluate a candidate on a few sequences."""
    compiled = compile_feature(dsl_text, dataset.schema)
    for seq in dataset.sequences[:PROBE_SEQUENCES]:
        try:
            compiled.evaluate(seq)
        except Exception as exc:  # degenerate cases must map to missing, not raise
            raise DslError("type", f"evaluation raised {type(exc).__name__}: {exc}") from exc
    return compiled


def repair(generator, candidate_text: str, first_error: DslError, dataset: Dataset,
           max_rounds: int = 3) -> tuple[CompiledFeature | None, list[dict]]:
    """Re-prompt with the failing text and diagnostic until it validates.

    Returns (compiled, diagnostics); compiled is None after max_rounds
    of failures or a generator failure mid-repair.
    """
    diagnostics = [dict(first_error.to_json(), dsl=candidate_text)]
    text = candidate_text
    for _ in range(max_rounds):
        try:
            fixed = generator.repair(text, str(first_error))
        except GeneratorUnreachable as exc:
            diagnostics.append({"code": "transport", "message": str(exc), "dsl": text})
            return None, diagnostics
        if fixed is None:
            diagnostics.append({"code": "no_repair", "message": "generator offered no fix", "dsl": text})
            return None, diagnostics
        text = fixed
        try:
            return validate_candidate(text, dataset), diagnostics
        except DslError as exc:
            first_error = exc
            diagnostics.append(dict(exc.to_json(), dsl=text))
    return None, diagnostics


def run_iteration(
    state: IterationState,
    dataset: Dataset,
    config: DiscoveryConfig,
    generator,
    fold_plan: FoldPlan,
) -> IterationState:
    """One reflect->generate->repair->dedup->score->select round."""
    iteration = state.iteration + 1
    labels = dataset.target(config.target)
    Z = dataset.embeddings.rows

    reflection = build_reflection(state, dataset, config.target, config.reflection_token_budget)
    raw = generator.generate(reflection_text(reflection), config.batch_size, iteration)

    compiled: list[CompiledFeature] = []
    n_duplicates = 0
    seen = state.ledger_texts()
    for item in raw:
        try:
            feat = validate_candidate(item["dsl"], dataset)
            diags: list[dict] = []
        except DslError as exc:
            feat, diags = repair(
                generator, item["dsl"], exc, dataset, config.repair_max_rounds
            )
        if feat is None:
            state.rejections.append(
                {"iteration": iteration, "dsl": item["dsl"], "diagnostics": diags}
            )
            continue
        if feat.text in seen:
            n_duplicates += 1
            continue
        seen.add(feat.text)
        compiled.append(feat)

    records: list[CandidateRecord] = []
    if compiled:
        matrix = evaluate_batch(compiled, dataset, workers=config.workers)
        baseline = baseline_cv_losses(
            Z, state.accepted_columns, labels.values, labels.kind, fold_plan,
            config.scoring.probe, workers=config.workers,
        )
        records = score_candidates(
            matrix.values,
            list(matrix.names),
            [f.category for f in compiled],
            iteration,
            Z,
            labels.values,
            labels.kind,
            fold_plan,
            config.scoring,
            accepted_columns=state.accepted_columns,
            baseline=baseline,
            workers=config.workers,
        )
        for j, rec in enumerate(records):
            state.column_cache[rec.dsl] = matrix.values[:, j]
        state.ledger.extend(records)

    # greedy conditional acceptance: descending uplift, strict metric gate
    added: list[CandidateRecord] = []
    candidates = sorted(
        (r for r in records if r.verdict == COMPLEMENTARY),
        key=lambda r: (-r.utility, r.dsl),
    )
    for rec in candidates:
        if state.budget_remaining <= 0:
            break
        col = state.column_cache[rec.dsl].reshape(-1, 1)
        trial_columns = (
            col if state.accepted_columns is None
            else np.concatenate([state.accepted_columns, col], axis=1)
        )
        trial_metric = cv_metric(
            config.scoring.probe,
            np.concatenate([Z, trial_columns], axis=1),
            labels.values,
            fold_plan,
            labels.kind,
            workers=config.workers,
        )
        if metric_improves(labels.kind, trial_metric, state.metric):
            state.accepted_columns = trial_columns
            state.accepted.append(rec)
            state.metric = trial_metric
            state.budget_remaining -= 1
            added.append(rec)

    _refresh_importance_ranks(state, dataset, config, Z, labels)

    added_by_category = {c: 0 for c in ALL_CATEGORIES}
    for rec in added:
        added_by_category[rec.category] += 1
    state.trajectory.append(
        {
            "iteration": iteration,
            "metric": state.metric,
            "n_accepted_total": len(state.accepted),
            "added": len(added),
            "added_by_category": added_by_category,
            "candidates_scored": len(records),
            "n_rejected": sum(1 for r in state.rejections if r["iteration"] == iteration),
            "n_duplicates": n_duplicates,
        }
    )
    state.iteration = iteration
    return state


def _refresh_importance_ranks(state, dataset, config, Z, labels) -> None:
    """Rank accepted features by split gain inside the full downstream model."""
    if not state.accepted:
        return
    X = np.concatenate([Z, state.accepted_columns], axis=1)
    probe = config.scoring.probe
    loss = LOGISTIC if labels.kind in ("binary", "multiclass") else SQUARED
    y = labels.values if labels.kind != "multiclass" else (labels.values == 0).astype(float)
    from dataclasses import replace

    model = fit(replace(probe, loss=loss), X, y)
    ranked = feature_importance(model)
    rank_of = {j: pos + 1 for pos, (j, _) in enumerate(ranked)}
    d = Z.shape[1]
    for q, rec in enumerate(state.accepted):
        rec.importance_rank = rank_of[d + q]


def _config_hash(config: DiscoveryConfig) -> str:
    blob = json.dumps(config.to_json(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def report_header(config_json: dict, scoring: ScoringConfig, seeds: dict) -> dict:
    blob = json.dumps(config_json, sort_keys=True).encode()
    return {
        "artifact_version": __version__,
        "prompt_version": PROMPT_VERSION,
        "config_hash": hashlib.sha256(blob).hexdigest(),
        "seeds": seeds,
        "probe": scoring.probe.to_json(),
        "scoring": scoring.to_json(),
    }


def run_discovery(dataset: Dataset, config: DiscoveryConfig, generator=None) -> dict:
    """Run the full loop and assemble the final report document."""
    if dataset.embeddings is None:
        raise ValueError("discovery requires embeddings")
    labels = dataset.target(config.target)
    if generator is None:
        generator = make_generator(config.generator)
    fold_plan = split_folds(
        dataset, config.target, k=config.scoring.cv_folds, seed=config.scoring.seed
    )
    Z = dataset.embeddings.rows
    baseline_metric = cv_metric(
        config.scoring.probe, Z, labels.values, fold_plan, labels.kind,
        workers=config.workers,
    )

    state = IterationState(metric=baseline_metric, budget_remaining=config.budget)
    incomplete = False
    abort_reason = None
    for _ in range(config.iterations):
        try:
            state = run_iteration(state, dataset, config, generator, fold_plan)
        except GeneratorUnreachable as exc:
            incomplete = True
            abort_reason = str(exc)
            break

    # interpretability view over accepted plus aligned ledger features
    report_catalog = [
        {"dsl": r.dsl, "category": r.category}
        for r in state.ledger
        if r.verdict in ("aligned", COMPLEMENTARY) and r.dsl in state.column_cache
    ]
    groups = None
    if report_catalog:
        columns = np.column_stack([state.column_cache[c["dsl"]] for c in report_catalog])
        groups = group_report(
            report_catalog, columns, Z, fold_plan, config.scoring, workers=config.workers
        )

    scored_by_category = {c: 0 for c in ALL_CATEGORIES}
    for rec in state.ledger:
        scored_by_category[rec.category] += 1
    accepted_by_category = {c: 0 for c in ALL_CATEGORIES}
    for rec in state.accepted:
        accepted_by_category[rec.category] += 1

    return {
        "header": report_header(
            config.to_json(), config.scoring,
            seeds={"scoring": config.scoring.seed, "probe": config.scoring.probe.seed},
        ),
        "target": config.target,
        "target_kind": labels.kind,
        "baseline_metric": baseline_metric,
        "final_metric": state.metric,
        "uplift": state.metric - baseline_metric,
        "iterations_run": state.iteration,
        "incomplete": incomplete,
        "abort_reason": abort_reason,
        "trajectory": state.trajectory,
        "accepted": [r.to_json() for r in state.accepted],
        "ledger": [r.to_json() for r in state.ledger],
        "rejections": state.rejections,
        "type_distribution": {
            "accepted": accepted_by_category,
            "scored": scored_by_category,
        },
        "group_report": groups,
        "fold_digest": fold_plan.digest(),
    }


def canonical_report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_report_files(report: dict, out_dir) -> None:
    """Write report.json, trajectory.csv, and features.json."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(canonical_report_json(report))

    lines = ["iteration,metric,n_accepted,added," + ",".join(ALL_CATEGORIES)]
    lines.append(
        f"0,{report['baseline_metric']!r},0,0," + ",".join("0" for _ in ALL_CATEGORIES)
    )
    for row in report["trajectory"]:
        cats = ",".join(str(row["added_by_category"][c]) for c in ALL_CATEGORIES)
        lines.append(
            f"{row['iteration']},{row['metric']!r},{row['n_accepted_total']},{row['added']},{cats}"
        )
    (out / "trajectory.csv").write_text("\n".join(lines) + "\n")

    features = [
        {"name": f"f{idx:03d}", "dsl": rec["dsl"], "category": rec["category"]}
        for idx, rec in enumerate(report["accepted"])
    ]
    (out / "features.json").write_text(json.dumps(features, indent=2, sort_keys=True) + "\n")
