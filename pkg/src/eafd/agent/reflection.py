"""Structured feedback document conditioning each generation round."""

from __future__ import annotations

import json

import numpy as np

from ..dataset.core import BINARY, MULTICLASS, Dataset
from ..dataset.schema import CATEGORICAL, MISSING_CATEGORY

_SAMPLE_SEQUENCES = 3
_SAMPLE_EVENTS = 20


def _schema_summary(dataset: Dataset) -> dict:
    fields = []
    for f in dataset.schema.fields:
        entry = {"name": f.name, "kind": f.kind}
        if f.kind == CATEGORICAL:
            vocab = dataset.schema.vocabulary(f.name)
            entry["vocabulary_size"] = len(vocab)
            entry["example_categories"] = list(vocab[:8])
        fields.append(entry)
    return {
        "timestamp_field": dataset.schema.timestamp_field,
        "fields": fields,
        "n_sequences": dataset.n_sequences,
    }


def _label_summary(dataset: Dataset, target: str) -> dict:
    labels = dataset.target(target)
    out = {"target": target, "kind": labels.kind, "n": int(labels.values.size)}
    if labels.kind == BINARY:
        out["positive_rate"] = round(float(labels.values.mean()), 4)
    elif labels.kind == MULTICLASS:
        counts = np.bincount(labels.values.astype(int))
        out["class_counts"] = counts.tolist()
    else:
        out["mean"] = round(float(labels.values.mean()), 4)
        out["std"] = round(float(labels.values.std()), 4)
    return out


def _sample_sequences(dataset: Dataset, n_sequences: int, n_events: int) -> list[dict]:
    samples = []
    for seq in dataset.sequences[:n_sequences]:
        take = min(len(seq), n_events)
        events = []
        for i in range(take):
            ev = {"t": round(float(seq.timestamps[i]), 3)}
            for name, col in seq.categorical.items():
                if col[i] != MISSING_CATEGORY:
                    ev[name] = dataset.schema.vocabulary(name)[col[i]]
            for name, col in seq.numeric.items():
                if not np.isnan(col[i]):
                    ev[name] = round(float(col[i]), 4)
            events.append(ev)
        samples.append(
            {
                "sequence_id": seq.sequence_id,
                "n_events_total": len(seq),
                "events": events,
            }
        )
    return samples


def _record_brief(record) -> dict:
    return {
        "dsl": record.dsl,
        "reconstruction_ef": _round(record.reconstruction_ef),
        "alignment_fe": _round(record.alignment_fe),
        "utility": _round(record.utility),
        "p_value": _round(record.p_value),
        "verdict": record.verdict,
        "importance_rank": record.importance_rank,
    }


def _round(v, nd: int = 4):
    return None if v is None else round(float(v), nd)


def build_reflection(state, dataset: Dataset, target: str, budget_tokens: int = 6000) -> dict:
    """Deterministic reflection document within a token-estimate budget.

    The token estimate is bytes/4; sample sequences are truncated first
    (fewer events, then fewer sequences) until the document fits, and
    ``truncated`` records whether anything was cut.
    """
    scored = list(state.ledger)
    with_recon = [r for r in scored if r.reconstruction_ef is not None]
    by_recon = sorted(with_recon, key=lambda r: (-r.reconstruction_ef, r.dsl))
    aligned_top = [_record_brief(r) for r in by_recon[:3]]
    orthogonal_top = [_record_brief(r) for r in sorted(
        with_recon, key=lambda r: (r.reconstruction_ef, r.dsl))[:3]]
    last_scores = [
        {"dsl": r.dsl, "utility": _round(r.utility), "p_value": _round(r.p_value), "verdict": r.verdict}
        for r in scored
        if r.iteration == state.iteration
    ]
    error_digest = [
        {"dsl": r["dsl"], "diagnostic": r["diagnostics"][-1]}
        for r in state.rejections
        if r["iteration"] == state.iteration
    ]

    n_seqs, n_events = _SAMPLE_SEQUENCES, _SAMPLE_EVENTS
    truncated = False
    while True:
        doc = {
            "iteration": state.iteration,
            "remaining_budget": state.budget_remaining,
            "dataset": _schema_summary(dataset),
            "labels": _label_summary(dataset, target),
            "validation_metric": _round(state.metric),
            "accepted_features": [_record_brief(r) for r in state.accepted],
            "exemplars": {"aligned_top": aligned_top, "orthogonal_top": orthogonal_top},
            "last_iteration_scores": last_scores,
            "failed_candidates": error_digest,
            "sample_sequences": _sample_sequences(dataset, n_seqs, n_events),
            "truncated": truncated,
        }
        size = len(reflection_text(doc).encode("utf-8"))
        if size // 4 <= budget_tokens:
            return doc
        truncated = True
        if n_events > 2:
            n_events = max(2, n_events // 2)
        elif n_seqs > 0:
            n_seqs -= 1
        else:
            # beyond samples, trim the candidate lists
            if last_scores:
                last_scores = last_scores[: max(0, len(last_scores) - 2)]
            elif aligned_top or orthogonal_top:
                aligned_top = aligned_top[:1]
                orthogonal_top = orthogonal_top[:1]
            else:
                return doc


def reflection_text(doc: dict) -> str:
    """Stable serialization injected into prompts (sorted keys)."""
    return json.dumps(doc, sort_keys=True, indent=1)
