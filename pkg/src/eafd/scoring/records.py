"""Candidate scoring records, thresholds, and the verdict rule."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..probe.gbt import GbtConfig

COMPLEMENTARY = "complementary"
ALIGNED = "aligned"
UNINFORMATIVE = "uninformative"

VERDICTS = (COMPLEMENTARY, ALIGNED, UNINFORMATIVE)


@dataclass(frozen=True)
class ScoringConfig:
    """Thresholds and probe settings for candidate evaluation.

    ``tau_align`` is compared against the embedding->feature
    reconstruction score; ``alpha`` is the one-sided paired-t level for
    calling an uplift significant. Scores are never clipped: negative
    out-of-fold R^2 is reported as is.

    The scoring probe uses wider leaves than the plain learner default:
    with small leaves the paired uplift test is miscalibrated (appending
    even a pure-noise column nudges CV loss down often enough to flag
    false complements), while at min_samples_leaf=40 noise columns test
    at the nominal false-positive level.
    """

    tau_align: float = 0.5
    alpha: float = 0.05
    cv_folds: int = 5
    seed: int = 0
    min_rows_for_reconstruction: int = 50
    probe: GbtConfig = field(default_factory=lambda: GbtConfig(min_samples_leaf=40))

    def __post_init__(self):
        if not 0.0 < self.tau_align < 1.0:
            raise ValueError("tau_align must be in (0, 1)")
        if not 0.0 < self.alpha < 0.5:
            raise ValueError("alpha must be in (0, 0.5)")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be >= 2")

    def to_json(self) -> dict:
        return {
            "tau_align": self.tau_align,
            "alpha": self.alpha,
            "cv_folds": self.cv_folds,
            "seed": self.seed,
            "min_rows_for_reconstruction": self.min_rows_for_reconstruction,
            "probe": self.probe.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ScoringConfig":
        obj = dict(obj)
        probe = obj.pop("probe", None)
        if probe is not None:
            obj["probe"] = GbtConfig.from_json(probe)
        return cls(**obj)


@dataclass
class CandidateRecord:
    """Everything measured about one candidate feature."""

    dsl: str
    category: str
    iteration: int
    alignment_fe: float
    reconstruction_ef: float | None
    utility: float
    utility_per_fold: tuple[float, ...]
    p_value: float
    verdict: str
    importance_rank: int | None = None

    def to_json(self) -> dict:
        return {
            "dsl": self.dsl,
            "category": self.category,
            "iteration": self.iteration,
            "alignment_fe": self.alignment_fe,
            "reconstruction_ef": self.reconstruction_ef,
            "utility": self.utility,
            "utility_per_fold": list(self.utility_per_fold),
            "p_value": self.p_value,
            "verdict": self.verdict,
            "importance_rank": self.importance_rank,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CandidateRecord":
        obj = dict(obj)
        obj["utility_per_fold"] = tuple(obj["utility_per_fold"])
        return cls(**obj)


def categorize(
    utility: float,
    p_value: float,
    reconstruction_ef: float | None,
    config: ScoringConfig,
) -> str:
    """Three-way verdict; total over all inputs.

    Complementary: significantly positive uplift. Aligned: no uplift but
    well reconstructed from the embedding. Uninformative: neither.
    """
    if utility > 0.0 and p_value <= config.alpha:
        return COMPLEMENTARY
    if reconstruction_ef is not None and reconstruction_ef >= config.tau_align:
        return ALIGNED
    return UNINFORMATIVE


def categorize_record(record: CandidateRecord, config: ScoringConfig) -> str:
    return categorize(record.utility, record.p_value, record.reconstruction_ef, config)
