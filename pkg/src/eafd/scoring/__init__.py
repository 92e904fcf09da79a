from .records import (
    ALIGNED,
    COMPLEMENTARY,
    UNINFORMATIVE,
    VERDICTS,
    CandidateRecord,
    ScoringConfig,
    categorize,
    categorize_record,
)
from .reports import feature_importance, group_report, multi_target_utility
from .scores import (
    BaselineLosses,
    alignment_fe,
    baseline_cv_losses,
    paired_uplift_pvalue,
    reconstruction_ef,
    score_candidates,
    utility,
)

__all__ = [
    "ALIGNED",
    "COMPLEMENTARY",
    "UNINFORMATIVE",
    "VERDICTS",
    "BaselineLosses",
    "CandidateRecord",
    "ScoringConfig",
    "alignment_fe",
    "baseline_cv_losses",
    "categorize",
    "categorize_record",
    "feature_importance",
    "group_report",
    "multi_target_utility",
    "paired_uplift_pvalue",
    "reconstruction_ef",
    "score_candidates",
    "utility",
]
