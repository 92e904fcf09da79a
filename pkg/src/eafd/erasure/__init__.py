from .eraser import (
    EraserConfig,
    EraserDivergence,
    HsicEraser,
    eraser_objective,
    fidelity_and_grad,
    fit_eraser,
    standardize_sensitive,
)
from .hsic import (
    HsicConfig,
    hsic,
    hsic_from_grams,
    hsic_value_and_grad,
    median_bandwidth,
    pairwise_sq_dists,
    permutation_null,
    rbf_gram,
)
from .report import erasure_report

__all__ = [
    "EraserConfig",
    "EraserDivergence",
    "HsicConfig",
    "HsicEraser",
    "eraser_objective",
    "erasure_report",
    "fidelity_and_grad",
    "fit_eraser",
    "hsic",
    "hsic_from_grams",
    "hsic_value_and_grad",
    "median_bandwidth",
    "pairwise_sq_dists",
    "permutation_null",
    "rbf_gram",
    "standardize_sensitive",
]
