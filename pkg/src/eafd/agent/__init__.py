from .generators import (
    GeneratorError,
    GeneratorSpec,
    GeneratorUnreachable,
    HttpGenerator,
    MockGenerator,
    extract_candidates,
    make_generator,
)
from .loop import (
    DiscoveryConfig,
    IterationState,
    canonical_report_json,
    repair,
    report_header,
    run_discovery,
    run_iteration,
    validate_candidate,
    write_report_files,
)
from .prompts import PROMPT_VERSION
from .reflection import build_reflection, reflection_text

__all__ = [
    "DiscoveryConfig",
    "GeneratorError",
    "GeneratorSpec",
    "GeneratorUnreachable",
    "HttpGenerator",
    "IterationState",
    "MockGenerator",
    "PROMPT_VERSION",
    "build_reflection",
    "canonical_report_json",
    "extract_candidates",
    "make_generator",
    "reflection_text",
    "repair",
    "report_header",
    "run_discovery",
    "run_iteration",
    "validate_candidate",
    "write_report_files",
]
