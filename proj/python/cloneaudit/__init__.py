"""Audit code reused from Q&A posts against open-source projects."""

from ._core import (
    Error,
    NoConflict,
    TriageServer,
    TriageStore,
    UnknownPair,
    ValidationError,
    classify_conflict,
    clone_age_months,
    detect,
    diff_classify,
    evidence_terms,
    identify_license,
    merge,
    normalize,
    ok_value,
    overlap_similarity,
    run_pipeline,
    summarize,
    tokenize,
)

__all__ = [
    "Error",
    "NoConflict",
    "TriageServer",
    "TriageStore",
    "UnknownPair",
    "ValidationError",
    "classify_conflict",
    "clone_age_months",
    "detect",
    "diff_classify",
    "evidence_terms",
    "identify_license",
    "merge",
    "normalize",
    "ok_value",
    "overlap_similarity",
    "run_pipeline",
    "summarize",
    "tokenize",
]
