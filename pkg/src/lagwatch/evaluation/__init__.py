"""Ground-truth matching, metrics, synthetic fixtures and the evaluation harness."""

from .metrics import (
    Annotation,
    EvalTable,
    GroundTruth,
    MatchResult,
    MetricsRow,
    load_truth,
    match_lags,
    metrics,
    tabulate,
    write_truth,
)
from .synthetic import (
    EventType,
    SpecError,
    SyntheticCast,
    SyntheticEvent,
    SyntheticSpec,
    corpus_spec,
    generate_synthetic,
    write_synthetic,
)

__all__ = [
    "Annotation",
    "EvalTable",
    "EventType",
    "GroundTruth",
    "MatchResult",
    "MetricsRow",
    "SpecError",
    "SyntheticCast",
    "SyntheticEvent",
    "SyntheticSpec",
    "corpus_spec",
    "generate_synthetic",
    "load_truth",
    "match_lags",
    "metrics",
    "tabulate",
    "write_synthetic",
    "write_truth",
]
