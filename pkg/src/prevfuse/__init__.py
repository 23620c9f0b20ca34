"""Prevalence-weighted late fusion of per-symptom classifier labels."""

from prevfuse.errors import DataError, PrevfuseError, UsageError
from prevfuse.prevalence import (
    PrevalenceTable,
    StudyRecord,
    WeightVector,
    aggregate_prevalence,
    derive_weights,
    parse_prevalence_csv,
)
from prevfuse.fusion import IndicatorVector, ScreeningResult, equal_weights, fuse, to_percent

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "IndicatorVector",
    "PrevalenceTable",
    "PrevfuseError",
    "ScreeningResult",
    "StudyRecord",
    "UsageError",
    "WeightVector",
    "aggregate_prevalence",
    "derive_weights",
    "equal_weights",
    "fuse",
    "parse_prevalence_csv",
    "to_percent",
]
