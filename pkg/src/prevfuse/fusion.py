"""Late fusion of binary per-mode labels into a screening score.

The weighted score is the dot product of 0/1 indicator labels with the
mode weights. The equal-weight baseline assigns 1/n to each of n modes.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from prevfuse.errors import DataError, UsageError
from prevfuse.prevalence import WeightVector, normalize_modes, normalize_symptom
from prevfuse.rounding import fmt


@dataclass(frozen=True)
class IndicatorVector:
    """Binary classifier outputs keyed by mode, in observation order."""

    labels: Mapping[str, int]
    subject_id: str | None = None

    def __post_init__(self):
        clean = {}
        for mode, value in dict(self.labels).items():
            if value not in (0, 1) or isinstance(value, float):
                raise DataError(f"indicator for {mode!r} must be 0 or 1, got {value!r}")
            clean[mode] = int(value)
        if not clean:
            raise UsageError("indicator vector has no modes")
        object.__setattr__(self, "labels", MappingProxyType(clean))

    @property
    def modes(self) -> tuple[str, ...]:
        return tuple(self.labels)

    def pattern(self, order: Sequence[str] | None = None) -> tuple[int, ...]:
        order = self.modes if order is None else order
        return tuple(self.labels[m] for m in order)

    @classmethod
    def from_pattern(cls, modes: Sequence[str], pattern: Iterable[int], subject_id: str | None = None):
        pattern = list(pattern)
        if len(pattern) != len(modes):
            raise UsageError(f"pattern {pattern} does not match modes {list(modes)}")
        return cls(dict(zip(modes, pattern)), subject_id)


def parse_indicator_spec(text: str, subject_id: str | None = None) -> IndicatorVector:
    """Parse ``cough=1,breath=0,fever=1``."""
    labels: dict[str, int] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        name, sep, value = part.partition("=")
        if not sep or value.strip() not in ("0", "1"):
            raise UsageError(f"bad indicator {part!r}; expected mode=0 or mode=1")
        try:
            mode = normalize_symptom(name)
        except DataError as exc:
            raise UsageError(str(exc)) from None
        if mode in labels:
            raise UsageError(f"indicator for {mode!r} given twice")
        labels[mode] = int(value)
    return IndicatorVector(labels, subject_id)


@dataclass(frozen=True)
class ScreeningResult:
    score: float
    percent: float
    weights_used: WeightVector
    modes_used: tuple[str, ...]
    renormalized: bool

    def line(self) -> str:
        return (
            f"score={fmt(self.score, 2)} percent={fmt(self.percent, 1)} "
            f"modes={','.join(self.modes_used)} renormalized={str(self.renormalized).lower()}"
        )


def equal_weights(modes: Sequence[str]) -> WeightVector:
    modes = normalize_modes(modes)
    n = len(modes)
    return WeightVector({m: 1.0 / n for m in modes}, modes)


def to_percent(score: float) -> float:
    if not (0.0 <= score <= 1.0):
        raise UsageError(f"score must be in [0, 1], got {score}")
    return score * 100


def restrict_weights(weights: WeightVector, modes: Iterable[str]) -> WeightVector:
    """Weights over a subset of modes, rescaled to sum to one."""
    keep = set(modes)
    used = tuple(m for m in weights.mode_order if m in keep)
    total = sum(weights[m] for m in used)
    if total <= 0:
        raise DataError(f"observed modes {list(used)} carry zero total weight")
    return WeightVector({m: weights[m] / total for m in used}, used)


def fuse(indicators: IndicatorVector, weights: WeightVector) -> ScreeningResult:
    """Weighted sum of indicator labels.

    Modes present in ``weights`` but absent from ``indicators`` are dropped
    and the remaining weights rescaled; the result is flagged ``renormalized``.
    An unobserved mode is not evidence of a negative label.
    """
    unknown = [m for m in indicators.modes if m not in weights]
    if unknown:
        raise UsageError(f"no weight for mode(s) {', '.join(unknown)}; weights cover {list(weights.mode_order)}")
    renormalized = len(indicators.modes) < len(weights)
    used = restrict_weights(weights, indicators.modes) if renormalized else weights
    labels = [indicators.labels[m] for m in used.mode_order]

    if all(labels):
        score = 1.0
    elif not any(labels):
        score = 0.0
    else:
        score = 0.0
        for label, w in zip(labels, used.values()):
            score += label * w
        score = min(max(score, 0.0), 1.0)
    return ScreeningResult(score, to_percent(score), used, used.mode_order, renormalized)
