"""Per-mode classifiers producing 0/1 indicator labels.

The learned audio models live elsewhere; their scores arrive through CSV
files and are binarized here. Fever is a one-split rule on body
temperature, or a pass-through of a self-reported flag.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Mapping, Protocol, Sequence

from prevfuse.errors import DataError, UsageError
from prevfuse.fusion import IndicatorVector
from prevfuse.prevalence import read_bytes, normalize_symptom, read_csv_rows

KINDS = ("score", "temperature_c", "self_report", "label")
TEMPERATURE_RANGE_C = (30.0, 45.0)
DEFAULT_TAU = 0.5
DEFAULT_FEVER_C = 38.0


@dataclass(frozen=True)
class ModeObservation:
    """One subject's raw evidence for one mode. ``kind`` selects the payload."""

    subject_id: str
    mode: str
    kind: str
    value: float | bool | int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"unknown observation kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        v = self.value
        if self.kind == "score":
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not (0.0 <= v <= 1.0):
                raise DataError(f"{self.subject_id}/{self.mode}: score must be in [0, 1], got {v!r}")
        elif self.kind == "temperature_c":
            _check_temperature(v, self.subject_id, self.mode)
        elif self.kind == "self_report":
            if not isinstance(v, bool):
                raise DataError(f"{self.subject_id}/{self.mode}: self_report must be true/false, got {v!r}")
        elif isinstance(v, bool) or v not in (0, 1):
            raise DataError(f"{self.subject_id}/{self.mode}: label must be 0 or 1, got {v!r}")

    @classmethod
    def score(cls, subject_id: str, mode: str, value: float):
        return cls(subject_id, mode, "score", value)

    @classmethod
    def temperature(cls, subject_id: str, mode: str, value: float):
        return cls(subject_id, mode, "temperature_c", value)

    @classmethod
    def self_report(cls, subject_id: str, mode: str, value: bool):
        return cls(subject_id, mode, "self_report", value)

    @classmethod
    def label(cls, subject_id: str, mode: str, value: int):
        return cls(subject_id, mode, "label", value)


def _check_temperature(v, subject_id, mode):
    lo, hi = TEMPERATURE_RANGE_C
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not (lo <= v <= hi):
        raise DataError(f"{subject_id}/{mode}: temperature_c must be in [{lo:g}, {hi:g}], got {v!r}")


def _expect(obs: ModeObservation, kinds: tuple[str, ...], who: str):
    if obs.kind not in kinds:
        raise UsageError(f"{who} classifier cannot handle {obs.kind!r} payload for {obs.subject_id}/{obs.mode}")


def classify_threshold(obs: ModeObservation, tau: float = DEFAULT_TAU) -> int:
    """1 iff score >= tau (inclusive)."""
    _expect(obs, ("score",), "threshold")
    if not (0.0 <= tau <= 1.0):
        raise UsageError(f"tau must be in [0, 1], got {tau}")
    return int(obs.value >= tau)


def classify_fever(obs: ModeObservation, threshold_c: float = DEFAULT_FEVER_C) -> int:
    _expect(obs, ("temperature_c", "self_report"), "fever")
    if obs.kind == "self_report":
        return int(obs.value)
    _check_temperature(obs.value, obs.subject_id, obs.mode)
    return int(obs.value >= threshold_c)


def classify_oracle(obs: ModeObservation) -> int:
    _expect(obs, ("label",), "oracle")
    return int(obs.value)


class Classifier(Protocol):
    mode: str

    def classify(self, obs: ModeObservation) -> int: ...


@dataclass(frozen=True)
class ThresholdClassifier:
    mode: str
    tau: float = DEFAULT_TAU

    def classify(self, obs: ModeObservation) -> int:
        return classify_threshold(obs, self.tau)


@dataclass(frozen=True)
class FeverClassifier:
    mode: str = "fever"
    threshold_c: float = DEFAULT_FEVER_C

    def classify(self, obs: ModeObservation) -> int:
        return classify_fever(obs, self.threshold_c)


@dataclass(frozen=True)
class OracleClassifier:
    mode: str

    def classify(self, obs: ModeObservation) -> int:
        return classify_oracle(obs)


def assemble_indicators(
    observations: Sequence[ModeObservation], registry: Mapping[str, Classifier]
) -> IndicatorVector:
    """Route one subject's observations through their modes' classifiers."""
    if not observations:
        raise UsageError("no observations to classify")
    subjects = {o.subject_id for o in observations}
    if len(subjects) > 1:
        raise DataError(f"observations span several subjects: {sorted(subjects)}")
    labels: dict[str, int] = {}
    for obs in observations:
        if obs.mode in labels:
            raise DataError(f"subject {obs.subject_id!r} has more than one {obs.mode!r} observation")
        clf = registry.get(obs.mode)
        if clf is None:
            raise UsageError(f"no classifier registered for mode {obs.mode!r}")
        labels[obs.mode] = clf.classify(obs)
    return IndicatorVector(labels, observations[0].subject_id)


def build_registry(
    observations: Sequence[ModeObservation],
    tau: float = DEFAULT_TAU,
    fever_threshold_c: float = DEFAULT_FEVER_C,
) -> dict[str, Classifier]:
    """Pick a classifier per mode from the payload kind seen for that mode.

    Scores get the threshold rule, temperatures and self-reports the fever
    rule, labels pass straight through.
    """
    registry: dict[str, Classifier] = {}
    for obs in observations:
        if obs.kind == "score":
            clf = ThresholdClassifier(obs.mode, tau)
        elif obs.kind == "label":
            clf = OracleClassifier(obs.mode)
        else:
            clf = FeverClassifier(obs.mode, fever_threshold_c)
        prev = registry.setdefault(obs.mode, clf)
        if type(prev) is not type(clf):
            raise DataError(f"mode {obs.mode!r} mixes incompatible observation kinds")
    return registry


def group_by_subject(observations: Sequence[ModeObservation]) -> dict[str, list[ModeObservation]]:
    groups: dict[str, list[ModeObservation]] = defaultdict(list)
    for obs in observations:
        groups[obs.subject_id].append(obs)
    return dict(groups)


def _parse_value(kind: str, text: str):
    if kind in ("score", "temperature_c"):
        try:
            v = float(text)
        except ValueError:
            raise DataError(f"{kind} value {text!r} is not a number") from None
        if not math.isfinite(v):
            raise DataError(f"{kind} value must be finite")
        return v
    if kind == "self_report":
        low = text.lower()
        if low not in ("true", "false"):
            raise DataError(f"self_report must be true or false, got {text!r}")
        return low == "true"
    if text not in ("0", "1"):
        raise DataError(f"label must be 0 or 1, got {text!r}")
    return int(text)


def _observation(line: int, subject: str, mode: str, kind: str, value: str, what: str) -> ModeObservation:
    if not subject:
        raise DataError(f"{what}: line {line}: empty subject_id")
    try:
        if kind not in KINDS:
            raise DataError(f"unknown kind {kind!r}")
        return ModeObservation(subject, normalize_symptom(mode), kind, _parse_value(kind, value))
    except DataError as exc:
        raise DataError(f"{what}: line {line}: {exc}") from None


def parse_observations_csv(source: BinaryIO | bytes | str | Path) -> list[ModeObservation]:
    """Rows of ``subject_id,mode,kind,value``."""
    _, rows = read_csv_rows(read_bytes(source), ("subject_id", "mode", "kind", "value"), "observations CSV")
    return [_observation(line, s, m, k.lower(), v, "observations CSV") for line, (s, m, k, v) in rows]


def parse_scores_csv(source: BinaryIO | bytes | str | Path) -> list[ModeObservation]:
    """Rows of ``subject_id,mode,score`` from an external model."""
    _, rows = read_csv_rows(read_bytes(source), ("subject_id", "mode", "score"), "scores CSV")
    return [_observation(line, s, m, "score", v, "scores CSV") for line, (s, m, v) in rows]
