"""Weighted vs equal-weight comparison over labeled screening samples.

Samples are grouped by (indicator pattern, ground truth). Each group in
which at least one mode disagrees with the truth becomes a case row with
its weighted score, equal-weight score and their relative difference. The
aggregate is the occurrence-weighted mean of per-case signed improvements,
where a lower score on a negative subject counts as an improvement.

Two rounding modes are offered. ``full_precision`` keeps every number
as computed. ``paper_rounding`` replays a published two-decimal table:
weights and case scores are rounded to 2 decimals and relative
differences to 1 decimal before aggregation.
"""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import BinaryIO, Sequence

from prevfuse.errors import DataError, UsageError
from prevfuse.fusion import IndicatorVector, equal_weights, fuse
from prevfuse.prevalence import WeightVector, normalize_symptom, read_bytes, read_csv_rows
from prevfuse.rounding import fmt, round_half_up

log = logging.getLogger(__name__)

TRUTHS = ("positive", "negative")
ROUNDING_MODES = ("full_precision", "paper_rounding")
FORMATS = ("table", "csv", "json")


@dataclass(frozen=True)
class LabeledSample:
    subject_id: str
    truth: str
    indicators: IndicatorVector

    def __post_init__(self):
        if self.truth not in TRUTHS:
            raise DataError(f"sample {self.subject_id!r}: truth must be positive or negative, got {self.truth!r}")


@dataclass(frozen=True)
class CaseReport:
    case: int
    modes: tuple[str, ...]
    pattern: tuple[int, ...]
    truth: str
    occurrences: int
    share_pct: float
    f_w: float
    f_r: float
    rel_diff_pct: float | None
    signed_improvement_pct: float | None

    @property
    def misclassified_modes(self) -> int:
        return _errors(self.pattern, self.truth)


@dataclass(frozen=True)
class EvaluationSummary:
    cases: tuple[CaseReport, ...]
    total_samples: int
    weighted_improvement_pct: float | None
    weights_used: WeightVector
    rounding_mode: str

    @property
    def case_samples(self) -> int:
        return sum(c.occurrences for c in self.cases)


def _errors(pattern: Sequence[int], truth: str) -> int:
    wanted = 1 if truth == "positive" else 0
    return sum(1 for v in pattern if v != wanted)


def _check_rounding(mode: str):
    if mode not in ROUNDING_MODES:
        raise UsageError(f"unknown rounding mode {mode!r}; choose from {', '.join(ROUNDING_MODES)}")


def relative_difference(f_w: float, f_r: float) -> float:
    """Percent change of the weighted score against the equal-weight score."""
    if f_r == 0:
        raise UsageError("relative difference undefined for a zero baseline score")
    return 100.0 * (f_w - f_r) / f_r


def signed_improvement(rel_diff_pct: float, truth: str) -> float:
    if truth not in TRUTHS:
        raise UsageError(f"truth must be positive or negative, got {truth!r}")
    return rel_diff_pct if truth == "positive" else -rel_diff_pct


def build_cases(
    samples: Sequence[LabeledSample], weights: WeightVector, rounding_mode: str = "full_precision"
) -> list[CaseReport]:
    """Group samples into misclassification cases.

    Under ``paper_rounding`` the caller's weights are rounded to two decimals
    first. Groups where every mode agrees with the truth produce no row.
    """
    _check_rounding(rounding_mode)
    if not samples:
        raise DataError("no samples to evaluate")
    modes = weights.mode_order
    for s in samples:
        if set(s.indicators.modes) != set(modes):
            raise DataError(
                f"sample {s.subject_id!r} covers modes {list(s.indicators.modes)}, expected {list(modes)}"
            )
    paper = rounding_mode == "paper_rounding"
    if paper:
        weights = weights.rounded(2)
    baseline = equal_weights(modes)

    groups = Counter((s.indicators.pattern(modes), s.truth) for s in samples)
    wrong = [(key, n) for key, n in groups.items() if _errors(key[0], key[1])]
    # fewest wrong modes first, positives before negatives, then pattern descending
    wrong.sort(key=lambda kn: (_errors(*kn[0]), TRUTHS.index(kn[0][1]), tuple(-v for v in kn[0][0])))
    case_total = sum(n for _, n in wrong)

    cases = []
    for number, ((pattern, truth), n) in enumerate(wrong, start=1):
        iv = IndicatorVector.from_pattern(modes, pattern)
        f_w = fuse(iv, weights).score
        f_r = fuse(iv, baseline).score
        if paper:
            f_w, f_r = round_half_up(f_w, 2), round_half_up(f_r, 2)
        if f_r == 0:
            rel = imp = None
        else:
            rel = relative_difference(f_w, f_r)
            if paper:
                rel = round_half_up(rel, 1)
            imp = signed_improvement(rel, truth)
        cases.append(CaseReport(number, modes, pattern, truth, n, 100.0 * n / case_total, f_w, f_r, rel, imp))
    return cases


def weighted_improvement(cases: Sequence[CaseReport], rounding_mode: str = "full_precision") -> float:
    """Occurrence-weighted mean of per-case signed improvements, in percent.

    Cases with an undefined relative difference are skipped with a warning.
    """
    _check_rounding(rounding_mode)
    usable = []
    for c in cases:
        if c.rel_diff_pct is None:
            log.warning("case %d %s/%s has a zero baseline score; excluded from aggregate",
                        c.case, ",".join(map(str, c.pattern)), c.truth)
            continue
        rel = round_half_up(c.rel_diff_pct, 1) if rounding_mode == "paper_rounding" else c.rel_diff_pct
        usable.append((c.occurrences, signed_improvement(rel, c.truth)))
    if not usable:
        raise DataError("no cases with a defined relative difference to aggregate")
    mean = math.fsum(n * imp for n, imp in usable) / sum(n for n, _ in usable)
    lo, hi = min(imp for _, imp in usable), max(imp for _, imp in usable)
    return min(max(mean, lo), hi)


def evaluate(
    samples: Sequence[LabeledSample], weights: WeightVector, rounding_mode: str = "full_precision"
) -> EvaluationSummary:
    cases = build_cases(samples, weights, rounding_mode)
    aggregatable = [c for c in cases if c.rel_diff_pct is not None]
    improvement = weighted_improvement(cases, rounding_mode) if aggregatable else None
    if cases and not aggregatable:
        log.warning("no case has a defined relative difference; aggregate not reported")
    used = weights.rounded(2) if rounding_mode == "paper_rounding" else weights
    return EvaluationSummary(tuple(cases), len(samples), improvement, used, rounding_mode)


def parse_evaluation_csv(source: BinaryIO | bytes | str | Path, modes: Sequence[str] | None = None) -> list[LabeledSample]:
    """Rows of ``subject_id,truth,<mode>...`` with 0/1 indicator columns.

    When ``modes`` is given the indicator columns must be exactly that set.
    """
    header, rows = read_csv_rows(read_bytes(source), None, "evaluation CSV")
    if len(header) < 3 or header[0] != "subject_id" or header[1] != "truth":
        raise DataError("evaluation CSV: header must start with subject_id,truth followed by mode columns")
    try:
        cols = [normalize_symptom(h) for h in header[2:]]
    except DataError as exc:
        raise DataError(f"evaluation CSV: {exc}") from None
    if len(set(cols)) != len(cols):
        raise DataError("evaluation CSV: duplicate mode columns")
    if modes is not None and set(cols) != set(modes):
        raise DataError(f"evaluation CSV: mode columns {cols} do not match weights modes {list(modes)}")
    samples = []
    for line, row in rows:
        subject, truth = row[0], row[1].lower()
        if truth not in TRUTHS:
            raise DataError(f"evaluation CSV: line {line}: truth must be positive or negative, got {row[1]!r}")
        if any(v not in ("0", "1") for v in row[2:]):
            raise DataError(f"evaluation CSV: line {line}: indicators must be 0 or 1")
        samples.append(LabeledSample(subject, truth, IndicatorVector(dict(zip(cols, map(int, row[2:]))), subject)))
    return samples


# rendering


def _signed(value: float | None, places: int = 1) -> str:
    if value is None:
        return "undef"
    text = fmt(value, places)
    return text if text.startswith("-") else "+" + text


def _table(summary: EvaluationSummary) -> str:
    modes = summary.weights_used.mode_order
    head = ["case", "truth", f"pattern({','.join(modes)})", "n", "share", "f_w", "f_r", "rel_diff", "improvement"]
    body = [
        [
            str(c.case),
            c.truth,
            ",".join(map(str, c.pattern)),
            str(c.occurrences),
            fmt(c.share_pct, 1) + "%",
            fmt(c.f_w, 2),
            fmt(c.f_r, 2),
            _signed(c.rel_diff_pct) + ("%" if c.rel_diff_pct is not None else ""),
            _signed(c.signed_improvement_pct) + ("%" if c.signed_improvement_pct is not None else ""),
        ]
        for c in summary.cases
    ]
    widths = [max(len(r[i]) for r in [head, *body]) for i in range(len(head))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in [head, *body]]
    lines.append("")
    lines.append(f"weights: {summary.weights_used.summary()}")
    lines.append(
        f"total_samples={summary.total_samples} case_samples={summary.case_samples} "
        f"rounding={summary.rounding_mode}"
    )
    if summary.weighted_improvement_pct is not None:
        lines.append(f"weighted_improvement={fmt(summary.weighted_improvement_pct, 1)}%")
    else:
        lines.append("weighted_improvement=undef")
    return "\n".join(lines) + "\n"


CSV_COLUMNS = ("case", "truth", "pattern", "occurrences", "share_pct", "f_w", "f_r", "rel_diff_pct", "signed_improvement_pct")


def _csv(summary: EvaluationSummary) -> str:
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)

    def num(x):
        return "" if x is None else repr(x)

    for c in summary.cases:
        w.writerow([c.case, c.truth, "".join(map(str, c.pattern)), c.occurrences,
                    num(c.share_pct), num(c.f_w), num(c.f_r), num(c.rel_diff_pct), num(c.signed_improvement_pct)])
    w.writerow(["aggregate", "", "", summary.case_samples, num(100.0 * summary.case_samples / summary.total_samples),
                "", "", "", num(summary.weighted_improvement_pct)])
    return buf.getvalue()


def summary_to_dict(summary: EvaluationSummary) -> dict:
    return {
        "modes": list(summary.weights_used.mode_order),
        "weights": dict(summary.weights_used.weights),
        "rounding_mode": summary.rounding_mode,
        "total_samples": summary.total_samples,
        "case_samples": summary.case_samples,
        "weighted_improvement_pct": summary.weighted_improvement_pct,
        "cases": [
            {**asdict(c), "modes": list(c.modes), "pattern": list(c.pattern)} for c in summary.cases
        ],
    }


def render_report(summary: EvaluationSummary, format: str = "table") -> str:
    if format == "table":
        return _table(summary)
    if format == "csv":
        return _csv(summary)
    if format == "json":
        return json.dumps(summary_to_dict(summary), indent=2) + "\n"
    raise UsageError(f"unknown report format {format!r}; choose from {', '.join(FORMATS)}")
