"""Clinical prevalence ingestion, aggregation and weight derivation.

Prevalences are percentages in (0, 100]; weights are unitless fractions
that sum to one. A symptom's weight is its prevalence estimate divided by
the summed estimates of every mode in the fusion set.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from decimal import Decimal
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import BinaryIO, Iterable, Mapping, Sequence

from prevfuse.errors import DataError, UsageError

PREVALENCE_HEADER = ("study_id", "population", "symptom", "prevalence_pct")
DEFAULT_MODES = ("cough", "breath", "fever")
AGGREGATIONS = ("mean", "population_weighted")
SYMPTOM_ALIASES = {"shortness_of_breath": "breath"}
WEIGHT_SUM_TOL = 1e-9


def normalize_symptom(name: str) -> str:
    key = name.strip().casefold()
    if not key:
        raise DataError("empty symptom name")
    return SYMPTOM_ALIASES.get(key, key)


def normalize_modes(modes: Iterable[str]) -> tuple[str, ...]:
    out = tuple(normalize_symptom(m) for m in modes)
    if not out:
        raise UsageError("mode set is empty")
    if len(set(out)) != len(out):
        raise UsageError(f"duplicate modes in {list(out)}")
    return out


@dataclass(frozen=True)
class StudyRecord:
    study_id: str
    population: int
    symptom: str
    prevalence_pct: float

    def __post_init__(self):
        if self.population < 1:
            raise DataError(f"study {self.study_id!r}: population must be >= 1, got {self.population}")
        if not (0 < self.prevalence_pct <= 100):
            raise DataError(
                f"study {self.study_id!r}: prevalence_pct must be in (0, 100], got {self.prevalence_pct}"
            )


@dataclass(frozen=True)
class PrevalenceTable:
    """Study rows plus the aggregated per-symptom estimates (percent).

    ``overrides`` names estimates set by hand through :meth:`with_overrides`;
    only those may be exactly zero.
    """

    records: tuple[StudyRecord, ...]
    estimates: Mapping[str, float] = field(default_factory=dict)
    method: str | None = None
    source_digest: str | None = None
    overrides: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "estimates", MappingProxyType(dict(self.estimates)))
        supported = {r.symptom for r in self.records}
        for symptom, value in self.estimates.items():
            if symptom not in supported:
                raise DataError(f"estimate for {symptom!r} has no supporting study record")
            low_ok = value >= 0 if symptom in self.overrides else value > 0
            if not (low_ok and value <= 100) or math.isnan(value):
                raise DataError(f"estimate for {symptom!r} out of range: {value}")

    @property
    def symptoms(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(r.symptom for r in self.records))

    def records_for(self, symptom: str) -> list[StudyRecord]:
        return [r for r in self.records if r.symptom == symptom]

    def with_overrides(self, values: Mapping[str, float]) -> PrevalenceTable:
        """Return a copy with hand-set estimates. Zero is admitted here, negatives never."""
        merged = dict(self.estimates)
        for name, value in values.items():
            value = float(value)
            if value < 0 or math.isnan(value):
                raise DataError(f"override for {name!r} must be >= 0, got {value}")
            merged[normalize_symptom(name)] = value
        keys = self.overrides | {normalize_symptom(n) for n in values}
        return PrevalenceTable(self.records, merged, self.method, self.source_digest, frozenset(keys))


@dataclass(frozen=True)
class WeightVector:
    """Per-mode fusion weights in a fixed mode order."""

    weights: Mapping[str, float]
    mode_order: tuple[str, ...]

    def __post_init__(self):
        order = tuple(self.mode_order)
        object.__setattr__(self, "mode_order", order)
        object.__setattr__(self, "weights", MappingProxyType({m: float(self.weights[m]) for m in order}))
        if not order:
            raise UsageError("weight vector needs at least one mode")
        if len(set(order)) != len(order):
            raise UsageError(f"duplicate modes in {list(order)}")
        for m, w in self.weights.items():
            if not (0.0 <= w <= 1.0):
                raise DataError(f"weight for {m!r} must be in [0, 1], got {w}")
        total = math.fsum(self.weights.values())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise DataError(f"weights sum to {total!r}, expected 1")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, float]]) -> WeightVector:
        pairs = list(pairs)
        return cls({m: w for m, w in pairs}, tuple(m for m, _ in pairs))

    def __getitem__(self, mode: str) -> float:
        return self.weights[mode]

    def __contains__(self, mode: object) -> bool:
        return mode in self.weights

    def __len__(self) -> int:
        return len(self.mode_order)

    def values(self) -> list[float]:
        return [self.weights[m] for m in self.mode_order]

    def rounded(self, places: int = 2) -> WeightVector:
        """Weights at ``places`` decimals that still sum to exactly one.

        Largest-remainder allocation: floor every weight to the grid, then
        hand the missing units to the largest remainders (earlier modes win
        ties). Independent half-up rounding can give totals like 1.01.
        """
        return WeightVector(dict(zip(self.mode_order, _largest_remainder(self.values(), places))), self.mode_order)

    def display_values(self, places: int = 2) -> list[float]:
        return _largest_remainder(self.values(), places)

    def digest(self) -> str:
        payload = json.dumps(
            {"modes": list(self.mode_order), "weights": dict(self.weights)},
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode()).hexdigest()

    def summary(self, places: int = 2) -> str:
        vals = self.display_values(places)
        return " ".join(f"{m}={v:.{places}f}" for m, v in zip(self.mode_order, vals))


def _largest_remainder(values: Sequence[float], places: int) -> list[float]:
    unit = Decimal(10) ** places
    scaled = [Decimal(repr(v)) * unit for v in values]
    floors = [int(x) for x in scaled]
    short = int(unit) - sum(floors)
    order = sorted(range(len(values)), key=lambda i: (-(scaled[i] - floors[i]), i))
    for i in order[: max(short, 0)]:
        floors[i] += 1
    return [float(Decimal(n) / unit) for n in floors]


def read_bytes(source: BinaryIO | bytes | str | Path) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, (str, Path)):
        try:
            return Path(source).read_bytes()
        except OSError as exc:
            raise DataError(f"cannot read {source}: {exc.strerror or exc}") from exc
    return source.read()


def read_csv_rows(raw: bytes, header: Sequence[str] | None, what: str) -> tuple[list[str], list[tuple[int, list[str]]]]:
    """Decode a UTF-8 CSV, check its header, and return (header, [(line_no, row)]).

    With ``header=None`` any header is accepted and returned. Blank lines are
    skipped; data rows must match the header's column count.
    """
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise DataError(f"{what}: not valid UTF-8 ({exc.reason} at byte {exc.start})") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        got = [c.strip() for c in next(reader)]
    except StopIteration:
        raise DataError(f"{what}: file is empty") from None
    if header is not None and tuple(got) != tuple(header):
        raise DataError(f"{what}: expected header {','.join(header)!r}, got {','.join(got)!r}")
    rows = []
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        line = reader.line_num
        if len(row) != len(got):
            raise DataError(f"{what}: line {line}: expected {len(got)} columns, got {len(row)}")
        rows.append((line, [c.strip() for c in row]))
    if not rows:
        raise DataError(f"{what}: no data rows")
    return got, rows


def parse_prevalence_csv(source: BinaryIO | bytes | str | Path) -> PrevalenceTable:
    """Parse ``study_id,population,symptom,prevalence_pct`` rows into a table.

    Estimates are left empty; see :func:`aggregate_prevalence`.
    """
    raw = read_bytes(source)
    _, rows = read_csv_rows(raw, PREVALENCE_HEADER, "prevalence CSV")
    records = []
    for line, (study_id, pop, symptom, pct) in rows:
        try:
            population = int(pop)
            prevalence = float(pct)
        except ValueError:
            raise DataError(f"prevalence CSV: line {line}: non-numeric population or prevalence") from None
        if not math.isfinite(prevalence):
            raise DataError(f"prevalence CSV: line {line}: prevalence must be finite")
        try:
            records.append(StudyRecord(study_id, population, normalize_symptom(symptom), prevalence))
        except DataError as exc:
            raise DataError(f"prevalence CSV: line {line}: {exc}") from None
    return PrevalenceTable(tuple(records), source_digest=hashlib.sha256(raw).hexdigest())


def aggregate_prevalence(
    table: PrevalenceTable, modes: Sequence[str] = DEFAULT_MODES, method: str = "mean"
) -> PrevalenceTable:
    """Fill per-mode prevalence estimates.

    ``mean`` is the plain average over a symptom's studies; ``population_weighted``
    weights each study by its patient count. Records for symptoms outside
    ``modes`` are kept but get no estimate.
    """
    if method not in AGGREGATIONS:
        raise UsageError(f"unknown aggregation {method!r}; choose from {', '.join(AGGREGATIONS)}")
    modes = normalize_modes(modes)
    estimates = {}
    for mode in modes:
        rows = table.records_for(mode)
        if not rows:
            raise DataError(f"no prevalence records for mode {mode!r}")
        if method == "mean":
            estimates[mode] = math.fsum(r.prevalence_pct for r in rows) / len(rows)
        else:
            estimates[mode] = math.fsum(r.population * r.prevalence_pct for r in rows) / sum(
                r.population for r in rows
            )
    return PrevalenceTable(table.records, estimates, method, table.source_digest)


def derive_weights(table: PrevalenceTable, modes: Sequence[str] = DEFAULT_MODES) -> WeightVector:
    """Normalize the table's estimates over ``modes`` into fusion weights."""
    modes = normalize_modes(modes)
    missing = [m for m in modes if m not in table.estimates]
    if missing:
        raise DataError(f"no prevalence estimate for {', '.join(missing)}")
    return _normalize(table.estimates, modes)


def weights_from_estimates(estimates: Mapping[str, float], modes: Sequence[str] | None = None) -> WeightVector:
    """Weights straight from a {symptom: prevalence} mapping, any positive scale."""
    modes = normalize_modes(modes if modes is not None else estimates.keys())
    lookup = {normalize_symptom(k): float(v) for k, v in estimates.items()}
    missing = [m for m in modes if m not in lookup]
    if missing:
        raise DataError(f"no prevalence estimate for {', '.join(missing)}")
    bad = [m for m in modes if not lookup[m] >= 0 or math.isinf(lookup[m])]
    if bad:
        raise DataError(f"prevalence estimates must be finite and >= 0: {', '.join(bad)}")
    return _normalize(lookup, modes)


def _normalize(estimates: Mapping[str, float], modes: tuple[str, ...]) -> WeightVector:
    total = math.fsum(estimates[m] for m in modes)
    if total <= 0:
        raise DataError("prevalence estimates sum to zero; weights undefined")
    return WeightVector({m: estimates[m] / total for m in modes}, modes)


# weights JSON


def weights_to_json(weights: WeightVector, aggregation: str | None, source_digest: str | None) -> str:
    doc = {
        "modes": list(weights.mode_order),
        "weights": dict(weights.weights),
        "aggregation": aggregation,
        "source_digest": source_digest,
    }
    return json.dumps(doc, indent=2) + "\n"


def load_weights_json(source: str | Path | bytes) -> tuple[WeightVector, dict]:
    """Read a weights export. Returns the vector and the raw document."""
    raw = read_bytes(source)
    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DataError(f"weights JSON: {exc}") from None
    if not isinstance(doc, dict) or "modes" not in doc or "weights" not in doc:
        raise DataError("weights JSON: expected an object with 'modes' and 'weights'")
    modes, values = doc["modes"], doc["weights"]
    if not isinstance(modes, list) or not isinstance(values, dict):
        raise DataError("weights JSON: 'modes' must be a list and 'weights' an object")
    try:
        modes = normalize_modes(modes)
    except UsageError as exc:
        raise DataError(f"weights JSON: {exc}") from None
    values = {normalize_symptom(k): v for k, v in values.items()}
    if set(values) != set(modes):
        raise DataError("weights JSON: 'weights' keys do not match 'modes'")
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values.values()):
        raise DataError("weights JSON: weights must be numbers")
    return WeightVector(values, modes), doc
