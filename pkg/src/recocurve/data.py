"""Longitudinal study ingestion, patient filters, and feature construction.

CSV formats (strict headers, UTF-8):
    patients.csv:      id, age, pre_treatment
    observations.csv:  id, month, value        (months integer, values in [0, 1])

Filters mirror the study's pre-analysis cleaning: very low pre-treatment
level, too few surveyed timepoints, a fitted curve ending above the
pre-treatment level at 48 months, and runs of three or more zero responses.

Features: age binned at (55, 65), pre-treatment level binned at
(0.41, 0.60, 0.80), giving 12 classes; dummy indicators (reference bin
dropped) standardized on the training set, plus an unnormalized bias column.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .curves import FitError, fit_shape, shape_values
from .model import Dataset

__all__ = [
    "STUDY_MONTHS",
    "AGE_EDGES",
    "INIT_EDGES",
    "DataError",
    "PatientRecord",
    "FeatureSpec",
    "FilterResult",
    "load_patients",
    "write_patients",
    "filter_patients",
    "write_filter_report",
    "bin_age",
    "bin_init",
    "encode_features",
    "scaled_observations",
    "dataset_from_records",
]

STUDY_MONTHS = (1, 2, 4, 8, 12, 18, 24, 30, 36, 42, 48)
AGE_EDGES = (55.0, 65.0)
INIT_EDGES = (0.41, 0.60, 0.80)
MIN_PRETREATMENT = 0.1
MIN_TIMEPOINTS = 6
FIT_HORIZON_MONTH = 48.0
ZERO_RUN_LENGTH = 3
N_FEATURES = 6  # 2 age dummies + 3 init dummies + bias


class DataError(ValueError):
    pass


@dataclass
class PatientRecord:
    id: str
    age: float
    pre_treatment: float
    observations: dict[int, float] = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


def _parse_csv(path: Path, columns: list[str]):
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != columns:
            raise DataError(f"{path}: expected header {columns}, got {reader.fieldnames}")
        yield from ((reader.line_num, row) for row in reader)


def load_patients(path) -> list[PatientRecord]:
    """Read patients.csv + observations.csv from a directory.

    Rows that fail validation are collected and reported together; any
    problem rejects the load (strict mode).
    """
    root = Path(path)
    patients_csv = root / "patients.csv"
    observations_csv = root / "observations.csv"
    errors: list[str] = []
    records: dict[str, PatientRecord] = {}

    for line_num, row in _parse_csv(patients_csv, ["id", "age", "pre_treatment"]):
        pid = row["id"].strip()
        try:
            age = float(row["age"])
            pre = float(row["pre_treatment"])
        except ValueError:
            errors.append(f"patients.csv:{line_num}: non-numeric field in {row}")
            continue
        if pid in records:
            errors.append(f"patients.csv:{line_num}: duplicate id {pid!r}")
            continue
        if not 0.0 <= pre <= 1.0:
            errors.append(f"patients.csv:{line_num}: pre_treatment {pre} outside [0, 1]")
            continue
        if age <= 0:
            errors.append(f"patients.csv:{line_num}: nonpositive age {age}")
            continue
        records[pid] = PatientRecord(id=pid, age=age, pre_treatment=pre)

    for line_num, row in _parse_csv(observations_csv, ["id", "month", "value"]):
        pid = row["id"].strip()
        try:
            month = int(row["month"])
            value = float(row["value"])
        except ValueError:
            errors.append(f"observations.csv:{line_num}: non-numeric field in {row}")
            continue
        if pid not in records:
            errors.append(f"observations.csv:{line_num}: unknown id {pid!r}")
            continue
        if month <= 0:
            errors.append(f"observations.csv:{line_num}: nonpositive month {month}")
            continue
        if not 0.0 <= value <= 1.0:
            errors.append(f"observations.csv:{line_num}: value {value} outside [0, 1]")
            continue
        if month in records[pid].observations:
            errors.append(f"observations.csv:{line_num}: duplicate (id, month) ({pid}, {month})")
            continue
        records[pid].observations[month] = value

    if errors:
        raise DataError("rejected input:\n" + "\n".join(errors))
    return list(records.values())


def write_patients(records: list[PatientRecord], path) -> None:
    """Inverse of load_patients, for synthetic data and round-trips."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    with (root / "patients.csv").open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "age", "pre_treatment"])
        for r in records:
            w.writerow([r.id, repr(r.age), repr(r.pre_treatment)])
    with (root / "observations.csv").open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "month", "value"])
        for r in records:
            for month in sorted(r.observations):
                w.writerow([r.id, month, repr(r.observations[month])])


@dataclass
class FilterResult:
    kept: list[PatientRecord]
    removed: list[tuple[PatientRecord, list[str]]]


def _has_zero_run(record: PatientRecord) -> bool:
    # Consecutive means consecutive *observed* survey months; a gap in
    # response breaks the run.
    run = 0
    for month in sorted(record.observations):
        if record.observations[month] == 0.0:
            run += 1
            if run >= ZERO_RUN_LENGTH:
                return True
        else:
            run = 0
    return False


def _fit_exceeds_pretreatment(record: PatientRecord) -> bool:
    # Fit absolute values with the asymptote unconstrained and compare the
    # fitted value at 48 months against the pre-treatment level.
    points = [(float(m), v) for m, v in sorted(record.observations.items())]
    if len(points) < 3:
        return False
    try:
        fit = fit_shape(points, constrain_asymptote=False)
    except FitError:
        return False
    value_48 = float(shape_values(fit.a, fit.b, fit.c, FIT_HORIZON_MONTH))
    return value_48 > record.pre_treatment


def filter_patients(records: list[PatientRecord]) -> FilterResult:
    """Apply the four cleaning rules; a patient may carry several tags."""
    kept, removed = [], []
    for r in records:
        reasons = []
        if r.pre_treatment < MIN_PRETREATMENT:
            reasons.append("pre_treatment_low")
        if len(r.observations) < MIN_TIMEPOINTS:
            reasons.append("too_few_timepoints")
        if _fit_exceeds_pretreatment(r):
            reasons.append("fit_exceeds_pretreatment")
        if _has_zero_run(r):
            reasons.append("consecutive_zeros")
        if reasons:
            removed.append((r, reasons))
        else:
            kept.append(r)
    return FilterResult(kept=kept, removed=removed)


def write_filter_report(result: FilterResult, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "reasons"])
        for record, reasons in result.removed:
            w.writerow([record.id, ";".join(reasons)])


def bin_age(age: float) -> int:
    """Half-open bins [0, 55), [55, 65), [65, inf)."""
    if age < AGE_EDGES[0]:
        return 0
    if age < AGE_EDGES[1]:
        return 1
    return 2


def bin_init(s: float) -> int:
    """Half-open bins at 0.41 / 0.60 / 0.80; the boundary goes up."""
    for j, edge in enumerate(INIT_EDGES):
        if s < edge:
            return j
    return len(INIT_EDGES)


def _indicators(record: PatientRecord) -> np.ndarray:
    a = bin_age(record.age)
    i = bin_init(record.pre_treatment)
    out = np.zeros(5)
    if a >= 1:
        out[a - 1] = 1.0
    if i >= 1:
        out[2 + i - 1] = 1.0
    return out


@dataclass
class FeatureSpec:
    """Frozen standardization statistics for the 5 indicator columns."""

    means: np.ndarray | None = None
    stds: np.ndarray | None = None

    @property
    def fitted(self) -> bool:
        return self.means is not None

    def fit(self, records: list[PatientRecord]) -> "FeatureSpec":
        raw = np.array([_indicators(r) for r in records])
        self.means = raw.mean(axis=0)
        stds = raw.std(axis=0)
        # Constant columns stay centered; unit divisor avoids 0/0.
        self.stds = np.where(stds > 0, stds, 1.0)
        return self

    def to_dict(self) -> dict:
        return {"means": list(map(float, self.means)), "stds": list(map(float, self.stds))}

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSpec":
        return cls(means=np.asarray(d["means"], dtype=float), stds=np.asarray(d["stds"], dtype=float))


def encode_features(record: PatientRecord, spec: FeatureSpec) -> np.ndarray:
    """Standardized indicators plus an unnormalized bias 1; length 6."""
    if not spec.fitted:
        raise DataError("FeatureSpec must be fitted before encoding")
    z = (_indicators(record) - spec.means) / spec.stds
    return np.concatenate([z, [1.0]])


def encode_class(age_bin: int, init_bin: int, spec: FeatureSpec) -> np.ndarray:
    """Feature vector of a (age bin, init bin) class without a record."""
    if not 0 <= age_bin <= 2 or not 0 <= init_bin <= 3:
        raise DataError(f"bad class indices ({age_bin}, {init_bin})")
    ages = (50.0, 60.0, 70.0)
    inits = (0.2, 0.5, 0.7, 0.9)
    return encode_features(PatientRecord(id="", age=ages[age_bin], pre_treatment=inits[init_bin]), spec)


def scaled_observations(record: PatientRecord) -> tuple[dict[int, float], int]:
    """Month -> value / pre_treatment; ratios above 1 are clipped just under
    1 so they stay in the continuous mixture component.  Returns the map and
    the clip count."""
    if record.pre_treatment <= 0:
        raise DataError(f"patient {record.id}: pre_treatment must be > 0")
    out, clipped = {}, 0
    for month, value in record.observations.items():
        ratio = value / record.pre_treatment
        if ratio > 1.0:
            ratio = 1.0 - 1e-6
            clipped += 1
        out[month] = ratio
    return out, clipped


def dataset_from_records(records: list[PatientRecord], spec: FeatureSpec) -> tuple[Dataset, int]:
    """Encode filtered records into the model's packed dataset.

    The model is fit to *scaled* values, so in model space every patient has
    s = 1; predictions are rescaled by the patient's own pre-treatment level
    downstream.  Returns the dataset and the total clip count.
    """
    x = np.array([encode_features(r, spec) for r in records])
    s = np.ones(len(records))
    obs = []
    total_clipped = 0
    for r in records:
        scaled, clipped = scaled_observations(r)
        total_clipped += clipped
        obs.append(scaled)
    return Dataset.from_patients(x=x, s=s, observations=obs,
                                 patient_ids=[r.id for r in records]), total_clipped
