"""Preprocessing: survival/staging recodes, missing handling, feature filtering.

The filters are pure and idempotent. Column removal decisions are recorded in a
FilterReport so every dropped attribute is accounted for.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import MISSING_CODE, NOMINAL, NUMERIC, Cell, Dataset
from .errors import DegenerateDatasetError, MappingError, PreprocessError, SchemaError

SURVIVED = "survived"
NOT_SURVIVED = "not_survived"
EXCLUDED = "excluded"

DEFAULT_SURVIVAL_THRESHOLD_MONTHS = 60
DEFAULT_MISSING_THRESHOLD = 0.5
DEFAULT_CORRELATION_THRESHOLD = 0.95
DEFAULT_MIN_GAIN = 0.001
DEFAULT_NUMERIC_BINS = 10

# class counts of the three prognosis targets in the reference configuration
REFERENCE_CLASS_COUNTS = {"metastasis": 10, "stage": 4, "survival": 2}


@dataclass(frozen=True)
class LabelSpec:
    """A prognosis target: label name plus its ordered class list."""

    name: str
    classes: tuple[str, ...]

    def __post_init__(self):
        if not self.classes:
            raise PreprocessError(f"label {self.name!r} declares no classes")
        if len(set(self.classes)) != len(self.classes):
            raise PreprocessError(f"label {self.name!r} has duplicate classes")

    @property
    def matches_reference_counts(self) -> bool:
        """True when the class count equals the reference configuration's;
        synthetic labels are free to use any count."""
        expected = REFERENCE_CLASS_COUNTS.get(self.name)
        return expected is None or expected == len(self.classes)


# -- recodes ---------------------------------------------------------------


def recode_survival_months(raw: str) -> int:
    """Convert a YYMM digit string into whole months (12*YY + MM)."""
    if len(raw) != 4 or not raw.isdigit():
        raise PreprocessError(f"survival recode expects 4 digits, got {raw!r}")
    return 12 * int(raw[:2]) + int(raw[2:])


def derive_survival_label(
    months: int,
    vital_status: str,
    cod: str | None,
    studied_cancer: str,
    threshold_months: int = DEFAULT_SURVIVAL_THRESHOLD_MONTHS,
) -> str:
    """Binary survival outcome with an excluded bucket.

    Survived at or past the threshold; not_survived only for deaths from the
    studied cancer before it; everything else (censored alive, unrelated death)
    is excluded from the binary training set.
    """
    if months < 0:
        raise PreprocessError(f"months must be >= 0, got {months}")
    if vital_status not in ("alive", "dead"):
        raise PreprocessError(f"vital_status must be alive or dead, got {vital_status!r}")
    if months >= threshold_months:
        return SURVIVED
    if vital_status == "dead" and cod == studied_cancer:
        return NOT_SURVIVED
    return EXCLUDED


@dataclass(frozen=True)
class MappingEntry:
    era_min: int | None
    era_max: int | None
    source_column: str  # "*" matches any source column
    code: str  # "*" is the fallback wildcard
    target: str

    def era_matches(self, era: int) -> bool:
        if self.era_min is not None and era < self.era_min:
            return False
        if self.era_max is not None and era > self.era_max:
            return False
        return True


@dataclass(frozen=True)
class StagingMapping:
    """Config table joining pre-2004 and 2004+ staging codes into one category set."""

    entries: tuple[MappingEntry, ...]

    @staticmethod
    def from_csv(text: str) -> "StagingMapping":
        reader = csv.DictReader(io.StringIO(text))
        required = {"era_range", "source_column", "code", "target_category"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise MappingError(f"mapping CSV must have columns {sorted(required)}")
        entries = []
        for lineno, row in enumerate(reader, start=2):
            era_min, era_max = _parse_era_range(row["era_range"], lineno)
            entries.append(
                MappingEntry(era_min, era_max, row["source_column"].strip(), row["code"].strip(), row["target_category"].strip())
            )
        return StagingMapping(tuple(entries))

    def lookup(self, era: int, source_column: str, code: str) -> str | None:
        for entry in self.entries:
            if entry.code == "*":
                continue
            if entry.era_matches(era) and entry.source_column in ("*", source_column) and entry.code == code:
                return entry.target
        return None

    def fallback(self, era: int) -> str | None:
        for entry in self.entries:
            if entry.code == "*" and entry.era_matches(era):
                return entry.target
        return None


def _parse_era_range(text: str, lineno: int) -> tuple[int | None, int | None]:
    text = text.strip()
    if text == "*":
        return None, None
    lo, sep, hi = text.partition("-")
    if not sep:
        try:
            year = int(text)
        except ValueError:
            raise MappingError(f"mapping CSV line {lineno}: bad era_range {text!r}") from None
        return year, year
    try:
        era_min = int(lo) if lo else None
        era_max = int(hi) if hi else None
    except ValueError:
        raise MappingError(f"mapping CSV line {lineno}: bad era_range {text!r}") from None
    return era_min, era_max


def derive_metastasis_label(
    row: dict[str, Cell],
    eod_columns: list[str],
    cs_columns: list[str],
    era_column: str,
    mapping: StagingMapping,
    era_split: int = 2004,
) -> str:
    """Merge the two staging systems: rows before `era_split` read the extent-of-disease
    columns, later rows the collaborative-stage columns, both into one target set."""
    era_cell = row.get(era_column)
    if era_cell is None:
        raise MappingError(f"era column {era_column!r} is missing in row")
    era = int(float(era_cell))
    sources = eod_columns if era < era_split else cs_columns
    for name in sources:
        cell = row.get(name)
        if cell is None:
            continue
        code = str(cell) if not isinstance(cell, float) else repr(cell)
        target = mapping.lookup(era, name, code)
        if target is not None:
            return target
    fallback = mapping.fallback(era)
    if fallback is not None:
        return fallback
    codes = {name: row.get(name) for name in sources}
    raise MappingError(f"no mapping for era {era} codes {codes} and no fallback declared")


# -- filters ---------------------------------------------------------------


@dataclass
class FilterReport:
    removed_by_missing: list[tuple[str, float]] = field(default_factory=list)
    removed_by_correlation: list[tuple[str, str, float]] = field(default_factory=list)  # kept, dropped, score
    removed_by_infogain: list[tuple[str, float]] = field(default_factory=list)
    rows_removed: int = 0

    def removed_columns(self) -> set[str]:
        return (
            {name for name, _ in self.removed_by_missing}
            | {dropped for _, dropped, _ in self.removed_by_correlation}
            | {name for name, _ in self.removed_by_infogain}
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["phase", "column", "detail", "score"])
        for name, fraction in self.removed_by_missing:
            writer.writerow(["missing", name, "missing_fraction", repr(fraction)])
        for kept, dropped, score in self.removed_by_correlation:
            writer.writerow(["correlation", dropped, f"correlated_with={kept}", repr(score)])
        for name, gain in self.removed_by_infogain:
            writer.writerow(["infogain", name, "information_gain", repr(gain)])
        writer.writerow(["rows", "", "rows_removed", str(self.rows_removed)])
        return buf.getvalue()


def remove_missing(
    ds: Dataset,
    col_threshold: float = DEFAULT_MISSING_THRESHOLD,
    row_policy: str = "drop_any_missing",
) -> tuple[Dataset, FilterReport]:
    """Drop columns whose missing fraction exceeds the threshold (strict >), then
    optionally drop every row still containing a missing cell."""
    if not 0.0 <= col_threshold <= 1.0:
        raise PreprocessError(f"col_threshold must be in [0, 1], got {col_threshold}")
    if row_policy not in ("drop_any_missing", "keep"):
        raise PreprocessError(f"row_policy must be drop_any_missing or keep, got {row_policy!r}")
    report = FilterReport()
    n = ds.n_rows
    drop = []
    for col in ds.columns:
        fraction = float(ds.missing_mask(col.name).mean()) if n else 0.0
        if fraction > col_threshold:
            drop.append(col.name)
            report.removed_by_missing.append((col.name, fraction))
    if drop:
        if len(drop) == ds.n_cols:
            raise DegenerateDatasetError("missing filter removed every column")
        ds = ds.drop_columns(drop)
    if row_policy == "drop_any_missing" and ds.n_rows:
        keep = np.ones(ds.n_rows, dtype=bool)
        for col in ds.columns:
            keep &= ~ds.missing_mask(col.name)
        report.rows_removed = int((~keep).sum())
        if report.rows_removed:
            ds = ds.take(np.flatnonzero(keep))
    return ds, report


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    both = ~np.isnan(a) & ~np.isnan(b)
    if both.sum() < 2:
        return 0.0
    x, y = a[both], b[both]
    sx, sy = x.std(), y.std()
    if sx == 0.0 or sy == 0.0:
        return 0.0  # constant column: association undefined, treated as none
    return float(((x - x.mean()) * (y - y.mean())).mean() / (sx * sy))


def _cramers_v(a: np.ndarray, b: np.ndarray, k_a: int, k_b: int) -> float:
    both = (a != MISSING_CODE) & (b != MISSING_CODE)
    n = int(both.sum())
    if n == 0 or k_a < 2 or k_b < 2:
        return 0.0
    table = np.bincount(a[both].astype(np.int64) * k_b + b[both], minlength=k_a * k_b).reshape(k_a, k_b).astype(np.float64)
    row = table.sum(axis=1, keepdims=True)
    colsum = table.sum(axis=0, keepdims=True)
    expected = row @ colsum / n
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expected > 0, (table - expected) ** 2 / expected, 0.0)
    chi2 = float(terms.sum())
    r = int((row.ravel() > 0).sum())
    c = int((colsum.ravel() > 0).sum())
    denom = n * (min(r, c) - 1)
    if denom <= 0:
        return 0.0
    return math.sqrt(chi2 / denom)


def column_association(ds: Dataset, first: str, second: str) -> float | None:
    """|Pearson r| for numeric pairs, Cramer's V for nominal pairs, None for mixed."""
    col_a, col_b = ds.column(first), ds.column(second)
    if col_a.kind != col_b.kind:
        return None
    if col_a.kind == NUMERIC:
        return abs(_pearson(ds.arrays[first], ds.arrays[second]))
    return _cramers_v(ds.arrays[first], ds.arrays[second], len(col_a.categories), len(col_b.categories))


def correlation_filter(
    ds: Dataset,
    threshold: float = DEFAULT_CORRELATION_THRESHOLD,
) -> tuple[Dataset, FilterReport]:
    """Within each category tag, drop the later of any same-kind pair whose
    association reaches the threshold. Greedy single pass in schema order;
    untagged columns and the label column are never dropped."""
    if not 0.0 < threshold <= 1.0:
        raise PreprocessError(f"threshold must be in (0, 1], got {threshold}")
    report = FilterReport()
    names = ds.column_names
    dropped: set[str] = set()
    for i, first in enumerate(names):
        if first in dropped:
            continue
        tag = ds.column(first).tag
        if tag is None:
            continue
        for second in names[i + 1 :]:
            if second in dropped or second == ds.label:
                continue
            if ds.column(second).tag != tag:
                continue
            score = column_association(ds, first, second)
            if score is not None and score >= threshold:
                dropped.add(second)
                report.removed_by_correlation.append((first, second, score))
    if dropped:
        ds = ds.drop_columns(dropped)
    return ds, report


def _entropy_from_counts(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _bin_ids(ds: Dataset, name: str, numeric_bins: int) -> tuple[np.ndarray, int]:
    """Map a column to nonnegative bin ids; missing cells form their own final bin."""
    col = ds.column(name)
    if col.kind == NOMINAL:
        codes = ds.arrays[name].astype(np.int64)
        k = len(col.categories)
        return np.where(codes == MISSING_CODE, k, codes), k + 1
    values = ds.arrays[name]
    present = ~np.isnan(values)
    ids = np.full(len(values), numeric_bins, dtype=np.int64)
    if present.any():
        lo, hi = float(values[present].min()), float(values[present].max())
        if hi > lo:
            scaled = (values[present] - lo) / (hi - lo) * numeric_bins
            ids[present] = np.clip(scaled.astype(np.int64), 0, numeric_bins - 1)
        else:
            ids[present] = 0
    return ids, numeric_bins + 1


def information_gain(
    ds: Dataset,
    label: str,
    attr: str,
    numeric_bins: int = DEFAULT_NUMERIC_BINS,
) -> float:
    """H(label) - H(label | attr) in bits, with numeric attributes discretized
    into equal-width bins and missing cells forming their own bin."""
    label_col = ds.column(label)
    if label_col.kind != NOMINAL:
        raise SchemaError(f"label column {label!r} must be nominal")
    if numeric_bins < 1:
        raise PreprocessError(f"numeric_bins must be >= 1, got {numeric_bins}")
    y = ds.arrays[label].astype(np.int64)
    labeled = y != MISSING_CODE
    if labeled.sum() <= 1:
        return 0.0
    bins, n_bins = _bin_ids(ds, attr, numeric_bins)
    y, bins = y[labeled], bins[labeled]
    n_classes = len(label_col.categories)
    table = np.bincount(bins * n_classes + y, minlength=n_bins * n_classes).reshape(n_bins, n_classes)
    total = table.sum()
    h_label = _entropy_from_counts(table.sum(axis=0))
    conditional = 0.0
    for row in table:
        size = row.sum()
        if size:
            conditional += (size / total) * _entropy_from_counts(row)
    gain = h_label - conditional
    return max(gain, 0.0)


def information_gain_filter(
    ds: Dataset,
    label: str,
    min_gain: float = DEFAULT_MIN_GAIN,
    numeric_bins: int = DEFAULT_NUMERIC_BINS,
) -> tuple[Dataset, FilterReport]:
    """Drop non-label columns whose information gain falls below min_gain."""
    if min_gain < 0:
        raise PreprocessError(f"min_gain must be >= 0, got {min_gain}")
    ds.column(label)
    report = FilterReport()
    drop = []
    for col in ds.columns:
        if col.name == label:
            continue
        gain = information_gain(ds, label, col.name, numeric_bins)
        if gain < min_gain:
            drop.append(col.name)
            report.removed_by_infogain.append((col.name, gain))
    if drop:
        if len(drop) == ds.n_cols - 1:
            raise DegenerateDatasetError("information-gain filter removed every predictor column")
        ds = ds.drop_columns(drop)
    return ds, report
