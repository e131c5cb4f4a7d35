"""Instance-based classification with a heterogeneous distance.

The per-column distance terms are 0/1 mismatch for nominal cells, min-max
range-normalized difference for numeric cells, and a maximal term of 1 when
either cell is missing. Neighbor ties break by training-row order; vote ties
by smaller mean neighbor distance, then earlier class order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..dataset import MISSING_CODE, NOMINAL, Cell, Column, Dataset
from ..errors import PredictionError, TrainingError
from .common import encode_dataset, encode_row, encode_training

DEFAULT_K = 10
_CHUNK = 256


@dataclass(frozen=True)
class KnnModel:
    columns: tuple[Column, ...]
    classes: tuple[str, ...]
    codes: np.ndarray = field(repr=False)  # (n, n_cols) int64; numeric slots unused
    values: np.ndarray = field(repr=False)  # (n, n_cols) float64; nominal slots unused
    y: np.ndarray = field(repr=False)
    mins: np.ndarray = field(repr=False)  # per column; NaN for nominal or all-missing
    spans: np.ndarray = field(repr=False)
    k: int = DEFAULT_K
    training_ref: str | None = None  # provenance for serialization

    @property
    def n_rows(self) -> int:
        return len(self.y)


def train_knn(train: Dataset, k: int = DEFAULT_K, training_ref: str | None = None) -> KnnModel:
    if k < 1:
        raise TrainingError(f"k must be >= 1, got {k}")
    enc = encode_training(train)
    if k > enc.n_rows:
        raise TrainingError(f"k={k} exceeds the {enc.n_rows} training rows")
    width = len(enc.columns)
    codes = np.full((enc.n_rows, width), MISSING_CODE, dtype=np.int64)
    values = np.full((enc.n_rows, width), np.nan, dtype=np.float64)
    mins = np.full(width, np.nan)
    spans = np.full(width, np.nan)
    for j, col in enumerate(enc.columns):
        if col.kind == NOMINAL:
            codes[:, j] = enc.arrays[j]
        else:
            values[:, j] = enc.arrays[j]
            present = ~np.isnan(values[:, j])
            if present.any():
                lo = float(values[present, j].min())
                hi = float(values[present, j].max())
                mins[j] = lo
                spans[j] = hi - lo
    return KnnModel(enc.columns, enc.classes, codes, values, enc.y, mins, spans, k, training_ref)


def _column_ranges(model: KnnModel) -> dict[str, tuple[float, float]]:
    ranges = {}
    for j, col in enumerate(model.columns):
        if col.kind != NOMINAL and not np.isnan(model.mins[j]):
            ranges[col.name] = (float(model.mins[j]), float(model.mins[j] + model.spans[j]))
    return ranges


def mixed_distance(
    a: list[Cell],
    b: list[Cell],
    columns: tuple[Column, ...],
    ranges: dict[str, tuple[float, float]],
) -> float:
    """Root of summed per-column squared terms; see module docstring for the terms."""
    if len(a) != len(columns) or len(b) != len(columns):
        raise PredictionError("cell vectors do not match the schema")
    total = 0.0
    for cell_a, cell_b, col in zip(a, b, columns):
        if cell_a is None or cell_b is None:
            total += 1.0
        elif col.kind == NOMINAL:
            total += 0.0 if cell_a == cell_b else 1.0
        else:
            lo, hi = ranges.get(col.name, (0.0, 0.0))
            span = hi - lo
            if span > 0.0:
                diff = (float(cell_a) - float(cell_b)) / span
                total += diff * diff
            elif float(cell_a) != float(cell_b):
                total += 1.0
    return math.sqrt(total)


def _distances(model: KnnModel, q_codes: np.ndarray, q_values: np.ndarray) -> np.ndarray:
    """Distance matrix (queries x training rows), accumulated column by column in
    schema order so sums match the scalar mixed_distance exactly."""
    n_q = q_codes.shape[0]
    total = np.zeros((n_q, model.n_rows), dtype=np.float64)
    for j, col in enumerate(model.columns):
        if col.kind == NOMINAL:
            qc = q_codes[:, j][:, None]
            tc = model.codes[None, :, j]
            term = ((qc != tc) | (qc == MISSING_CODE) | (tc == MISSING_CODE)).astype(np.float64)
        else:
            qv = q_values[:, j][:, None]
            tv = model.values[None, :, j]
            either_missing = np.isnan(qv) | np.isnan(tv)
            span = model.spans[j]
            if not np.isnan(span) and span > 0.0:
                with np.errstate(invalid="ignore"):
                    diff = (qv - tv) / span
                    term = np.where(either_missing, 1.0, diff * diff)
            else:
                with np.errstate(invalid="ignore"):
                    term = np.where(either_missing, 1.0, (qv != tv).astype(np.float64))
        total += term
    return np.sqrt(total)


def _vote(model: KnnModel, dist_row: np.ndarray) -> int:
    neighbors = np.argsort(dist_row, kind="stable")[: model.k]  # stable: row order breaks ties
    labels = model.y[neighbors]
    counts = np.bincount(labels, minlength=len(model.classes))
    top = counts.max()
    tied = np.flatnonzero(counts == top)
    if len(tied) == 1:
        return int(tied[0])
    best_class = -1
    best_mean = math.inf
    for c in tied:  # ascending class order, strict < keeps the earlier class on ties
        mean = float(dist_row[neighbors[labels == c]].mean())
        if mean < best_mean:
            best_mean = mean
            best_class = int(c)
    return best_class


def knn_predict(model: KnnModel, row: list[Cell]) -> str:
    """Majority vote among the k nearest training rows by mixed distance."""
    if model.n_rows == 0:
        raise PredictionError("model has no training rows")
    codes, values = encode_row(row, model.columns)
    dist = _distances(model, codes[None, :], values[None, :])[0]
    return model.classes[_vote(model, dist)]


def knn_predict_dataset(model: KnnModel, ds: Dataset, chunk: int = _CHUNK) -> list[str]:
    arrays = encode_dataset(ds, model.columns)
    n = ds.n_rows
    width = len(model.columns)
    codes = np.full((n, width), MISSING_CODE, dtype=np.int64)
    values = np.full((n, width), np.nan, dtype=np.float64)
    for j, col in enumerate(model.columns):
        if col.kind == NOMINAL:
            codes[:, j] = arrays[j]
        else:
            values[:, j] = arrays[j]
    out: list[str] = []
    for start in range(0, n, chunk):
        block = _distances(model, codes[start : start + chunk], values[start : start + chunk])
        for i in range(block.shape[0]):
            out.append(model.classes[_vote(model, block[i])])
    return out
