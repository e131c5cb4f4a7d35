"""Shared feature encoding for the three classifiers.

Training datasets are encoded once into per-attribute arrays: nominal columns
as int64 training-category codes (-1 = missing), numeric as float64 (NaN =
missing). Prediction inputs are re-encoded against the training registry; a
category never seen in training behaves like a missing cell everywhere it can
(tree: default child, posterior tables: skipped, distance: maximal term).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import MISSING_CODE, NOMINAL, Cell, Column, Dataset
from ..errors import PredictionError, TrainingError


@dataclass(frozen=True)
class EncodedTraining:
    columns: tuple[Column, ...]  # attribute columns, schema order, training categories
    arrays: tuple[np.ndarray, ...]  # aligned with columns
    classes: tuple[str, ...]  # present label classes, label category order
    y: np.ndarray  # compact class codes 0..len(classes)-1

    @property
    def n_rows(self) -> int:
        return len(self.y)


def encode_training(train: Dataset) -> EncodedTraining:
    if train.label is None:
        raise TrainingError("training dataset has no label column")
    if train.n_rows == 0:
        raise TrainingError("training dataset is empty")
    label_col = train.column(train.label)
    codes = train.arrays[train.label]
    labeled = codes != MISSING_CODE
    if not labeled.any():
        raise TrainingError("every training row has a missing label")
    codes = codes[labeled]

    class_counts = np.bincount(codes, minlength=len(label_col.categories))
    present = np.flatnonzero(class_counts)
    classes = tuple(label_col.categories[int(c)] for c in present)
    compact = np.full(len(label_col.categories), -1, dtype=np.int64)
    compact[present] = np.arange(len(present))
    y = compact[codes]

    columns = tuple(c for c in train.columns if c.name != train.label)
    arrays = tuple(
        np.asarray(train.arrays[c.name][labeled], dtype=np.int64 if c.kind == NOMINAL else np.float64)
        for c in columns
    )
    return EncodedTraining(columns, arrays, classes, y)


def encode_row(row: list[Cell] | tuple[Cell, ...], columns: tuple[Column, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Encode one cell vector against training columns.

    Returns (nominal-or-dummy codes, numeric-or-dummy values) aligned with
    `columns`; nominal entries of numeric columns and vice versa are unused.
    """
    if len(row) != len(columns):
        raise PredictionError(f"row has {len(row)} cells, model expects {len(columns)}")
    codes = np.full(len(columns), MISSING_CODE, dtype=np.int64)
    values = np.full(len(columns), np.nan, dtype=np.float64)
    for j, (cell, col) in enumerate(zip(row, columns)):
        if cell is None:
            continue
        if col.kind == NOMINAL:
            if not isinstance(cell, str):
                raise PredictionError(f"column {col.name!r}: expected a category, got {cell!r}")
            try:
                codes[j] = col.categories.index(cell)
            except ValueError:
                codes[j] = MISSING_CODE  # unseen category: treated as missing
        else:
            if isinstance(cell, str):
                raise PredictionError(f"column {col.name!r}: expected a number, got {cell!r}")
            values[j] = float(cell)
    return codes, values


def encode_dataset(ds: Dataset, columns: tuple[Column, ...]) -> tuple[np.ndarray, ...]:
    """Encode a whole dataset against training columns, matching by name and kind.

    Returns one array per training column: int64 training codes for nominal
    (unseen categories and missing both -1), float64 for numeric.
    """
    out: list[np.ndarray] = []
    for col in columns:
        if not ds.has_column(col.name):
            raise PredictionError(f"dataset lacks model column {col.name!r}")
        actual = ds.column(col.name)
        if actual.kind != col.kind:
            raise PredictionError(f"column {col.name!r}: kind {actual.kind} does not match model {col.kind}")
        arr = ds.arrays[col.name]
        if col.kind == NOMINAL:
            remap = np.full(len(actual.categories) + 1, MISSING_CODE, dtype=np.int64)
            train_index = {cat: i for i, cat in enumerate(col.categories)}
            for local, cat in enumerate(actual.categories):
                remap[local] = train_index.get(cat, MISSING_CODE)
            out.append(remap[arr])  # MISSING_CODE indexes the sentinel slot at the end
        else:
            out.append(arr.astype(np.float64))
    return tuple(out)
