from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable as a module

from strata_bench.dataset import Column, Dataset


def make_dataset(columns, rows, label=None) -> Dataset:
    return Dataset.from_cells(columns, rows, label)


def labeled_dataset(labels: list[str], label_name: str = "cls", extra_numeric: bool = True) -> Dataset:
    """Tiny dataset with the given label cells and one filler numeric column."""
    columns = [Column(label_name, "nominal")]
    if extra_numeric:
        columns.append(Column("x", "numeric"))
    rows = []
    for i, value in enumerate(labels):
        row = [value]
        if extra_numeric:
            row.append(float(i))
        rows.append(row)
    return Dataset.from_cells(columns, rows, label_name)


def random_labeled_dataset(rng: np.random.Generator, counts: dict[str, int], n_attrs: int = 2) -> Dataset:
    """Shuffled dataset with exact per-class counts and random numeric filler."""
    labels = [cls for cls, count in counts.items() for _ in range(count)]
    order = rng.permutation(len(labels))
    columns = [Column("cls", "nominal", tuple(counts))]
    columns += [Column(f"x{j}", "numeric") for j in range(n_attrs)]
    rows = []
    for i in order:
        rows.append([labels[int(i)]] + [float(v) for v in rng.random(n_attrs)])
    return Dataset.from_cells(columns, rows, "cls")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
