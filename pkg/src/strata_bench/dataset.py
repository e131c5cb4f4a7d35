"""Columnar dataset of nominal/numeric/missing cells with a designated label column.

Storage is one numpy array per column: nominal columns hold int32 category codes
(-1 = missing) against an ordered category tuple, numeric columns hold float64
(NaN = missing). Cell-level views decode back to `str | float | None`.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import SchemaError

NOMINAL = "nominal"
NUMERIC = "numeric"

MISSING_CODE = -1

# characters that would break the sidecar schema grammar
_FORBIDDEN_IN_CATEGORY = ("|", ",", "\n", "\r")

Cell = str | float | None


@dataclass(frozen=True)
class Column:
    """Schema entry: column name, cell kind, registered categories, filter group tag."""

    name: str
    kind: str
    categories: tuple[str, ...] = ()
    tag: str | None = None

    def __post_init__(self):
        if self.kind not in (NOMINAL, NUMERIC):
            raise SchemaError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == NUMERIC and self.categories:
            raise SchemaError(f"column {self.name!r}: numeric columns carry no categories")
        seen = set()
        for cat in self.categories:
            if cat == "":
                raise SchemaError(f"column {self.name!r}: empty category id is reserved for missing")
            if any(ch in cat for ch in _FORBIDDEN_IN_CATEGORY):
                raise SchemaError(f"column {self.name!r}: category {cat!r} contains a reserved character")
            if cat in seen:
                raise SchemaError(f"column {self.name!r}: duplicate category {cat!r}")
            seen.add(cat)


@dataclass
class Dataset:
    columns: tuple[Column, ...]
    arrays: dict[str, np.ndarray] = field(repr=False)
    label: str | None = None

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names")
        if set(self.arrays) != set(names):
            raise SchemaError("arrays do not match schema columns")
        n = self.n_rows
        for col in self.columns:
            arr = self.arrays[col.name]
            if arr.ndim != 1 or len(arr) != n:
                raise SchemaError(f"column {col.name!r}: array length mismatch")
            if col.kind == NOMINAL:
                if arr.dtype != np.int32:
                    raise SchemaError(f"column {col.name!r}: nominal storage must be int32 codes")
                if len(arr) and (arr.max(initial=MISSING_CODE) >= len(col.categories) or arr.min(initial=MISSING_CODE) < MISSING_CODE):
                    raise SchemaError(f"column {col.name!r}: code outside registered categories")
            else:
                if arr.dtype != np.float64:
                    raise SchemaError(f"column {col.name!r}: numeric storage must be float64")
        if self.label is not None:
            col = self.column(self.label)
            if col.kind != NOMINAL:
                raise SchemaError(f"label column {self.label!r} must be nominal")

    # -- schema access ------------------------------------------------------

    @property
    def n_rows(self) -> int:
        if not self.columns:
            return 0
        return len(self.arrays[self.columns[0].name])

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaError(f"no such column: {name!r}")

    def has_column(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    def array(self, name: str) -> np.ndarray:
        self.column(name)
        return self.arrays[name]

    # -- cell access --------------------------------------------------------

    def cell(self, row: int, name: str) -> Cell:
        col = self.column(name)
        raw = self.arrays[name][row]
        if col.kind == NOMINAL:
            code = int(raw)
            return None if code == MISSING_CODE else col.categories[code]
        value = float(raw)
        return None if np.isnan(value) else value

    def row(self, index: int) -> list[Cell]:
        return [self.cell(index, c.name) for c in self.columns]

    def iter_rows(self) -> Iterator[list[Cell]]:
        for i in range(self.n_rows):
            yield self.row(i)

    def missing_mask(self, name: str) -> np.ndarray:
        col = self.column(name)
        arr = self.arrays[name]
        if col.kind == NOMINAL:
            return arr == MISSING_CODE
        return np.isnan(arr)

    # -- structural operations ----------------------------------------------

    def take(self, indices: Sequence[int] | np.ndarray) -> "Dataset":
        """Row subset/multiset by position; schema and category registry unchanged."""
        idx = np.asarray(indices, dtype=np.int64)
        arrays = {name: arr[idx] for name, arr in self.arrays.items()}
        return Dataset(self.columns, arrays, self.label)

    def drop_columns(self, names: Iterable[str]) -> "Dataset":
        drop = set(names)
        missing = drop - set(self.column_names)
        if missing:
            raise SchemaError(f"cannot drop unknown columns: {sorted(missing)}")
        columns = tuple(c for c in self.columns if c.name not in drop)
        arrays = {c.name: self.arrays[c.name] for c in columns}
        label = self.label if self.label not in drop else None
        return Dataset(columns, arrays, label)

    def select_columns(self, names: Sequence[str]) -> "Dataset":
        columns = tuple(self.column(n) for n in names)
        arrays = {n: self.arrays[n] for n in names}
        label = self.label if self.label in names else None
        return Dataset(columns, arrays, label)

    def with_label(self, label: str | None) -> "Dataset":
        if label is not None:
            col = self.column(label)
            if col.kind != NOMINAL:
                raise SchemaError(f"label column {label!r} must be nominal")
        return Dataset(self.columns, dict(self.arrays), label)

    def with_column(self, column: Column, cells: Sequence[Cell]) -> "Dataset":
        """Append a column; nominal categories are taken from `column` or discovered."""
        if self.has_column(column.name):
            raise SchemaError(f"column {column.name!r} already exists")
        if len(cells) != self.n_rows:
            raise SchemaError(f"column {column.name!r}: {len(cells)} cells for {self.n_rows} rows")
        col, arr = _encode_column(column, cells)
        return Dataset(self.columns + (col,), {**self.arrays, col.name: arr}, self.label)

    def equals(self, other: "Dataset") -> bool:
        if self.columns != other.columns or self.label != other.label:
            return False
        for name in self.column_names:
            a, b = self.arrays[name], other.arrays[name]
            if self.column(name).kind == NOMINAL:
                if not np.array_equal(a, b):
                    return False
            elif not np.array_equal(a, b, equal_nan=True):
                return False
        return True

    # -- construction ---------------------------------------------------------

    @staticmethod
    def from_cells(
        columns: Sequence[Column],
        rows: Iterable[Sequence[Cell]],
        label: str | None = None,
    ) -> "Dataset":
        """Build from row-major cells.

        Nominal columns with an empty category tuple register categories in
        first-appearance order, which keeps construction deterministic.
        """
        columns = tuple(columns)
        cells_by_col: list[list[Cell]] = [[] for _ in columns]
        for r, row in enumerate(rows):
            if len(row) != len(columns):
                raise SchemaError(f"row {r}: expected {len(columns)} cells, got {len(row)}")
            for j, value in enumerate(row):
                cells_by_col[j].append(value)
        encoded = [_encode_column(col, cells_by_col[j]) for j, col in enumerate(columns)]
        return Dataset(
            tuple(col for col, _ in encoded),
            {col.name: arr for col, arr in encoded},
            label,
        )


def _encode_column(column: Column, cells: Sequence[Cell]) -> tuple[Column, np.ndarray]:
    if column.kind == NUMERIC:
        arr = np.empty(len(cells), dtype=np.float64)
        for i, value in enumerate(cells):
            if value is None:
                arr[i] = np.nan
            elif isinstance(value, (int, float)) and not isinstance(value, bool):
                arr[i] = float(value)
            else:
                raise SchemaError(f"column {column.name!r}: numeric cell {value!r} at row {i}")
        return column, arr

    categories = list(column.categories)
    index = {cat: i for i, cat in enumerate(categories)}
    discover = not categories
    codes = np.empty(len(cells), dtype=np.int32)
    for i, value in enumerate(cells):
        if value is None:
            codes[i] = MISSING_CODE
            continue
        if not isinstance(value, str):
            raise SchemaError(f"column {column.name!r}: nominal cell {value!r} at row {i}")
        code = index.get(value)
        if code is None:
            if not discover:
                raise SchemaError(f"column {column.name!r}: unregistered category {value!r} at row {i}")
            code = len(categories)
            categories.append(value)
            index[value] = code
        codes[i] = code
    if discover:
        column = replace(column, categories=tuple(categories))
    return column, codes


# -- CSV persistence: header row + sidecar schema file --------------------------


def schema_path_for(data_path: str) -> str:
    return data_path + ".schema"


def dumps_schema(ds: Dataset) -> str:
    lines = []
    if ds.label is not None:
        lines.append(f"label={ds.label}")
    for col in ds.columns:
        parts = [col.name, col.kind, f"tag={col.tag or ''}"]
        if col.kind == NOMINAL:
            parts.append("categories=" + ",".join(col.categories))
        lines.append("|".join(parts))
    return "\n".join(lines) + "\n"


def loads_schema(text: str) -> tuple[tuple[Column, ...], str | None]:
    label: str | None = None
    columns: list[Column] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("label="):
            label = line[len("label="):]
            continue
        parts = line.split("|")
        if len(parts) < 3:
            raise SchemaError(f"schema line {lineno}: expected name|kind|tag=..., got {raw!r}")
        name, kind = parts[0], parts[1]
        tag: str | None = None
        categories: tuple[str, ...] = ()
        for part in parts[2:]:
            if part.startswith("tag="):
                tag = part[len("tag="):] or None
            elif part.startswith("categories="):
                body = part[len("categories="):]
                categories = tuple(body.split(",")) if body else ()
            else:
                raise SchemaError(f"schema line {lineno}: unknown segment {part!r}")
        columns.append(Column(name, kind, categories, tag))
    return tuple(columns), label


def dumps_csv(ds: Dataset) -> str:
    """Render rows as CSV: nominal cells by category id, numeric by repr, missing empty."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ds.column_names)
    decoders = []
    for col in ds.columns:
        arr = ds.arrays[col.name]
        if col.kind == NOMINAL:
            cats = col.categories
            decoders.append([("" if c == MISSING_CODE else cats[c]) for c in arr.tolist()])
        else:
            decoders.append(["" if v != v else repr(v) for v in arr.tolist()])
    for row in zip(*decoders) if decoders else []:
        writer.writerow(row)
    return buf.getvalue()


def loads_csv(text: str, columns: tuple[Column, ...], label: str | None) -> Dataset:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("dataset CSV is empty (missing header)") from None
    if header != [c.name for c in columns]:
        raise SchemaError("dataset CSV header does not match schema file")
    rows: list[list[Cell]] = []
    for lineno, record in enumerate(reader, start=2):
        if len(record) != len(columns):
            raise SchemaError(f"dataset CSV line {lineno}: expected {len(columns)} cells")
        cells: list[Cell] = []
        for col, text_value in zip(columns, record):
            if text_value == "":
                cells.append(None)
            elif col.kind == NOMINAL:
                cells.append(text_value)
            else:
                try:
                    cells.append(float(text_value))
                except ValueError:
                    raise SchemaError(
                        f"dataset CSV line {lineno}: column {col.name!r} is numeric, got {text_value!r}"
                    ) from None
        rows.append(cells)
    return Dataset.from_cells(columns, rows, label)


def save_dataset(ds: Dataset, path: str) -> None:
    from .fileio import write_text_atomic

    write_text_atomic(path, dumps_csv(ds))
    write_text_atomic(schema_path_for(path), dumps_schema(ds))


def load_dataset(path: str) -> Dataset:
    with open(schema_path_for(path), "r", encoding="utf-8") as fh:
        columns, label = loads_schema(fh.read())
    with open(path, "r", encoding="utf-8") as fh:
        return loads_csv(fh.read(), columns, label)
