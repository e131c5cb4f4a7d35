"""Fixed-width record parsing against a DataDictionary.

Lines shorter than the record length are rejected, never padded: padding would
fabricate data. Longer lines are accepted with the trailing filler ignored and
counted. Records are processed in batches so arbitrarily long inputs never hold
more than `batch_size` undecoded rows at once; output is independent of the
batch size.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .dataset import MISSING_CODE, NOMINAL, Cell, Column, Dataset
from .dictionary import DataDictionary, FieldSpec
from .errors import ParseError

DEFAULT_BATCH_SIZE = 50_000

MISSING = object()  # sentinel distinct from any cell value


@dataclass
class LineError:
    index: int  # 0-based input line index
    message: str


@dataclass
class ParseReport:
    total_lines: int = 0
    rows_emitted: int = 0
    rejected: list[LineError] = field(default_factory=list)
    overlength_lines: int = 0

    @property
    def rejected_count(self) -> int:
        return len(self.rejected)

    def summary(self) -> str:
        parts = [f"{self.rows_emitted} rows from {self.total_lines} lines"]
        if self.rejected:
            parts.append(f"{len(self.rejected)} rejected")
        if self.overlength_lines:
            parts.append(f"{self.overlength_lines} with trailing filler ignored")
        return ", ".join(parts)


def apply_recode(raw: str, spec: FieldSpec):
    """Decode one raw field slice: trim, missing-code check, recode map, type parse.

    Returns the cell value or the MISSING sentinel. Raises ParseError for an
    unknown recode code, a non-numeric value in a numeric field, or a blank
    nominal value that was not declared missing.
    """
    if len(raw) != spec.width:
        raise ParseError(f"field {spec.name!r}: raw slice has length {len(raw)}, expected {spec.width}")
    value = raw.strip(" ")
    if value in spec.missing_codes:
        return MISSING
    if spec.recode is not None:
        try:
            return spec.recode[value]
        except KeyError:
            raise ParseError(f"field {spec.name!r}: code {value!r} not in recode map") from None
    if spec.kind == NOMINAL:
        if value == "":
            raise ParseError(f"field {spec.name!r}: blank value not declared as missing")
        return value
    try:
        return float(value)
    except ValueError:
        raise ParseError(f"field {spec.name!r}: {value!r} is not numeric") from None


def parse_records(
    lines: Iterable[str],
    dictionary: DataDictionary,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> tuple[Dataset, ParseReport]:
    """Parse text lines into a typed Dataset, one row per accepted line.

    Any per-line failure (short line, bad cell) rejects that line, records the
    error with its 0-based index, and parsing continues. Output row order equals
    input order; rows_emitted + rejected always covers every input line.
    """
    if batch_size < 1:
        raise ParseError(f"batch_size must be >= 1, got {batch_size}")
    dictionary.validate()

    columns = [Column(f.name, f.kind, (), f.tag) for f in dictionary.fields]
    report = ParseReport()
    categories: list[list[str]] = [[] for _ in dictionary.fields]
    cat_index: list[dict[str, int]] = [{} for _ in dictionary.fields]
    chunks: list[list[np.ndarray]] = [[] for _ in dictionary.fields]

    for batch in _batched(lines, batch_size):
        batch_cells: list[list[Cell]] = []
        for offset_in_batch, line in enumerate(batch):
            index = report.total_lines + offset_in_batch
            line = line.rstrip("\n\r")
            if len(line) < dictionary.record_length:
                report.rejected.append(LineError(index, f"line length {len(line)} < record_length {dictionary.record_length}"))
                continue
            if len(line) > dictionary.record_length:
                report.overlength_lines += 1
            try:
                cells = [apply_recode(line[f.offset - 1 : f.end], f) for f in dictionary.fields]
            except ParseError as exc:
                report.rejected.append(LineError(index, str(exc)))
                continue
            batch_cells.append(cells)
        report.total_lines += len(batch)
        report.rows_emitted += len(batch_cells)
        _encode_batch(batch_cells, dictionary.fields, categories, cat_index, chunks)

    arrays = {}
    final_columns = []
    for j, (col, f) in enumerate(zip(columns, dictionary.fields)):
        if f.kind == NOMINAL:
            col = Column(col.name, col.kind, tuple(categories[j]), col.tag)
        parts = chunks[j]
        dtype = np.int32 if f.kind == NOMINAL else np.float64
        arrays[col.name] = np.concatenate(parts) if parts else np.empty(0, dtype=dtype)
        final_columns.append(col)
    return Dataset(tuple(final_columns), arrays), report


def _encode_batch(batch_cells, fields, categories, cat_index, chunks):
    if not batch_cells:
        return
    n = len(batch_cells)
    for j, f in enumerate(fields):
        if f.kind == NOMINAL:
            codes = np.empty(n, dtype=np.int32)
            index = cat_index[j]
            cats = categories[j]
            for i, cells in enumerate(batch_cells):
                value = cells[j]
                if value is MISSING:
                    codes[i] = MISSING_CODE
                    continue
                code = index.get(value)
                if code is None:
                    code = len(cats)
                    cats.append(value)
                    index[value] = code
                codes[i] = code
            chunks[j].append(codes)
        else:
            values = np.empty(n, dtype=np.float64)
            for i, cells in enumerate(batch_cells):
                value = cells[j]
                values[i] = np.nan if value is MISSING else value
            chunks[j].append(values)


def _batched(lines: Iterable[str], size: int) -> Iterator[list[str]]:
    batch: list[str] = []
    for line in lines:
        batch.append(line)
        if len(batch) >= size:
            yield batch
            batch = []
    if batch:
        yield batch


def format_record(cells: Sequence[Cell], dictionary: DataDictionary) -> str:
    """Render one row of cells back into a fixed-width line.

    The inverse of parsing for fixtures with bijective recode maps: nominal
    values are left-justified, numerics right-justified, missing cells become
    the field's first missing code (required when a missing cell is present).
    Gaps between fields are space filler.
    """
    out = [" "] * dictionary.record_length
    for j, f in enumerate(dictionary.fields):
        cell = cells[j]
        if cell is None:
            if not f.missing_codes:
                raise ParseError(f"field {f.name!r}: missing cell but no missing codes declared")
            text = sorted(f.missing_codes)[0]
        elif f.recode is not None:
            inverse = {v: k for k, v in f.recode.items()}
            if len(inverse) != len(f.recode):
                raise ParseError(f"field {f.name!r}: recode map is not bijective")
            try:
                text = inverse[cell]
            except KeyError:
                raise ParseError(f"field {f.name!r}: value {cell!r} not produced by recode map") from None
        elif f.kind == NOMINAL:
            text = str(cell)
        else:
            number = float(cell)
            text = str(int(number)) if number == int(number) else repr(number)
        if len(text) > f.width:
            raise ParseError(f"field {f.name!r}: {text!r} wider than {f.width}")
        padded = text.ljust(f.width) if f.kind == NOMINAL else text.rjust(f.width)
        out[f.offset - 1 : f.end] = padded
    return "".join(out)
