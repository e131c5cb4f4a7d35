"""Data dictionary: the positional schema that drives fixed-width record parsing.

Dictionary file grammar (UTF-8, `#` comments):

    record_length=254
    name|offset|width|kind[|tag][|missing=c1,c2][|recode=a:b,c:d]

Offsets are 1-based. `kind` is `nominal` or `numeric`; recode maps are only
meaningful for nominal fields. Registry layouts are user-supplied fixtures.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dataset import NOMINAL, NUMERIC
from .errors import DictionaryError


@dataclass(frozen=True)
class FieldSpec:
    name: str
    offset: int  # 1-based character position
    width: int
    kind: str
    tag: str | None = None
    missing_codes: frozenset[str] = frozenset()
    recode: dict[str, str] | None = None

    @property
    def end(self) -> int:
        """1-based position of the last character of the field."""
        return self.offset + self.width - 1

    def validate(self) -> None:
        if self.width < 1:
            raise DictionaryError(f"field {self.name!r}: width must be >= 1")
        if self.offset < 1:
            raise DictionaryError(f"field {self.name!r}: offset must be >= 1")
        if self.kind not in (NOMINAL, NUMERIC):
            raise DictionaryError(f"field {self.name!r}: kind must be nominal or numeric")
        if self.recode is not None and self.kind != NOMINAL:
            raise DictionaryError(f"field {self.name!r}: recode maps require a nominal field")


@dataclass(frozen=True)
class DataDictionary:
    record_length: int
    fields: tuple[FieldSpec, ...] = field(default=())

    def validate(self) -> None:
        if self.record_length < 1:
            raise DictionaryError("record_length must be >= 1")
        if not self.fields:
            raise DictionaryError("dictionary declares no fields")
        seen: dict[str, FieldSpec] = {}
        for spec in self.fields:
            spec.validate()
            if spec.name in seen:
                raise DictionaryError(f"duplicate field name {spec.name!r}")
            seen[spec.name] = spec
            if spec.end > self.record_length:
                raise DictionaryError(
                    f"field {spec.name!r} spans {spec.offset}..{spec.end}, "
                    f"beyond record_length {self.record_length}"
                )
        ordered = sorted(self.fields, key=lambda s: s.offset)
        for prev, cur in zip(ordered, ordered[1:]):
            if cur.offset <= prev.end:
                raise DictionaryError(
                    f"fields {prev.name!r} and {cur.name!r} overlap "
                    f"({prev.offset}..{prev.end} vs {cur.offset}..{cur.end})"
                )


def load_dictionary(text: str) -> DataDictionary:
    """Parse and validate dictionary-file content.

    Raises DictionaryError naming the offending line for malformed lines,
    duplicate names, overlapping ranges and fields that exceed record_length.
    """
    record_length: int | None = None
    fields: list[FieldSpec] = []
    problems: list[str] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("record_length"):
            _, _, value = line.partition("=")
            try:
                record_length = int(value.strip())
            except ValueError:
                problems.append(f"line {lineno}: bad record_length {value.strip()!r}")
            continue
        try:
            fields.append(_parse_field_line(line))
        except DictionaryError as exc:
            problems.append(f"line {lineno}: {exc}")

    if record_length is None:
        problems.append("missing record_length header line")
    if problems:
        raise DictionaryError("invalid dictionary: " + "; ".join(problems))

    dictionary = DataDictionary(record_length, tuple(fields))
    dictionary.validate()
    return dictionary


def _parse_field_line(line: str) -> FieldSpec:
    parts = [p.strip() for p in line.split("|")]
    if len(parts) < 4:
        raise DictionaryError(f"expected name|offset|width|kind..., got {line!r}")
    name, offset_text, width_text, kind = parts[:4]
    if not name:
        raise DictionaryError("empty field name")
    try:
        offset = int(offset_text)
        width = int(width_text)
    except ValueError:
        raise DictionaryError(f"field {name!r}: offset/width must be integers") from None

    tag: str | None = None
    missing: frozenset[str] = frozenset()
    recode: dict[str, str] | None = None
    for part in parts[4:]:
        if not part:
            continue
        if part.startswith("missing="):
            body = part[len("missing="):]
            missing = frozenset(c.strip() for c in body.split(",") if c.strip())
        elif part.startswith("recode="):
            recode = {}
            for pair in part[len("recode="):].split(","):
                if not pair.strip():
                    continue
                key, sep, value = pair.partition(":")
                if not sep:
                    raise DictionaryError(f"field {name!r}: recode entry {pair!r} lacks ':'")
                recode[key.strip()] = value.strip()
        elif "=" in part:
            raise DictionaryError(f"field {name!r}: unknown segment {part!r}")
        elif tag is None:
            tag = part
        else:
            raise DictionaryError(f"field {name!r}: extra segment {part!r}")

    spec = FieldSpec(name, offset, width, kind, tag, missing, recode)
    spec.validate()
    return spec


def dumps_dictionary(dictionary: DataDictionary) -> str:
    """Inverse of load_dictionary for round-tripping fixtures."""
    lines = [f"record_length={dictionary.record_length}"]
    for spec in dictionary.fields:
        parts = [spec.name, str(spec.offset), str(spec.width), spec.kind]
        if spec.tag:
            parts.append(spec.tag)
        if spec.missing_codes:
            parts.append("missing=" + ",".join(sorted(spec.missing_codes)))
        if spec.recode:
            parts.append("recode=" + ",".join(f"{k}:{v}" for k, v in spec.recode.items()))
        lines.append("|".join(parts))
    return "\n".join(lines) + "\n"
