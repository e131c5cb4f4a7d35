"""Plain-text config dialect shared by grid, synthesis and plan files.

Files are `key = value` lines with `#` comments; list values are
comma-separated. `[section name]` headers open named sections (used by the
synthesis spec for per-attribute blocks). Single-line blocks pack
space-separated `key=value` tokens.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError


@dataclass
class ConfigSection:
    kind: str
    name: str
    values: dict[str, str] = field(default_factory=dict)


@dataclass
class ConfigDocument:
    values: dict[str, str] = field(default_factory=dict)
    sections: list[ConfigSection] = field(default_factory=list)


def parse_config(text: str) -> ConfigDocument:
    doc = ConfigDocument()
    current: dict[str, str] = doc.values
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            header = line[1:-1].strip()
            kind, _, name = header.partition(" ")
            if not kind:
                raise ConfigError(f"line {lineno}: empty section header")
            section = ConfigSection(kind, name.strip())
            doc.sections.append(section)
            current = section.values
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in current:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        current[key] = value.strip()
    return doc


def parse_block(text: str) -> dict[str, str]:
    """Parse a single-line block of space-separated key=value tokens."""
    values: dict[str, str] = {}
    for token in text.split():
        key, sep, value = token.partition("=")
        if not sep or not key:
            raise ConfigError(f"expected key=value token, got {token!r}")
        if key in values:
            raise ConfigError(f"duplicate key {key!r} in block")
        values[key] = value
    return values


def get_int(values: dict[str, str], key: str, default: int | None = None) -> int:
    if key not in values:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return int(values[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: expected an integer, got {values[key]!r}") from None


def get_float(values: dict[str, str], key: str, default: float | None = None) -> float:
    if key not in values:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return float(values[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: expected a number, got {values[key]!r}") from None


def get_list(values: dict[str, str], key: str, default: list[str] | None = None) -> list[str]:
    if key not in values:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return list(default)
    return [item.strip() for item in values[key].split(",") if item.strip()]


def get_bool(values: dict[str, str], key: str, default: bool) -> bool:
    if key not in values:
        return default
    lowered = values[key].strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"key {key!r}: expected a boolean, got {values[key]!r}")
