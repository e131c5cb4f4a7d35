"""Synthetic imbalanced datasets shaped like registry extracts.

Real registry files are access-restricted, so benchmarks run on generated
data: a class label drawn from configured proportions and attributes drawn
from a mixture (1 - s) * marginal + s * class-conditional, where the signal
strength s in [0, 1] interpolates between class-independent and fully
class-conditional attribute distributions. A mixed-dataset constructor pools
random rows from two compatible datasets and tags their provenance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .configfile import ConfigSection, get_float, get_int, parse_config
from .dataset import MISSING_CODE, NOMINAL, NUMERIC, Column, Dataset
from .errors import ConfigError, InsufficientDataError, SchemaError
from .seeds import rng_for

SOURCE_COLUMN = "source"  # reserved provenance column added by mix()

_PROPORTION_TOLERANCE = 1e-9


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    kind: str
    tag: str | None = None
    missing_rate: float = 0.0
    signal: float | None = None  # overrides the spec-level signal when set
    categories: tuple[str, ...] = ()
    class_weights: tuple[tuple[float, ...], ...] = ()  # one weight row per class
    class_means: tuple[float, ...] = ()
    class_stddevs: tuple[float, ...] = ()

    def validate(self, n_classes: int) -> None:
        if self.kind not in (NOMINAL, NUMERIC):
            raise ConfigError(f"attribute {self.name!r}: kind must be nominal or numeric")
        if not 0.0 <= self.missing_rate <= 1.0:
            raise ConfigError(f"attribute {self.name!r}: missing_rate must be in [0, 1]")
        if self.signal is not None and not 0.0 <= self.signal <= 1.0:
            raise ConfigError(f"attribute {self.name!r}: signal must be in [0, 1]")
        if self.kind == NOMINAL:
            if len(self.categories) < 2:
                raise ConfigError(f"attribute {self.name!r}: nominal attributes need >= 2 categories")
            if len(self.class_weights) != n_classes:
                raise ConfigError(f"attribute {self.name!r}: expected {n_classes} weight rows")
            for row in self.class_weights:
                if len(row) != len(self.categories):
                    raise ConfigError(f"attribute {self.name!r}: weight row length != category count")
                if any(w < 0 for w in row) or sum(row) <= 0:
                    raise ConfigError(f"attribute {self.name!r}: weights must be nonnegative with a positive sum")
        else:
            if len(self.class_means) != n_classes:
                raise ConfigError(f"attribute {self.name!r}: expected {n_classes} means")
            if len(self.class_stddevs) != n_classes:
                raise ConfigError(f"attribute {self.name!r}: expected {n_classes} stddevs")
            if any(s < 0 for s in self.class_stddevs):
                raise ConfigError(f"attribute {self.name!r}: stddevs must be >= 0")


@dataclass(frozen=True)
class SynthSpec:
    rows: int
    label: str
    classes: tuple[str, ...]
    proportions: tuple[float, ...]
    signal: float
    attributes: tuple[AttributeSpec, ...]

    def validate(self) -> None:
        if self.rows < 1:
            raise ConfigError(f"rows must be >= 1, got {self.rows}")
        if len(self.classes) < 2 or len(self.classes) != len(self.proportions):
            raise ConfigError("classes and proportions must align with >= 2 entries")
        if any(p <= 0 for p in self.proportions):
            raise ConfigError("class proportions must be positive")
        if abs(sum(self.proportions) - 1.0) > _PROPORTION_TOLERANCE:
            raise ConfigError(f"class proportions must sum to 1, got {sum(self.proportions)}")
        if not 0.0 <= self.signal <= 1.0:
            raise ConfigError(f"signal must be in [0, 1], got {self.signal}")
        names = [self.label] + [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise ConfigError("attribute names (and the label) must be unique")
        if not self.attributes:
            raise ConfigError("spec declares no attributes")
        for attr in self.attributes:
            attr.validate(len(self.classes))


def generate(spec: SynthSpec, seed: int) -> Dataset:
    """Draw spec.rows independent rows; deterministic per (spec, seed).

    Every attribute stream is keyed by (seed, attribute name), so adding or
    reordering attributes never perturbs the values of the others.
    """
    spec.validate()
    p = np.asarray(spec.proportions, dtype=np.float64)
    p = p / p.sum()
    n = spec.rows
    n_classes = len(spec.classes)
    class_codes = rng_for(seed, "label").choice(n_classes, size=n, p=p)

    columns = [Column(spec.label, NOMINAL, spec.classes)]
    arrays: dict[str, np.ndarray] = {spec.label: class_codes.astype(np.int32)}
    for attr in spec.attributes:
        rng = rng_for(seed, "attribute", attr.name)
        s = spec.signal if attr.signal is None else attr.signal
        decoy = rng.choice(n_classes, size=n, p=p)
        conditional = rng.random(n) < s
        effective = np.where(conditional, class_codes, decoy)
        if attr.kind == NOMINAL:
            weights = np.asarray(attr.class_weights, dtype=np.float64)
            cumulative = np.cumsum(weights / weights.sum(axis=1, keepdims=True), axis=1)
            u = rng.random(n)
            draws = (cumulative[effective] < u[:, None]).sum(axis=1)
            codes = np.minimum(draws, len(attr.categories) - 1).astype(np.int32)
            if attr.missing_rate > 0.0:
                codes[rng.random(n) < attr.missing_rate] = MISSING_CODE
            columns.append(Column(attr.name, NOMINAL, attr.categories, attr.tag))
            arrays[attr.name] = codes
        else:
            means = np.asarray(attr.class_means, dtype=np.float64)
            stddevs = np.asarray(attr.class_stddevs, dtype=np.float64)
            values = means[effective] + stddevs[effective] * rng.standard_normal(n)
            if attr.missing_rate > 0.0:
                values[rng.random(n) < attr.missing_rate] = np.nan
            columns.append(Column(attr.name, NUMERIC, (), attr.tag))
            arrays[attr.name] = values
    return Dataset(tuple(columns), arrays, spec.label)


def mix(
    a: Dataset,
    b: Dataset,
    n_a: int,
    n_b: int,
    seed: int,
    source_names: tuple[str, str] = ("a", "b"),
) -> Dataset:
    """Pool n_a random rows of `a` with n_b of `b`, projected onto their shared
    columns, and append a `source` provenance column."""
    if source_names[0] == source_names[1]:
        raise ConfigError("source names must differ")
    if n_a > a.n_rows:
        raise InsufficientDataError(f"requested {n_a} rows but first dataset has {a.n_rows}")
    if n_b > b.n_rows:
        raise InsufficientDataError(f"requested {n_b} rows but second dataset has {b.n_rows}")
    if n_a < 0 or n_b < 0 or n_a + n_b == 0:
        raise ConfigError("row counts must be nonnegative and sum to at least 1")
    shared = [
        col.name
        for col in a.columns
        if b.has_column(col.name) and b.column(col.name).kind == col.kind
    ]
    if not shared:
        raise SchemaError("datasets share no columns of matching kind")
    if SOURCE_COLUMN in shared:
        raise SchemaError(f"column name {SOURCE_COLUMN!r} is reserved for mix provenance")

    pick_a = np.sort(rng_for(seed, "mix", 0).choice(a.n_rows, size=n_a, replace=False))
    pick_b = np.sort(rng_for(seed, "mix", 1).choice(b.n_rows, size=n_b, replace=False))

    columns: list[Column] = []
    arrays: dict[str, np.ndarray] = {}
    for name in shared:
        col_a, col_b = a.column(name), b.column(name)
        if col_a.kind == NOMINAL:
            categories = list(col_a.categories)
            index = {c: i for i, c in enumerate(categories)}
            remap = np.full(len(col_b.categories) + 1, MISSING_CODE, dtype=np.int32)
            for local, cat in enumerate(col_b.categories):
                if cat not in index:
                    index[cat] = len(categories)
                    categories.append(cat)
                remap[local] = index[cat]
            part_a = a.arrays[name][pick_a]
            part_b = remap[b.arrays[name][pick_b]]
            columns.append(Column(name, NOMINAL, tuple(categories), col_a.tag))
            arrays[name] = np.concatenate([part_a, part_b]).astype(np.int32)
        else:
            columns.append(Column(name, NUMERIC, (), col_a.tag))
            arrays[name] = np.concatenate([a.arrays[name][pick_a], b.arrays[name][pick_b]])
    source = Column(SOURCE_COLUMN, NOMINAL, source_names)
    columns.append(source)
    arrays[SOURCE_COLUMN] = np.concatenate(
        [np.zeros(n_a, dtype=np.int32), np.ones(n_b, dtype=np.int32)]
    )
    label = a.label if a.label in shared else None
    return Dataset(tuple(columns), arrays, label)


# -- spec files --------------------------------------------------------------


def parse_spec(text: str) -> SynthSpec:
    doc = parse_config(text)
    v = doc.values
    classes: list[str] = []
    proportions: list[float] = []
    for item in v.get("classes", "").split(","):
        item = item.strip()
        if not item:
            continue
        name, sep, weight = item.partition(":")
        if not sep:
            raise ConfigError(f"classes entries must be name:proportion, got {item!r}")
        classes.append(name.strip())
        try:
            proportions.append(float(weight))
        except ValueError:
            raise ConfigError(f"bad proportion in classes entry {item!r}") from None
    attributes = [_parse_attribute(section, classes) for section in doc.sections]
    spec = SynthSpec(
        rows=get_int(v, "rows"),
        label=v.get("label", "class"),
        classes=tuple(classes),
        proportions=tuple(proportions),
        signal=get_float(v, "signal", 1.0),
        attributes=tuple(attributes),
    )
    spec.validate()
    return spec


def _parse_attribute(section: ConfigSection, classes: list[str]) -> AttributeSpec:
    if section.kind != "attribute" or not section.name:
        raise ConfigError(f"unexpected section [{section.kind} {section.name}]")
    v = section.values
    kind = v.get("kind", NOMINAL)
    name = section.name
    common = dict(
        name=name,
        kind=kind,
        tag=v.get("tag") or None,
        missing_rate=get_float(v, "missing_rate", 0.0),
        signal=get_float(v, "signal") if "signal" in v else None,
    )
    if kind == NOMINAL:
        categories = tuple(c.strip() for c in v.get("categories", "").split(",") if c.strip())
        weights = []
        for cls in classes:
            key = f"weights_{cls}"
            if key not in v:
                raise ConfigError(f"attribute {name!r}: missing {key}")
            try:
                weights.append(tuple(float(w) for w in v[key].split(",")))
            except ValueError:
                raise ConfigError(f"attribute {name!r}: bad weights in {key}") from None
        return AttributeSpec(**common, categories=categories, class_weights=tuple(weights))
    try:
        means = tuple(float(m) for m in v.get("means", "").split(","))
        stddev_text = v.get("stddevs", "1.0")
        stddevs = tuple(float(s) for s in stddev_text.split(","))
    except ValueError:
        raise ConfigError(f"attribute {name!r}: bad means/stddevs") from None
    if len(stddevs) == 1:
        stddevs = stddevs * len(classes)
    return AttributeSpec(**common, class_means=means, class_stddevs=stddevs)


def dumps_spec(spec: SynthSpec) -> str:
    lines = [
        f"rows = {spec.rows}",
        f"label = {spec.label}",
        "classes = " + ", ".join(f"{c}:{p!r}" for c, p in zip(spec.classes, spec.proportions)),
        f"signal = {spec.signal!r}",
    ]
    for attr in spec.attributes:
        lines.append("")
        lines.append(f"[attribute {attr.name}]")
        lines.append(f"kind = {attr.kind}")
        if attr.tag:
            lines.append(f"tag = {attr.tag}")
        if attr.missing_rate:
            lines.append(f"missing_rate = {attr.missing_rate!r}")
        if attr.signal is not None:
            lines.append(f"signal = {attr.signal!r}")
        if attr.kind == NOMINAL:
            lines.append("categories = " + ", ".join(attr.categories))
            for cls, row in zip(spec.classes, attr.class_weights):
                lines.append(f"weights_{cls} = " + ", ".join(repr(w) for w in row))
        else:
            lines.append("means = " + ", ".join(repr(m) for m in attr.class_means))
            lines.append("stddevs = " + ", ".join(repr(s) for s in attr.class_stddevs))
    return "\n".join(lines) + "\n"


# -- the default benchmark profile -------------------------------------------

_PROFILE_STRUCTURE_SEED = 271828  # fixed: the default profile never changes across runs

DEFAULT_CLASSES = ("stage_I", "stage_II", "stage_III", "stage_IV")
DEFAULT_PROPORTIONS = (0.70, 0.20, 0.09, 0.01)

# survival odds worsen with stage; metastasis mass shifts toward higher codes
_SURVIVAL_WEIGHTS = (
    (0.92, 0.08),
    (0.75, 0.25),
    (0.45, 0.55),
    (0.12, 0.88),
)

_TAGS = ("demographic", "site", "extension", "staging")


def _metastasis_weights(n_codes: int = 10) -> tuple[tuple[float, ...], ...]:
    rows = []
    centers = (1.0, 3.5, 6.0, 8.5)
    for center in centers:
        row = [np.exp(-0.5 * ((i - center) / 1.6) ** 2) + 0.02 for i in range(n_codes)]
        rows.append(tuple(row))
    return tuple(rows)


def default_profile(
    rows: int = 50_000,
    signal: float = 0.8,
    n_nominal: int = 22,
    n_numeric: int = 14,
) -> SynthSpec:
    """The stock benchmark dataset: an imbalanced 4-class staging label whose 1%
    minority class sits exactly at the 1:100 eligibility boundary, 36 mixed-type
    predictors, and auxiliary survival/metastasis outcome columns.

    Stages form an ordered severity chain. Most nominal predictors spread the
    stages across wide category spaces (8..15 values) so that many-way splits
    carry real signal yet fragment small training samples; numeric predictors
    shift their class means by less than a standard deviation per stage. The
    design leaves accuracy room to climb across the whole 500..30000 size
    range instead of saturating on a few hundred rows.
    """
    structure = rng_for(_PROFILE_STRUCTURE_SEED, "default-profile")
    n_classes = len(DEFAULT_CLASSES)
    marker_positions = {n_nominal - 2, n_nominal - 1} if n_nominal >= 2 else set()
    attributes: list[AttributeSpec] = []
    for i in range(n_nominal):
        # wide category spaces: each stage occupies its own band, so many-way
        # splits are powerful with thousands of rows but fragment small samples
        k = int(structure.integers(8, 16))
        start = float(structure.uniform(0.0, k - 1.0))
        step = float(structure.uniform(0.30, 0.45)) * k * (1 if structure.random() < 0.5 else -1)
        width = float(structure.uniform(0.45, 0.7))
        floor = float(structure.uniform(0.015, 0.04))
        if i in marker_positions:
            # majority markers: strongly indicative of the most common stage,
            # uninformative among the rest; they stabilize small-sample runs
            attributes.append(
                AttributeSpec(
                    name=f"nom_{i:02d}",
                    kind=NOMINAL,
                    tag=_TAGS[i % len(_TAGS)],
                    categories=("m0", "m1", "m2", "m3"),
                    class_weights=(
                        (1.0, 0.03, 0.03, 0.03),
                        (0.03, 0.34, 0.33, 0.33),
                        (0.03, 0.34, 0.33, 0.33),
                        (0.03, 0.34, 0.33, 0.33),
                    ),
                )
            )
            continue
        weights = []
        for c in range(n_classes):
            center = start + step * c
            row = [float(np.exp(-0.5 * ((j - center) / width) ** 2) + floor) for j in range(k)]
            weights.append(tuple(row))
        categories = tuple(f"v{j}" for j in range(k))
        attributes.append(
            AttributeSpec(
                name=f"nom_{i:02d}",
                kind=NOMINAL,
                tag=_TAGS[i % len(_TAGS)],
                categories=categories,
                class_weights=tuple(weights),
            )
        )
    for i in range(n_numeric):
        base = float(structure.uniform(-2.0, 2.0))
        delta = float(structure.uniform(0.70, 1.00)) * (1 if structure.random() < 0.5 else -1)
        jitter = [float(structure.normal(0.0, 0.08)) for _ in range(n_classes)]
        means = tuple(base + delta * c + jitter[c] for c in range(n_classes))
        stddevs = tuple(float(structure.uniform(0.85, 1.00)) for _ in range(n_classes))
        attributes.append(
            AttributeSpec(
                name=f"num_{i:02d}",
                kind=NUMERIC,
                tag=_TAGS[i % len(_TAGS)],
                class_means=means,
                class_stddevs=stddevs,
            )
        )
    attributes.append(
        AttributeSpec(
            name="survival",
            kind=NOMINAL,
            categories=("survived", "not_survived"),
            class_weights=_SURVIVAL_WEIGHTS,
        )
    )
    attributes.append(
        AttributeSpec(
            name="metastasis",
            kind=NOMINAL,
            categories=tuple(f"M{i}" for i in range(10)),
            class_weights=_metastasis_weights(),
        )
    )
    return SynthSpec(
        rows=rows,
        label="stage",
        classes=DEFAULT_CLASSES,
        proportions=DEFAULT_PROPORTIONS,
        signal=signal,
        attributes=tuple(attributes),
    )
