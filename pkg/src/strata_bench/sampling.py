"""Sampling strategies: simple random, proportional stratified, balanced stratified.

Balanced stratified sampling draws equal-size subsamples from each eligible
stratum. Classes whose share of labeled rows falls below the minority cutoff
(default 1:100) are ignored; when the per-stratum quota exceeds what the
smallest strata hold, the stratum set is reduced to the largest p classes that
can all supply the quota. Per-stratum draws use sub-seeds keyed by class id, so
results never depend on scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .configfile import parse_block
from .dataset import MISSING_CODE, NOMINAL, Dataset
from .errors import (
    CapacityError,
    ConfigError,
    InsufficientDataError,
    NoEligibleStrataError,
    SamplingError,
    SchemaError,
)
from .seeds import rng_for

STRATEGIES = ("random", "stratified", "balanced")

DEFAULT_MINORITY_RATIO = 0.01


@dataclass(frozen=True)
class SamplingPlan:
    strategy: str
    n: int
    seed: int
    minority_ratio: float = DEFAULT_MINORITY_RATIO
    with_replacement: bool = False

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.n < 1:
            raise ConfigError(f"sample size must be >= 1, got {self.n}")
        if not 0.0 <= self.minority_ratio < 1.0:
            raise ConfigError(f"minority_ratio must be in [0, 1), got {self.minority_ratio}")

    def to_block(self) -> str:
        return (
            f"strategy={self.strategy} n={self.n} seed={self.seed} "
            f"minority_ratio={self.minority_ratio!r} with_replacement={str(self.with_replacement).lower()}"
        )

    @staticmethod
    def from_block(text: str) -> "SamplingPlan":
        values = parse_block(text)
        unknown = set(values) - {"strategy", "n", "seed", "minority_ratio", "with_replacement"}
        if unknown:
            raise ConfigError(f"unknown sampling-plan keys: {sorted(unknown)}")
        try:
            return SamplingPlan(
                strategy=values["strategy"],
                n=int(values["n"]),
                seed=int(values.get("seed", "0")),
                minority_ratio=float(values.get("minority_ratio", str(DEFAULT_MINORITY_RATIO))),
                with_replacement=_parse_bool(values.get("with_replacement", "false")),
            )
        except KeyError as exc:
            raise ConfigError(f"sampling plan missing key {exc.args[0]!r}") from None
        except ValueError as exc:
            raise ConfigError(f"bad sampling plan value: {exc}") from None


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


@dataclass(frozen=True)
class StrataIndex:
    """Per-class row indices for the non-missing labels of one dataset."""

    classes: tuple[str, ...]  # present classes, in label category order
    indices: dict[str, np.ndarray] = field(repr=False)
    total: int = 0
    excluded_missing: int = 0

    def count(self, cls: str) -> int:
        return len(self.indices[cls])

    def counts(self) -> dict[str, int]:
        return {c: len(self.indices[c]) for c in self.classes}


def build_strata(ds: Dataset, label: str) -> StrataIndex:
    """Group row indices by label value; rows with a missing label are excluded and counted."""
    col = ds.column(label)
    if col.kind != NOMINAL:
        raise SchemaError(f"label column {label!r} must be nominal")
    codes = ds.arrays[label]
    missing = int((codes == MISSING_CODE).sum())
    classes = []
    indices = {}
    for code, category in enumerate(col.categories):
        rows = np.flatnonzero(codes == code)
        if len(rows):
            classes.append(category)
            indices[category] = rows
    return StrataIndex(tuple(classes), indices, total=ds.n_rows - missing, excluded_missing=missing)


def random_sample(ds: Dataset, n: int, seed: int) -> Dataset:
    """Uniform sample without replacement; selected rows keep their input order."""
    if not 1 <= n <= ds.n_rows:
        raise InsufficientDataError(f"requested {n} rows but dataset has {ds.n_rows}")
    rng = rng_for(seed, "random")
    idx = np.sort(rng.choice(ds.n_rows, size=n, replace=False))
    return ds.take(idx)


def largest_remainder_quotas(counts: list[int], n: int) -> list[int]:
    """Proportional seat allocation: floor(n*c/total) each, leftovers to the
    largest remainders, remainder ties to earlier position. Integer-exact."""
    total = sum(counts)
    if total <= 0:
        raise SamplingError("cannot allocate from empty strata")
    base = [(n * c) // total for c in counts]
    remainders = [(n * c) % total for c in counts]
    leftover = n - sum(base)
    order = sorted(range(len(counts)), key=lambda i: (-remainders[i], i))
    for i in order[:leftover]:
        base[i] += 1
    return base


def stratified_sample(ds: Dataset, label: str, n: int, seed: int) -> Dataset:
    """Proportional allocation with largest-remainder rounding, uniform within strata."""
    strata = build_strata(ds, label)
    if not 1 <= n <= strata.total:
        raise InsufficientDataError(f"requested {n} rows but dataset has {strata.total} labeled rows")
    counts = [strata.count(c) for c in strata.classes]
    quotas = largest_remainder_quotas(counts, n)
    picks = []
    for cls, quota in zip(strata.classes, quotas):
        if quota == 0:
            continue
        picks.append(_draw(strata.indices[cls], quota, seed, cls, with_replacement=False))
    idx = np.sort(np.concatenate(picks))
    return ds.take(idx)


def eligible_classes(index: StrataIndex, minority_ratio: float) -> list[str]:
    """Classes whose share of labeled rows is at least the cutoff (strict drop below)."""
    if not index.classes:
        raise NoEligibleStrataError("dataset has no labeled rows")
    kept = [c for c in index.classes if index.count(c) / index.total >= minority_ratio]
    if not kept:
        raise NoEligibleStrataError(
            f"all {len(index.classes)} classes fall below the minority ratio {minority_ratio}"
        )
    return kept


@dataclass(frozen=True)
class BalancedAllocation:
    quotas: dict[str, int]  # class -> rows to draw, insertion order = draw order
    shortfall: int = 0  # seats that could not be placed (reported, never silently filled)
    replacement_classes: tuple[str, ...] = ()  # classes that must draw with replacement

    @property
    def total(self) -> int:
        return sum(self.quotas.values())


def allocate_balanced(
    sizes: dict[str, int],
    n: int,
    with_replacement: bool = False,
) -> BalancedAllocation:
    """Equal-size allocation over eligible strata.

    Without replacement: the stratum set is reduced to the largest p classes
    (descending size, ties by the given class order) such that each holds at
    least floor(n/p) rows; the first n mod p of them take one extra row when
    they have capacity, otherwise the seat is reported as shortfall. With
    replacement: every eligible class keeps a quota and undersized strata
    draw with replacement.
    """
    if not sizes:
        raise SamplingError("allocate_balanced requires at least one class")
    if n < 1:
        raise SamplingError(f"sample size must be >= 1, got {n}")
    names = list(sizes)
    order = sorted(range(len(names)), key=lambda i: (-sizes[names[i]], i))
    ordered = [names[i] for i in order]

    if with_replacement:
        p = len(ordered)
        base, extra = divmod(n, p)
        quotas = {cls: base + (1 if rank < extra else 0) for rank, cls in enumerate(ordered)}
        needs_replacement = tuple(c for c in ordered if quotas[c] > sizes[c])
        return BalancedAllocation(quotas, 0, needs_replacement)

    for p in range(len(ordered), 0, -1):
        base = n // p
        chosen = ordered[:p]
        if sizes[chosen[-1]] < base:  # smallest of the p largest cannot meet the quota
            continue
        extra = n % p
        quotas = {}
        shortfall = 0
        for rank, cls in enumerate(chosen):
            want = base + (1 if rank < extra else 0)
            if want > sizes[cls]:
                shortfall += want - sizes[cls]
                want = sizes[cls]
            quotas[cls] = want
        return BalancedAllocation(quotas, shortfall, ())

    achievable = max(p * sizes[cls] for p, cls in enumerate(ordered, start=1))
    raise CapacityError(
        f"no stratum subset can supply {n} balanced rows; max achievable sample size is {achievable}",
        max_achievable=achievable,
    )


def balanced_stratified_sample(ds: Dataset, label: str, plan: SamplingPlan) -> Dataset:
    """Fixed-allocation balanced sample: strata -> minority cutoff -> equal quotas -> draws."""
    if plan.strategy != "balanced":
        raise ConfigError(f"plan strategy must be balanced, got {plan.strategy!r}")
    strata = build_strata(ds, label)
    eligible = eligible_classes(strata, plan.minority_ratio)
    sizes = {c: strata.count(c) for c in eligible}
    allocation = allocate_balanced(sizes, plan.n, plan.with_replacement)
    picks = []
    for cls, quota in allocation.quotas.items():
        if quota == 0:
            continue
        replace = cls in allocation.replacement_classes
        picks.append(_draw(strata.indices[cls], quota, plan.seed, cls, with_replacement=replace))
    if not picks:
        raise SamplingError("allocation produced no rows")
    idx = np.sort(np.concatenate(picks))
    return ds.take(idx)


def _draw(rows: np.ndarray, quota: int, seed: int, cls: str, with_replacement: bool) -> np.ndarray:
    rng = rng_for(seed, "stratum", cls)
    return rows[rng.choice(len(rows), size=quota, replace=with_replacement)]


def sample(ds: Dataset, label: str | None, plan: SamplingPlan) -> Dataset:
    """Dispatch on plan.strategy; label is required for the stratified strategies."""
    if plan.strategy == "random":
        return random_sample(ds, plan.n, plan.seed)
    if label is None:
        raise SchemaError(f"{plan.strategy} sampling requires a label column")
    if plan.strategy == "stratified":
        return stratified_sample(ds, label, plan.n, plan.seed)
    return balanced_stratified_sample(ds, label, plan)
