import math

import numpy as np
import pytest

from strata_bench.dataset import Column, Dataset
from strata_bench.errors import ConfigError, InsufficientDataError, SchemaError
from strata_bench.sampling import build_strata
from strata_bench.synth import (
    AttributeSpec,
    SynthSpec,
    default_profile,
    dumps_spec,
    generate,
    mix,
    parse_spec,
)


def _small_spec(signal: float = 0.8, missing: float = 0.0) -> SynthSpec:
    return SynthSpec(
        rows=600,
        label="cls",
        classes=("A", "B"),
        proportions=(0.7, 0.3),
        signal=signal,
        attributes=(
            AttributeSpec(
                "color", "nominal", tag="g1", missing_rate=missing,
                categories=("red", "blue"),
                class_weights=((0.9, 0.1), (0.1, 0.9)),
            ),
            AttributeSpec(
                "size", "numeric", tag="g1", class_means=(0.0, 5.0), class_stddevs=(1.0, 1.0),
            ),
        ),
    )


def test_generate_deterministic_per_seed():
    spec = _small_spec()
    assert generate(spec, 42).equals(generate(spec, 42))
    assert not generate(spec, 42).equals(generate(spec, 43))


def test_generate_zero_signal_attributes_independent():
    ds = generate(_small_spec(signal=0.0), 7)
    # with s=0 the color column is class-independent: conditional frequencies match
    reds = ds.arrays["color"] == 0
    a_rows = ds.arrays["cls"] == 0
    rate_a = reds[a_rows].mean()
    rate_b = reds[~a_rows].mean()
    assert abs(rate_a - rate_b) < 0.15


def test_generate_full_signal_disjoint_categories_separable():
    spec = SynthSpec(
        rows=400,
        label="cls",
        classes=("A", "B"),
        proportions=(0.5, 0.5),
        signal=1.0,
        attributes=(
            AttributeSpec(
                "marker", "nominal",
                categories=("ka", "kb"),
                class_weights=((1.0, 0.0), (0.0, 1.0)),
            ),
        ),
    )
    ds = generate(spec, 3)
    for i in range(ds.n_rows):
        marker = ds.cell(i, "marker")
        cls = ds.cell(i, "cls")
        assert (marker == "ka") == (cls == "A")


def test_realized_counts_within_three_sigma():
    profile = default_profile()
    assert profile.rows == 50_000
    ds = generate(profile, 42)
    counts = build_strata(ds, "stage").counts()
    for cls, p in zip(profile.classes, profile.proportions):
        expected = profile.rows * p
        sigma = math.sqrt(profile.rows * p * (1 - p))
        assert abs(counts[cls] - expected) <= 3 * sigma


def test_missing_rate_applied():
    ds = generate(_small_spec(missing=0.25), 11)
    fraction = ds.missing_mask("color").mean()
    assert 0.15 < fraction < 0.35
    assert ds.missing_mask("cls").sum() == 0  # label never missing


def test_default_profile_shape():
    profile = default_profile()
    names = [a.name for a in profile.attributes]
    assert len(names) == 38  # 36 predictors + survival + metastasis outcome columns
    assert "survival" in names and "metastasis" in names
    assert profile.proportions == (0.70, 0.20, 0.09, 0.01)
    survival = next(a for a in profile.attributes if a.name == "survival")
    assert len(survival.categories) == 2
    metastasis = next(a for a in profile.attributes if a.name == "metastasis")
    assert len(metastasis.categories) == 10


def test_spec_validation_errors():
    spec = _small_spec()
    with pytest.raises(ConfigError):
        SynthSpec(0, spec.label, spec.classes, spec.proportions, 0.5, spec.attributes).validate()
    with pytest.raises(ConfigError):
        SynthSpec(10, spec.label, spec.classes, (0.6, 0.6), 0.5, spec.attributes).validate()
    with pytest.raises(ConfigError):
        SynthSpec(10, spec.label, spec.classes, spec.proportions, 1.5, spec.attributes).validate()
    with pytest.raises(ConfigError):
        generate(SynthSpec(10, "cls", ("A", "B"), (0.5, 0.5), 0.5, ()), 0)


def test_spec_file_round_trip():
    spec = _small_spec(signal=0.65, missing=0.05)
    text = dumps_spec(spec)
    assert parse_spec(text) == spec
    regenerated = generate(parse_spec(text), 5)
    assert regenerated.equals(generate(spec, 5))


# -- mix -----------------------------------------------------------------------


def _mix_inputs():
    a = generate(_small_spec(), 1)
    spec_b = SynthSpec(
        rows=300,
        label="cls",
        classes=("A", "B"),
        proportions=(0.4, 0.6),
        signal=0.5,
        attributes=(
            AttributeSpec(
                "color", "nominal",
                categories=("blue", "green"),  # overlaps partially with a's colors
                class_weights=((0.5, 0.5), (0.2, 0.8)),
            ),
            AttributeSpec("weight", "numeric", class_means=(1.0, 2.0), class_stddevs=(0.5, 0.5)),
        ),
    )
    return a, generate(spec_b, 2)


def test_mix_identity_plus_tag():
    a, b = _mix_inputs()
    out = mix(a, b, a.n_rows, 0, seed=4, source_names=("left", "right"))
    assert out.n_rows == a.n_rows
    assert out.column_names == ["cls", "color", "source"]  # shared columns only
    assert {out.cell(i, "source") for i in range(out.n_rows)} == {"left"}


def test_mix_counts_and_provenance():
    a, b = _mix_inputs()
    out = mix(a, b, 100, 100, seed=9, source_names=("breast", "respiratory"))
    assert out.n_rows == 200
    counts = build_strata(out, "source").counts()
    assert counts == {"breast": 100, "respiratory": 100}


def test_mix_merges_category_registries():
    a, b = _mix_inputs()
    out = mix(a, b, 50, 50, seed=1)
    merged = out.column("color").categories
    assert merged == ("red", "blue", "green")


def test_mix_no_shared_columns_errors():
    a, _ = _mix_inputs()
    other = Dataset.from_cells([Column("entirely", "numeric")], [[1.0], [2.0]])
    with pytest.raises(SchemaError):
        mix(a, other, 1, 1, seed=0)


def test_mix_insufficient_rows():
    a, b = _mix_inputs()
    with pytest.raises(InsufficientDataError):
        mix(a, b, a.n_rows + 1, 0, seed=0)


def test_mix_deterministic():
    a, b = _mix_inputs()
    assert mix(a, b, 40, 40, seed=8).equals(mix(a, b, 40, 40, seed=8))


def test_mix_reserved_source_column():
    a, b = _mix_inputs()
    tagged = mix(a, b, 10, 10, seed=0)
    with pytest.raises(SchemaError, match="reserved"):
        mix(tagged, tagged, 5, 5, seed=0)
