import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import entropy_bits, months_oracle
from strata_bench.dataset import Column, Dataset
from strata_bench.errors import DegenerateDatasetError, MappingError, PreprocessError
from strata_bench.preprocess import (
    LabelSpec,
    StagingMapping,
    correlation_filter,
    derive_metastasis_label,
    derive_survival_label,
    information_gain,
    information_gain_filter,
    recode_survival_months,
    remove_missing,
)


# -- survival recode ------------------------------------------------------------


def test_survival_recode_two_years_eleven_months():
    # 2 years and 11 months: 2*12 + 11
    assert recode_survival_months("0211") == 35


@pytest.mark.parametrize("raw,expected", [("0000", 0), ("1003", 123), ("9999", 12 * 99 + 99)])
def test_survival_recode_examples(raw, expected):
    assert recode_survival_months(raw) == expected


@pytest.mark.parametrize("raw", ["021", "02111", "02x1", "", "-211"])
def test_survival_recode_rejects_bad_input(raw):
    with pytest.raises(PreprocessError):
        recode_survival_months(raw)


def test_survival_recode_matches_oracle_everywhere():
    for yy in range(0, 100, 7):
        for mm in range(0, 100, 9):
            assert recode_survival_months(f"{yy:02d}{mm:02d}") == months_oracle(yy, mm)


def test_survival_recode_monotone_on_calendar_domain():
    # lexicographic (YY, MM) order maps to increasing months while MM stays < 12
    previous = -1
    for yy in range(100):
        for mm in range(12):
            months = recode_survival_months(f"{yy:02d}{mm:02d}")
            assert months > previous
            previous = months


# -- survival label ---------------------------------------------------------------


@pytest.mark.parametrize(
    "months,vital,cod,expected",
    [
        (72, "alive", None, "survived"),
        (20, "dead", "breast", "not_survived"),
        (20, "dead", "accident", "excluded"),
        (59, "alive", None, "excluded"),
        (60, "dead", "breast", "survived"),  # threshold is inclusive for survival
    ],
)
def test_survival_label_rule(months, vital, cod, expected):
    assert derive_survival_label(months, vital, cod, "breast", 60) == expected


def test_survival_label_partitions():
    outcomes = set()
    for months in (0, 30, 59, 60, 61, 200):
        for vital in ("alive", "dead"):
            for cod in (None, "breast", "other"):
                outcomes.add(derive_survival_label(months, vital, cod, "breast"))
    assert outcomes == {"survived", "not_survived", "excluded"}


# -- label specs -------------------------------------------------------------------


def test_label_spec_reference_counts():
    assert LabelSpec("survival", ("survived", "not_survived")).matches_reference_counts
    assert LabelSpec("stage", ("I", "II", "III", "IV")).matches_reference_counts
    assert LabelSpec("metastasis", tuple(f"M{i}" for i in range(10))).matches_reference_counts
    assert not LabelSpec("stage", ("I", "II")).matches_reference_counts
    # synthetic labels are unconstrained
    assert LabelSpec("cluster", ("a", "b", "c")).matches_reference_counts


def test_label_spec_validation():
    with pytest.raises(PreprocessError):
        LabelSpec("stage", ())
    with pytest.raises(PreprocessError):
        LabelSpec("stage", ("I", "I"))


# -- metastasis mapping -----------------------------------------------------------

MAPPING_CSV = """\
era_range,source_column,code,target_category
-2003,eod,E3,M3
-2003,eod,E1,M1
2004-,cs,C3,M3
2004-,cs,C1,M1
"""


def test_metastasis_era_routing():
    mapping = StagingMapping.from_csv(MAPPING_CSV)
    row_2002 = {"year": 2002.0, "eod": "E3", "cs": None}
    row_2006 = {"year": 2006.0, "eod": None, "cs": "C3"}
    assert derive_metastasis_label(row_2002, ["eod"], ["cs"], "year", mapping) == "M3"
    assert derive_metastasis_label(row_2006, ["eod"], ["cs"], "year", mapping) == "M3"


def test_metastasis_unmapped_code_errors():
    mapping = StagingMapping.from_csv(MAPPING_CSV)
    row = {"year": 2006.0, "eod": None, "cs": "C9"}
    with pytest.raises(MappingError, match="2006"):
        derive_metastasis_label(row, ["eod"], ["cs"], "year", mapping)


def test_metastasis_fallback_row():
    text = MAPPING_CSV + "*,*,*,M0\n"
    mapping = StagingMapping.from_csv(text)
    row = {"year": 2006.0, "eod": None, "cs": "C9"}
    assert derive_metastasis_label(row, ["eod"], ["cs"], "year", mapping) == "M0"


# -- missing removal --------------------------------------------------------------


def _missing_fixture():
    columns = [Column("a", "nominal"), Column("b", "numeric"), Column("c", "nominal")]
    rows = [
        ["x", 1.0, "p"],
        [None, 2.0, "q"],
        [None, None, "p"],
        [None, 4.0, "q"],
        ["y", 5.0, "p"],
    ]
    return Dataset.from_cells(columns, rows)


def test_column_above_threshold_removed():
    ds, report = remove_missing(_missing_fixture(), col_threshold=0.5, row_policy="keep")
    assert ds.column_names == ["b", "c"]  # column a is 60% missing
    assert report.removed_by_missing == [("a", 0.6)]


def test_rows_with_missing_dropped():
    ds, report = remove_missing(_missing_fixture(), col_threshold=0.5)
    assert ds.column_names == ["b", "c"]
    assert ds.n_rows == 4  # the all-but-label-missing row fails on column b
    assert report.rows_removed == 1


def test_no_missing_is_identity():
    columns = [Column("a", "nominal"), Column("b", "numeric")]
    ds = Dataset.from_cells(columns, [["x", 1.0], ["y", 2.0]])
    out, report = remove_missing(ds)
    assert out.equals(ds)
    assert not report.removed_by_missing and report.rows_removed == 0


def test_exactly_at_threshold_retained():
    columns = [Column("a", "nominal"), Column("b", "numeric")]
    ds = Dataset.from_cells(columns, [["x", 1.0], [None, 2.0]])
    out, report = remove_missing(ds, col_threshold=0.5, row_policy="keep")
    assert out.column_names == ["a", "b"]  # 50% missing is not above 0.5
    assert not report.removed_by_missing


def test_all_columns_removed_is_degenerate():
    ds = Dataset.from_cells([Column("a", "nominal")], [[None], [None]])
    with pytest.raises(DegenerateDatasetError):
        remove_missing(ds, col_threshold=0.1)


# -- correlation filter ------------------------------------------------------------


def test_duplicated_numeric_column_dropped():
    values = [1.0, 4.0, 2.0, 8.0, 5.0]
    columns = [Column("a", "numeric", (), "g"), Column("b", "numeric", (), "g")]
    ds = Dataset.from_cells(columns, [[v, v] for v in values])
    out, report = correlation_filter(ds, 0.95)
    assert out.column_names == ["a"]
    assert report.removed_by_correlation[0][:2] == ("a", "b")
    assert report.removed_by_correlation[0][2] == pytest.approx(1.0)


def test_independent_columns_both_retained():
    rng = np.random.default_rng(99)
    x = rng.random(200)
    y = rng.random(200)
    # oracle: direct Pearson formula, independent of the implementation
    r = float(np.mean((x - x.mean()) * (y - y.mean())) / (x.std() * y.std()))
    assert abs(r) < 0.95
    columns = [Column("a", "numeric", (), "g"), Column("b", "numeric", (), "g")]
    ds = Dataset.from_cells(columns, [[float(a), float(b)] for a, b in zip(x, y)])
    out, _ = correlation_filter(ds, 0.95)
    assert out.column_names == ["a", "b"]


def test_identical_pair_in_different_tags_retained():
    columns = [Column("a", "numeric", (), "g1"), Column("b", "numeric", (), "g2")]
    ds = Dataset.from_cells(columns, [[v, v] for v in [1.0, 2.0, 3.0]])
    out, _ = correlation_filter(ds)
    assert out.column_names == ["a", "b"]


def test_identical_nominal_pair_dropped_via_cramers_v():
    columns = [Column("a", "nominal", (), "g"), Column("b", "nominal", (), "g")]
    rows = [[v, v] for v in ["x", "y", "x", "z", "y", "x"]]
    ds = Dataset.from_cells(columns, rows)
    out, report = correlation_filter(ds)
    assert out.column_names == ["a"]
    assert report.removed_by_correlation[0][2] == pytest.approx(1.0)


def test_mixed_kind_pairs_skipped():
    columns = [Column("a", "nominal", (), "g"), Column("b", "numeric", (), "g")]
    ds = Dataset.from_cells(columns, [["x", 1.0], ["y", 2.0], ["x", 1.0]])
    out, _ = correlation_filter(ds)
    assert out.column_names == ["a", "b"]


def test_constant_column_treated_as_zero_association():
    columns = [Column("a", "numeric", (), "g"), Column("b", "numeric", (), "g")]
    ds = Dataset.from_cells(columns, [[1.0, 5.0], [1.0, 6.0], [1.0, 7.0]])
    out, _ = correlation_filter(ds)
    assert out.column_names == ["a", "b"]


def test_correlation_filter_never_drops_label():
    columns = [Column("lab", "nominal", (), "g"), Column("b", "nominal", (), "g")]
    rows = [[v, v] for v in ["x", "y", "x", "y"]]
    ds = Dataset.from_cells(columns, rows, label="lab")
    out, report = correlation_filter(ds)
    assert "lab" in out.column_names
    # the pair (lab, b) is perfectly associated, so b goes instead
    assert report.removed_by_correlation[0][1] == "b"


def test_correlation_filter_idempotent():
    rng = np.random.default_rng(3)
    base = rng.random(50)
    columns = [
        Column("a", "numeric", (), "g"),
        Column("b", "numeric", (), "g"),
        Column("c", "numeric", (), "g"),
    ]
    rows = [[float(v), float(v), float(rng.random())] for v in base]
    ds = Dataset.from_cells(columns, rows)
    once, _ = correlation_filter(ds)
    twice, report = correlation_filter(once)
    assert once.equals(twice)
    assert not report.removed_by_correlation


# -- information gain ---------------------------------------------------------------


def _gain_fixture():
    columns = [Column("attr", "nominal"), Column("lab", "nominal")]
    rows = [["a", "+"], ["a", "+"], ["b", "+"], ["b", "-"]]
    return Dataset.from_cells(columns, rows, label="lab")


def test_information_gain_hand_computed():
    # H(label) = H(3/4, 1/4); H(label | attr=a) = 0; H(label | attr=b) = 1
    expected = entropy_bits([3, 1]) - (0.5 * 0.0 + 0.5 * 1.0)
    assert expected == pytest.approx(0.31127812445913283)
    assert information_gain(_gain_fixture(), "lab", "attr") == pytest.approx(expected, abs=1e-12)


def test_constant_attribute_zero_gain():
    columns = [Column("attr", "nominal"), Column("lab", "nominal")]
    ds = Dataset.from_cells(columns, [["k", "+"], ["k", "-"]], label="lab")
    assert information_gain(ds, "lab", "attr") == 0.0


def test_perfect_binary_predictor_gain_one():
    columns = [Column("attr", "nominal"), Column("lab", "nominal")]
    rows = [["a", "+"], ["a", "+"], ["b", "-"], ["b", "-"]]
    ds = Dataset.from_cells(columns, rows, label="lab")
    assert information_gain(ds, "lab", "attr") == pytest.approx(1.0)


def test_single_row_gain_zero_by_convention():
    columns = [Column("attr", "nominal"), Column("lab", "nominal")]
    ds = Dataset.from_cells(columns, [["a", "+"]], label="lab")
    assert information_gain(ds, "lab", "attr") == 0.0


def test_numeric_attribute_binned_gain():
    columns = [Column("x", "numeric"), Column("lab", "nominal")]
    rows = [[float(i), "+" if i < 5 else "-"] for i in range(10)]
    ds = Dataset.from_cells(columns, rows, label="lab")
    # 10 equal-width bins separate the classes perfectly
    assert information_gain(ds, "lab", "x") == pytest.approx(1.0)


def test_missing_cells_form_their_own_bin():
    columns = [Column("x", "nominal"), Column("lab", "nominal")]
    rows = [["a", "+"], [None, "-"], ["a", "+"], [None, "-"]]
    ds = Dataset.from_cells(columns, rows, label="lab")
    assert information_gain(ds, "lab", "x") == pytest.approx(1.0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("abc"), st.sampled_from("+-x")), min_size=1, max_size=40))
def test_gain_bounded_by_label_entropy(pairs):
    columns = [Column("attr", "nominal"), Column("lab", "nominal")]
    ds = Dataset.from_cells(columns, [[a, l] for a, l in pairs], label="lab")
    gain = information_gain(ds, "lab", "attr")
    h_label = entropy_bits([sum(1 for _, l in pairs if l == v) for v in "+-x"])
    assert 0.0 <= gain <= h_label + 1e-12


def test_gain_filter_removes_constant_keeps_predictive():
    columns = [Column("const", "nominal"), Column("good", "nominal"), Column("lab", "nominal")]
    rows = [["k", "a", "+"], ["k", "a", "+"], ["k", "b", "-"], ["k", "b", "-"]]
    ds = Dataset.from_cells(columns, rows, label="lab")
    out, report = information_gain_filter(ds, "lab", 0.001)
    assert out.column_names == ["good", "lab"]
    assert report.removed_by_infogain == [("const", 0.0)]


def test_gain_filter_zero_threshold_is_identity():
    columns = [Column("const", "nominal"), Column("lab", "nominal")]
    ds = Dataset.from_cells(columns, [["k", "+"], ["k", "-"]], label="lab")
    out, report = information_gain_filter(ds, "lab", 0.0)
    assert out.equals(ds)
    assert not report.removed_by_infogain


def test_gain_filter_degenerate_when_all_predictors_removed():
    columns = [Column("const", "nominal"), Column("lab", "nominal")]
    ds = Dataset.from_cells(columns, [["k", "+"], ["k", "-"]], label="lab")
    with pytest.raises(DegenerateDatasetError):
        information_gain_filter(ds, "lab", 0.001)


def test_gain_filter_idempotent():
    columns = [Column("good", "nominal"), Column("weak", "nominal"), Column("lab", "nominal")]
    rows = [["a", "x", "+"], ["a", "y", "+"], ["b", "x", "-"], ["b", "y", "-"]]
    ds = Dataset.from_cells(columns, rows, label="lab")
    once, _ = information_gain_filter(ds, "lab")
    twice, report = information_gain_filter(once, "lab")
    assert once.equals(twice) and not report.removed_by_infogain
