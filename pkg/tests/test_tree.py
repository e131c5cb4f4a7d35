import numpy as np
import pytest

from strata_bench.classifiers import (
    dumps_model,
    loads_model,
    predict_tree,
    predict_tree_dataset,
    train_decision_tree,
)
from strata_bench.dataset import Column, Dataset
from strata_bench.errors import PredictionError, TrainingError


def _ds(columns, rows, label="lab"):
    return Dataset.from_cells(columns, rows, label)


def test_perfect_nominal_attribute_gives_depth_one_tree():
    columns = [Column("a", "nominal"), Column("lab", "nominal")]
    rows = [["x", "+"], ["x", "+"], ["y", "-"], ["y", "-"]]
    model = train_decision_tree(_ds(columns, rows), min_leaf=1)
    assert model.depth() == 1
    predictions = predict_tree_dataset(model, _ds(columns, rows))
    assert predictions == ["+", "+", "-", "-"]


def test_pure_training_set_gives_single_leaf():
    columns = [Column("a", "nominal"), Column("lab", "nominal")]
    rows = [["x", "+"], ["y", "+"], ["z", "+"]]
    model = train_decision_tree(_ds(columns, rows))
    assert model.root.is_leaf
    assert predict_tree(model, ["anything"]) == "+"


def test_xor_fixture_splits_despite_zero_gain_ratio():
    columns = [Column("a", "nominal"), Column("b", "nominal"), Column("lab", "nominal")]
    rows = [
        ["0", "0", "-"],
        ["0", "1", "+"],
        ["1", "0", "+"],
        ["1", "1", "-"],
    ]
    # oracle by enumeration: splitting on either attribute alone leaves both
    # children impure, so information gain (and gain ratio) is exactly 0 at the
    # root; the learner must still separate the data in two levels
    model = train_decision_tree(_ds(columns, rows), min_leaf=1)
    assert model.depth() == 2
    predictions = predict_tree_dataset(model, _ds(columns, rows))
    assert predictions == ["-", "+", "+", "-"]


def test_numeric_threshold_split():
    columns = [Column("x", "numeric"), Column("lab", "nominal")]
    rows = [[1.0, "-"], [2.0, "-"], [10.0, "+"], [11.0, "+"]]
    model = train_decision_tree(_ds(columns, rows), min_leaf=1)
    assert model.root.threshold == pytest.approx(6.0)
    assert predict_tree(model, [3.0]) == "-"
    assert predict_tree(model, [9.0]) == "+"


def test_unseen_category_routes_to_default_child():
    columns = [Column("a", "nominal"), Column("lab", "nominal")]
    rows = [["x", "+"], ["x", "+"], ["x", "+"], ["y", "-"]]
    model = train_decision_tree(_ds(columns, rows), min_leaf=1)
    # "x" received most rows, so the default child predicts "+"
    assert predict_tree(model, ["zebra"]) == "+"
    assert predict_tree(model, [None]) == "+"


def test_min_leaf_stops_splitting():
    columns = [Column("a", "nominal"), Column("lab", "nominal")]
    rows = [["x", "+"], ["y", "-"], ["x", "+"]]
    model = train_decision_tree(_ds(columns, rows), min_leaf=2)
    assert model.root.is_leaf  # 3 rows < 2*min_leaf


def test_max_depth_limits_tree():
    rng = np.random.default_rng(0)
    columns = [Column(f"a{j}", "nominal") for j in range(4)] + [Column("lab", "nominal")]
    rows = []
    for _ in range(60):
        cells = [str(rng.integers(0, 2)) for _ in range(4)]
        rows.append(cells + [str((sum(int(c) for c in cells)) % 2)])
    model = train_decision_tree(_ds(columns, rows), min_leaf=1, max_depth=2)
    assert model.depth() <= 2


def test_training_errors():
    columns = [Column("a", "nominal"), Column("lab", "nominal")]
    with pytest.raises(TrainingError):
        train_decision_tree(Dataset.from_cells(columns, [], "lab"))
    with pytest.raises(TrainingError):
        train_decision_tree(_ds(columns, [["x", "+"]]), criterion="gini")


def test_prediction_schema_mismatch():
    columns = [Column("a", "nominal"), Column("lab", "nominal")]
    model = train_decision_tree(_ds(columns, [["x", "+"], ["y", "-"]]), min_leaf=1)
    with pytest.raises(PredictionError):
        predict_tree(model, ["x", "extra"])


def test_leaf_counts_sum_to_routed_rows():
    rng = np.random.default_rng(1)
    columns = [Column("a", "nominal"), Column("b", "nominal"), Column("lab", "nominal")]
    rows = [[str(rng.integers(0, 3)), str(rng.integers(0, 2)), str(rng.integers(0, 2))] for _ in range(80)]
    model = train_decision_tree(_ds(columns, rows), min_leaf=1)
    leaf_total = 0
    stack = [model.root]
    while stack:
        node = stack.pop()
        if node.is_leaf:
            leaf_total += sum(node.counts)
        elif node.children is not None:
            stack.extend(node.children.values())
        else:
            stack.extend([node.low, node.high])
    assert leaf_total == 80


def test_nominal_attribute_tested_once_per_path():
    rng = np.random.default_rng(2)
    columns = [Column(f"a{j}", "nominal") for j in range(3)] + [Column("lab", "nominal")]
    rows = [
        [str(rng.integers(0, 2)) for _ in range(3)] + [str(rng.integers(0, 2))]
        for _ in range(100)
    ]
    model = train_decision_tree(_ds(columns, rows), min_leaf=1)

    def walk(node, seen):
        if node.is_leaf:
            return
        col = model.columns[node.column]
        if col.kind == "nominal":
            assert node.column not in seen
            seen = seen | {node.column}
        if node.children is not None:
            for child in node.children.values():
                walk(child, seen)
        else:
            walk(node.low, seen)
            walk(node.high, seen)

    walk(model.root, frozenset())


def test_consistent_nominal_data_reaches_full_training_accuracy():
    rng = np.random.default_rng(3)
    for trial in range(10):
        columns = [Column(f"a{j}", "nominal") for j in range(4)] + [Column("lab", "nominal")]
        rows = []
        for _ in range(120):
            cells = [str(rng.integers(0, 3)) for _ in range(4)]
            digits = [int(c) for c in cells]
            label = str((3 * digits[0] + 5 * digits[1] + 7 * digits[2] + digits[3]) % 3)
            rows.append(cells + [label])  # label is a pure function of the attributes
        ds = _ds(columns, rows)
        model = train_decision_tree(ds, min_leaf=1)
        assert predict_tree_dataset(model, ds) == [r[-1] for r in rows]


def test_missing_values_route_to_majority_child():
    columns = [Column("a", "nominal"), Column("lab", "nominal")]
    rows = [["x", "+"], ["x", "+"], ["y", "-"], [None, "+"]]
    model = train_decision_tree(_ds(columns, rows), min_leaf=1)
    assert predict_tree(model, [None]) == "+"


def test_tree_serialization_round_trip():
    columns = [Column("a", "nominal"), Column("x", "numeric"), Column("lab", "nominal")]
    rows = [["p", 1.0, "+"], ["p", 5.0, "-"], ["q", 2.0, "+"], ["q", 9.0, "-"]]
    ds = _ds(columns, rows)
    model = train_decision_tree(ds, min_leaf=1)
    restored = loads_model(dumps_model(model))
    assert predict_tree_dataset(restored, ds) == predict_tree_dataset(model, ds)
    assert restored.classes == model.classes


def test_training_is_deterministic():
    rng = np.random.default_rng(4)
    columns = [Column("a", "nominal"), Column("x", "numeric"), Column("lab", "nominal")]
    rows = [
        [str(rng.integers(0, 3)), float(rng.random()), str(rng.integers(0, 2))]
        for _ in range(60)
    ]
    ds = _ds(columns, rows)
    first = dumps_model(train_decision_tree(ds))
    assert dumps_model(train_decision_tree(ds)) == first
