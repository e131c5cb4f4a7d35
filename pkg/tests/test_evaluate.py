import numpy as np
import pytest

from conftest import labeled_dataset, random_labeled_dataset
from strata_bench.dataset import Column, Dataset
from strata_bench.errors import ConfigError, EvaluationError
from strata_bench.evaluate import (
    GridConfig,
    accuracy,
    report_from_results_csv,
    results_csv,
    run_cell,
    run_grid,
    split_train_test,
    summary_csv,
)
from strata_bench.sampling import build_strata


# -- splitting -------------------------------------------------------------------


def test_split_sizes_and_partition():
    ds = labeled_dataset([f"c{i}" for i in range(10)])
    train, test = split_train_test(ds, 0.6, seed=0)
    assert train.n_rows == 6 and test.n_rows == 4
    train_ids = {train.cell(i, "cls") for i in range(6)}
    test_ids = {test.cell(i, "cls") for i in range(4)}
    assert train_ids | test_ids == {f"c{i}" for i in range(10)}
    assert train_ids & test_ids == set()


def test_split_rounding_half_up():
    ds = labeled_dataset(["a", "b", "c", "d", "e"])
    train, test = split_train_test(ds, 0.6, seed=1)
    assert train.n_rows == 3 and test.n_rows == 2


def test_split_deterministic():
    ds = labeled_dataset([f"c{i}" for i in range(30)])
    first = split_train_test(ds, 0.5, seed=4)
    again = split_train_test(ds, 0.5, seed=4)
    assert first[0].equals(again[0]) and first[1].equals(again[1])


def test_split_stratified_keeps_class_mix():
    labels = ["A"] * 60 + ["B"] * 40
    rng = np.random.default_rng(3)
    ds = random_labeled_dataset(rng, {"A": 60, "B": 40})
    train, _ = split_train_test(ds, 0.6, seed=2, stratify=True)
    counts = build_strata(train, "cls").counts()
    assert counts == {"A": 36, "B": 24}
    assert len(labels) == 100


def test_split_stratified_covers_missing_labels():
    columns = [Column("cls", "nominal"), Column("x", "numeric")]
    rows = [["A", 1.0], ["A", 2.0], [None, 3.0], ["B", 4.0], [None, 5.0], ["B", 6.0]]
    ds = Dataset.from_cells(columns, rows, "cls")
    train, test = split_train_test(ds, 0.5, seed=0, stratify=True)
    assert train.n_rows + test.n_rows == 6


def test_split_errors():
    ds = labeled_dataset(["a", "b"])
    with pytest.raises(EvaluationError):
        split_train_test(ds, 1.5, seed=0)
    with pytest.raises(EvaluationError):
        split_train_test(labeled_dataset(["a"]), 0.6, seed=0)
    with pytest.raises(EvaluationError):
        split_train_test(ds, 0.01, seed=0)  # train side would be empty


# -- accuracy --------------------------------------------------------------------


def test_accuracy_values():
    assert accuracy(["a", "b"], ["a", "b"]) == 1.0
    assert accuracy(["a", "b"], ["b", "a"]) == 0.0
    assert accuracy(["a", "b", "c", "d"], ["a", "b", "c", "x"]) == 0.75


def test_accuracy_errors():
    with pytest.raises(EvaluationError):
        accuracy(["a"], [])
    with pytest.raises(EvaluationError):
        accuracy([], [])


# -- run_cell ---------------------------------------------------------------------


def _learnable_dataset(n_rows: int = 400) -> Dataset:
    # label is a deterministic function of one nominal attribute
    rng = np.random.default_rng(14)
    columns = [
        Column("signal", "nominal", ("p", "q", "r")),
        Column("noise", "numeric"),
        Column("cls", "nominal", ("P", "Q", "R")),
    ]
    rows = []
    for _ in range(n_rows):
        v = ("p", "q", "r")[int(rng.integers(0, 3))]
        rows.append([v, float(rng.random()), v.upper()])
    return Dataset.from_cells(columns, rows, "cls")


def test_run_cell_single_iteration_best_equals_only():
    cell = run_cell(_learnable_dataset(), "cls", "random", "tree", 100, iterations=1, seed=5)
    assert len(cell.accuracies) == 1
    assert cell.best == cell.accuracies[0]


def test_run_cell_deterministic():
    first = run_cell(_learnable_dataset(), "cls", "balanced", "bayes", 120, iterations=3, seed=9)
    second = run_cell(_learnable_dataset(), "cls", "balanced", "bayes", 120, iterations=3, seed=9)
    assert first == second


def test_run_cell_perfectly_learnable_reaches_one():
    for strategy in ("random", "stratified", "balanced"):
        cell = run_cell(_learnable_dataset(), "cls", strategy, "tree", 150, iterations=2, seed=3)
        assert cell.best == 1.0


def test_run_cell_excludes_other_label_columns():
    ds = _learnable_dataset()
    leaky = ds.with_column(Column("cls_copy", "nominal", ("P", "Q", "R")),
                           [ds.cell(i, "cls") for i in range(ds.n_rows)])
    cell = run_cell(leaky, "cls", "random", "tree", 100, iterations=1, seed=1,
                    exclude_columns=("cls_copy",))
    assert cell.best == 1.0  # signal column still present
    # excluding the real signal as well leaves only noise
    blinded = run_cell(leaky, "cls", "random", "tree", 100, iterations=1, seed=1,
                       exclude_columns=("cls_copy", "signal"))
    assert blinded.best < 0.9


def test_run_cell_propagates_capacity_with_coordinates():
    ds = _learnable_dataset(50)
    from strata_bench.errors import InsufficientDataError

    with pytest.raises(InsufficientDataError, match="cell .*random.*n=500"):
        run_cell(ds, "cls", "random", "tree", 500, iterations=1, seed=0, dataset_id="tiny")


# -- grid -------------------------------------------------------------------------


def _grid_config(sizes=(40, 80), iterations=2, labels=("cls",), strategies=("random", "balanced"), classifiers=("tree", "bayes")):
    return GridConfig(
        datasets=("mem",),
        labels=labels,
        strategies=strategies,
        classifiers=classifiers,
        sizes=sizes,
        iterations=iterations,
        seed=11,
    )


def test_grid_cardinality():
    config = _grid_config()
    report = run_grid(config, {"mem": _learnable_dataset(200)})
    assert len(report.cells) + len(report.skipped) == 1 * 1 * 2 * 2 * 2


def test_grid_oversized_cells_skipped_with_reason():
    config = _grid_config(sizes=(40, 10_000))
    report = run_grid(config, {"mem": _learnable_dataset(200)})
    assert len(report.skipped) == 4  # every strategy/classifier at n=10000
    assert all("10000" in cell.reason or "10,000" in cell.reason for cell in report.skipped)
    assert {cell.size for cell in report.skipped} == {10_000}


def test_grid_deterministic_and_jobs_independent():
    config = _grid_config()
    ds = _learnable_dataset(200)
    serial = run_grid(config, {"mem": ds}, jobs=1)
    threaded = run_grid(config, {"mem": ds}, jobs=4)
    assert results_csv(serial) == results_csv(threaded)
    assert summary_csv(serial) == summary_csv(threaded)
    again = run_grid(config, {"mem": ds}, jobs=1)
    assert results_csv(serial) == results_csv(again)


def test_grid_config_from_text():
    text = """
datasets = a.csv, b.csv
labels = stage, survival
strategies = random, balanced
classifiers = tree
sizes = 500, 1000
iterations = 3
seed = 7
"""
    config = GridConfig.from_text(text)
    assert config.datasets == ("a.csv", "b.csv")
    assert config.sizes == (500, 1000)
    assert config.iterations == 3 and config.seed == 7


def test_grid_config_validation():
    with pytest.raises(ConfigError):
        GridConfig(("d",), ("l",), ("random",), ("tree",), sizes=(100, 100))
    with pytest.raises(ConfigError):
        GridConfig(("d",), ("l",), ("bogus",), ("tree",))
    with pytest.raises(ConfigError):
        GridConfig.from_text("datasets = a\nlabels = l\nstrategies = random\nclassifiers = tree\nmystery = 1\n")


def test_results_csv_round_trip():
    config = _grid_config()
    report = run_grid(config, {"mem": _learnable_dataset(200)})
    text = results_csv(report)
    rebuilt = report_from_results_csv(text)
    assert [c.accuracies for c in rebuilt.cells] == [c.accuracies for c in report.cells]
    assert [c.best for c in rebuilt.cells] == [c.best for c in report.cells]


def test_eval_cell_best_is_max_and_stats():
    cell = run_cell(_learnable_dataset(), "cls", "random", "bayes", 60, iterations=4, seed=2)
    assert cell.best == max(cell.accuracies)
    assert 0.0 <= cell.mean <= 1.0
    assert cell.stddev >= 0.0
    assert all(0.0 <= a <= 1.0 for a in cell.accuracies)
