"""Train/test splitting, accuracy scoring and the experiment grid.

Each grid cell repeats its draw-sample / split / train / score loop for a
configured number of iterations and records every accuracy plus the best one
(the benchmark's optimistic protocol); mean and standard deviation ride along
so honest statistics stay available. All cell randomness derives from the
master seed and the cell coordinates, making reports byte-identical across
runs and worker counts.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classifiers import (
    knn_predict_dataset,
    predict_bayes_dataset,
    predict_tree_dataset,
    train_decision_tree,
    train_knn,
    train_naive_bayes,
)
from .configfile import get_float, get_int, get_list, parse_config
from .dataset import Dataset
from .errors import ConfigError, EvaluationError, SamplingError, StrataBenchError
from .sampling import STRATEGIES, SamplingPlan, build_strata, largest_remainder_quotas, sample
from .seeds import rng_for

DEFAULT_SIZES = (500, 1000, 2000, 5000, 10000, 15000, 20000, 25000, 30000)
DEFAULT_SPLIT_RATIO = 0.6
DEFAULT_ITERATIONS = 10
# depth bound for grid runs: trees stay unpruned, so depth is the safety valve
DEFAULT_TREE_MAX_DEPTH = 12

RESULTS_HEADER = ["dataset", "label", "strategy", "classifier", "sample_size", "iteration", "accuracy"]
SUMMARY_HEADER = [
    "dataset", "label", "strategy", "classifier", "sample_size",
    "best", "mean", "stddev", "status", "reason",
]


def split_train_test(
    ds: Dataset,
    ratio: float,
    seed: int,
    stratify: bool = False,
) -> tuple[Dataset, Dataset]:
    """Disjoint train/test partition covering every row; train gets
    round(ratio * rows) rows (half-up), per-stratum proportional when stratified."""
    if not 0.0 < ratio < 1.0:
        raise EvaluationError(f"split ratio must be in (0, 1), got {ratio}")
    if ds.n_rows < 2:
        raise EvaluationError(f"need at least 2 rows to split, got {ds.n_rows}")
    n_train = int(math.floor(ratio * ds.n_rows + 0.5))
    if n_train == 0 or n_train == ds.n_rows:
        raise EvaluationError(f"ratio {ratio} leaves an empty split side for {ds.n_rows} rows")
    rng = rng_for(seed, "split")
    if not stratify:
        train_idx = np.sort(rng.choice(ds.n_rows, size=n_train, replace=False))
    else:
        if ds.label is None:
            raise EvaluationError("stratified split requires a label column")
        strata = build_strata(ds, ds.label)
        groups = [strata.indices[c] for c in strata.classes]
        unlabeled = np.setdiff1d(np.arange(ds.n_rows), np.concatenate(groups) if groups else [])
        if len(unlabeled):
            groups.append(unlabeled)  # missing-label rows form their own stratum
        quotas = largest_remainder_quotas([len(g) for g in groups], n_train)
        picks = []
        for gi, (group, quota) in enumerate(zip(groups, quotas)):
            if quota:
                sub = rng_for(seed, "split-stratum", gi)
                picks.append(group[sub.choice(len(group), size=quota, replace=False)])
        train_idx = np.sort(np.concatenate(picks)) if picks else np.empty(0, dtype=np.int64)
    mask = np.zeros(ds.n_rows, dtype=bool)
    mask[train_idx] = True
    return ds.take(np.flatnonzero(mask)), ds.take(np.flatnonzero(~mask))


def accuracy(predictions: list[str], truth: list[str]) -> float:
    if len(predictions) != len(truth):
        raise EvaluationError(f"{len(predictions)} predictions vs {len(truth)} truths")
    if not predictions:
        raise EvaluationError("cannot score an empty prediction list")
    matches = sum(1 for p, t in zip(predictions, truth) if p == t)
    return matches / len(predictions)


def _train_and_score(
    train: Dataset, test: Dataset, classifier: str, knn_k: int, tree_max_depth: int | None
) -> float:
    label = train.label
    truth = [test.cell(i, label) for i in range(test.n_rows)]
    scored = [i for i, t in enumerate(truth) if t is not None]
    if not scored:
        raise EvaluationError("test split has no labeled rows")
    test_scored = test.take(scored)
    if classifier == "tree":
        model = train_decision_tree(train, max_depth=tree_max_depth)
        predictions = predict_tree_dataset(model, test_scored)
    elif classifier == "bayes":
        model = train_naive_bayes(train)
        predictions = predict_bayes_dataset(model, test_scored)
    elif classifier == "knn":
        labeled_rows = train.n_rows - int(train.missing_mask(label).sum())
        model = train_knn(train, k=min(knn_k, labeled_rows))
        predictions = knn_predict_dataset(model, test_scored)
    else:
        raise ConfigError(f"unknown classifier {classifier!r}")
    return accuracy(predictions, [truth[i] for i in scored])


@dataclass(frozen=True)
class EvalCell:
    dataset: str
    label: str
    strategy: str
    classifier: str
    size: int
    accuracies: tuple[float, ...]
    seed: int

    @property
    def best(self) -> float:
        return max(self.accuracies)

    @property
    def mean(self) -> float:
        return sum(self.accuracies) / len(self.accuracies)

    @property
    def stddev(self) -> float:
        mu = self.mean
        return math.sqrt(sum((a - mu) ** 2 for a in self.accuracies) / len(self.accuracies))


@dataclass(frozen=True)
class SkippedCell:
    dataset: str
    label: str
    strategy: str
    classifier: str
    size: int
    reason: str


@dataclass
class ExperimentReport:
    cells: list[EvalCell] = field(default_factory=list)
    skipped: list[SkippedCell] = field(default_factory=list)

    def is_empty(self) -> bool:
        return not self.cells and not self.skipped


def run_cell(
    ds: Dataset,
    label: str,
    strategy: str,
    classifier: str,
    size: int,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    split_ratio: float = DEFAULT_SPLIT_RATIO,
    minority_ratio: float = 0.01,
    with_replacement: bool = False,
    knn_k: int = 10,
    tree_max_depth: int | None = DEFAULT_TREE_MAX_DEPTH,
    dataset_id: str = "dataset",
    exclude_columns: tuple[str, ...] = (),
) -> EvalCell:
    """One grid cell: per iteration, draw a fresh sample and a fresh 60:40 split,
    train, and score test accuracy. Sampling failures propagate annotated with
    the cell coordinates."""
    if iterations < 1:
        raise EvaluationError(f"iterations must be >= 1, got {iterations}")
    working = ds.drop_columns([c for c in exclude_columns if c != label and ds.has_column(c)])
    working = working.with_label(label)
    accuracies = []
    for i in range(iterations):
        iter_seed_rng = rng_for(seed, "cell-iteration", i)
        iter_seed = int(iter_seed_rng.integers(0, 2**63 - 1))
        plan = SamplingPlan(strategy, size, iter_seed, minority_ratio, with_replacement)
        try:
            drawn = sample(working, label, plan)
        except SamplingError as exc:
            coordinates = f"[cell {dataset_id}/{label}/{strategy}/{classifier}/n={size}]"
            exc.args = (f"{exc} {coordinates}",) + exc.args[1:]
            raise
        train, test = split_train_test(drawn, split_ratio, iter_seed)
        accuracies.append(_train_and_score(train, test, classifier, knn_k, tree_max_depth))
    return EvalCell(dataset_id, label, strategy, classifier, size, tuple(accuracies), seed)


@dataclass(frozen=True)
class GridConfig:
    datasets: tuple[str, ...]  # paths to dataset CSVs
    labels: tuple[str, ...]
    strategies: tuple[str, ...]
    classifiers: tuple[str, ...]
    sizes: tuple[int, ...] = DEFAULT_SIZES
    split_ratio: float = DEFAULT_SPLIT_RATIO
    iterations: int = DEFAULT_ITERATIONS
    seed: int = 0
    minority_ratio: float = 0.01
    with_replacement: bool = False
    knn_k: int = 10
    tree_max_depth: int | None = DEFAULT_TREE_MAX_DEPTH

    def __post_init__(self):
        if not self.datasets or not self.labels or not self.strategies or not self.classifiers:
            raise ConfigError("grid requires datasets, labels, strategies and classifiers")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ConfigError(f"unknown strategy {s!r}")
        for c in self.classifiers:
            if c not in ("tree", "bayes", "knn"):
                raise ConfigError(f"unknown classifier {c!r}")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])) or not self.sizes:
            raise ConfigError("sizes must be a strictly increasing non-empty sequence")
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigError(f"split ratio must be in (0, 1), got {self.split_ratio}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")

    @staticmethod
    def from_text(text: str) -> "GridConfig":
        doc = parse_config(text)
        if doc.sections:
            raise ConfigError("grid config does not take sections")
        v = doc.values
        known = {
            "datasets", "labels", "strategies", "classifiers", "sizes",
            "split_ratio", "iterations", "seed", "minority_ratio", "with_replacement",
            "knn_k", "tree_max_depth",
        }
        unknown = set(v) - known
        if unknown:
            raise ConfigError(f"unknown grid config keys: {sorted(unknown)}")
        try:
            sizes = tuple(int(s) for s in get_list(v, "sizes", [str(s) for s in DEFAULT_SIZES]))
        except ValueError:
            raise ConfigError("sizes must be integers") from None
        return GridConfig(
            datasets=tuple(get_list(v, "datasets")),
            labels=tuple(get_list(v, "labels")),
            strategies=tuple(get_list(v, "strategies")),
            classifiers=tuple(get_list(v, "classifiers")),
            sizes=sizes,
            split_ratio=get_float(v, "split_ratio", DEFAULT_SPLIT_RATIO),
            iterations=get_int(v, "iterations", DEFAULT_ITERATIONS),
            seed=get_int(v, "seed", 0),
            minority_ratio=get_float(v, "minority_ratio", 0.01),
            with_replacement=v.get("with_replacement", "false").strip().lower() in ("true", "1", "yes", "on"),
            knn_k=get_int(v, "knn_k", 10),
            tree_max_depth=(
                None
                if v.get("tree_max_depth", "").strip().lower() == "none"
                else get_int(v, "tree_max_depth", DEFAULT_TREE_MAX_DEPTH)
            ),
        )


def _cell_seed(master: int, dataset_id: str, label: str, strategy: str, classifier: str, size: int) -> int:
    rng = rng_for(master, "grid-cell", dataset_id, label, strategy, classifier, size)
    return int(rng.integers(0, 2**63 - 1))


def run_grid(
    config: GridConfig,
    datasets: dict[str, Dataset],
    jobs: int = 1,
) -> ExperimentReport:
    """One EvalCell per grid point in canonical (dataset, label, strategy,
    classifier, size) order. Infeasible or failing cells are recorded as skipped
    with their reason; the grid always completes."""
    coordinates = [
        (dataset_id, label, strategy, classifier, size)
        for dataset_id in datasets
        for label in config.labels
        for strategy in config.strategies
        for classifier in config.classifiers
        for size in config.sizes
    ]

    def run_one(coord):
        dataset_id, label, strategy, classifier, size = coord
        ds = datasets[dataset_id]
        try:
            if not ds.has_column(label):
                raise EvaluationError(f"dataset {dataset_id!r} has no column {label!r}")
            cell_seed = _cell_seed(config.seed, dataset_id, label, strategy, classifier, size)
            return run_cell(
                ds, label, strategy, classifier, size,
                iterations=config.iterations,
                seed=cell_seed,
                split_ratio=config.split_ratio,
                minority_ratio=config.minority_ratio,
                with_replacement=config.with_replacement,
                knn_k=config.knn_k,
                tree_max_depth=config.tree_max_depth,
                dataset_id=dataset_id,
                exclude_columns=tuple(l for l in config.labels if l != label),
            )
        except StrataBenchError as exc:
            return SkippedCell(dataset_id, label, strategy, classifier, size, str(exc))

    if jobs <= 1:
        results = [run_one(c) for c in coordinates]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_one, coordinates))

    report = ExperimentReport()
    for outcome in results:  # already in canonical order
        if isinstance(outcome, EvalCell):
            report.cells.append(outcome)
        else:
            report.skipped.append(outcome)
    return report


# -- delimited output ---------------------------------------------------------


def results_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULTS_HEADER)
    for cell in report.cells:
        for i, acc in enumerate(cell.accuracies, start=1):
            writer.writerow([cell.dataset, cell.label, cell.strategy, cell.classifier, cell.size, i, repr(acc)])
    return buf.getvalue()


def summary_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for cell in report.cells:
        writer.writerow([
            cell.dataset, cell.label, cell.strategy, cell.classifier, cell.size,
            repr(cell.best), repr(cell.mean), repr(cell.stddev), "ok", "",
        ])
    for cell in report.skipped:
        writer.writerow([
            cell.dataset, cell.label, cell.strategy, cell.classifier, cell.size,
            "", "", "", "skipped", cell.reason,
        ])
    return buf.getvalue()


def report_from_results_csv(text: str) -> ExperimentReport:
    """Rebuild an ExperimentReport from the flat results CSV (iterations grouped
    back into cells in file order). Used by the standalone report command."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != RESULTS_HEADER:
        raise EvaluationError(f"results CSV header must be {RESULTS_HEADER}")
    grouped: dict[tuple, list[tuple[int, float]]] = {}
    order: list[tuple] = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(RESULTS_HEADER):
            raise EvaluationError(f"results CSV line {lineno}: wrong column count")
        key = (row[0], row[1], row[2], row[3], int(row[4]))
        if key not in grouped:
            grouped[key] = []
            order.append(key)
        grouped[key].append((int(row[5]), float(row[6])))
    report = ExperimentReport()
    for key in order:
        iterations = sorted(grouped[key])
        report.cells.append(
            EvalCell(key[0], key[1], key[2], key[3], key[4], tuple(acc for _, acc in iterations), seed=0)
        )
    return report
