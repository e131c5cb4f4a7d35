"""Top-down decision tree induction with the gain-ratio criterion.

Nominal splits branch per category seen at the node and are never reused along
a path; numeric splits test threshold midpoints between consecutive distinct
values and may recur. When every candidate gain ratio is zero but the node is
impure (the XOR situation), the first splittable attribute in schema order is
taken so that consistent data is always fully separated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dataset import MISSING_CODE, NOMINAL, Cell, Column, Dataset
from ..errors import PredictionError, TrainingError
from .common import EncodedTraining, encode_dataset, encode_row, encode_training

DEFAULT_MIN_LEAF = 2


@dataclass
class TreeNode:
    counts: list[int]  # training class distribution routed here
    prediction: int  # majority class index, ties to earlier class order
    column: int | None = None  # attribute index; None = leaf
    threshold: float | None = None  # set for numeric splits
    children: dict[int, "TreeNode"] | None = None  # nominal: category code -> child
    low: "TreeNode | None" = None  # numeric: value <= threshold
    high: "TreeNode | None" = None  # numeric: value > threshold
    default_key: int | None = None  # nominal child code / 0 = low, 1 = high

    @property
    def is_leaf(self) -> bool:
        return self.column is None


@dataclass(frozen=True)
class DecisionTreeModel:
    columns: tuple[Column, ...]
    classes: tuple[str, ...]
    root: TreeNode = field(repr=False)
    criterion: str = "gain_ratio"
    min_leaf: int = DEFAULT_MIN_LEAF
    max_depth: int | None = None

    def node_count(self) -> int:
        count, stack = 0, [self.root]
        while stack:
            node = stack.pop()
            count += 1
            if node.children is not None:
                stack.extend(node.children.values())
            if node.low is not None:
                stack.extend([node.low, node.high])
        return count

    def depth(self) -> int:
        best, stack = 0, [(self.root, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if node.children is not None:
                stack.extend((c, d + 1) for c in node.children.values())
            if node.low is not None:
                stack.extend([(node.low, d + 1), (node.high, d + 1)])
        return best


def _entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


@dataclass
class _Split:
    attr: int
    gain: float
    ratio: float
    threshold: float | None  # None for nominal


def _best_nominal_split(codes: np.ndarray, y: np.ndarray, n_classes: int, n_categories: int) -> _Split | None:
    present = codes >= 0
    n_present = int(present.sum())
    if n_present < 2:
        return None
    table = np.bincount(codes[present] * n_classes + y[present], minlength=n_categories * n_classes)
    table = table.reshape(n_categories, n_classes)
    sizes = table.sum(axis=1)
    occupied = sizes > 0
    if occupied.sum() < 2:
        return None
    parent = _entropy(table.sum(axis=0))
    conditional = 0.0
    for row, size in zip(table[occupied], sizes[occupied]):
        conditional += (size / n_present) * _entropy(row)
    present_fraction = n_present / len(codes)
    gain = present_fraction * (parent - conditional)
    split_info = _entropy(sizes[occupied])
    if split_info <= 0.0:
        return None
    return _Split(-1, gain, gain / split_info, None)


def _best_numeric_split(values: np.ndarray, y: np.ndarray, n_classes: int) -> _Split | None:
    present = ~np.isnan(values)
    n_present = int(present.sum())
    if n_present < 2:
        return None
    v = values[present]
    yy = y[present]
    order = np.argsort(v, kind="stable")
    v = v[order]
    yy = yy[order]
    boundaries = np.flatnonzero(v[:-1] != v[1:])
    if len(boundaries) == 0:
        return None
    one_hot = np.zeros((n_present, n_classes), dtype=np.float64)
    one_hot[np.arange(n_present), yy] = 1.0
    cum = one_hot.cumsum(axis=0)
    total = cum[-1]
    left = cum[boundaries]
    right = total[None, :] - left
    nl = (boundaries + 1).astype(np.float64)
    nr = n_present - nl

    def entropies(counts: np.ndarray, sizes: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            p = counts / sizes[:, None]
            terms = np.where(counts > 0, p * np.log2(p), 0.0)
        return -terms.sum(axis=1)

    parent = _entropy(total)
    conditional = (nl / n_present) * entropies(left, nl) + (nr / n_present) * entropies(right, nr)
    present_fraction = n_present / len(values)
    gains = present_fraction * (parent - conditional)
    # the threshold is chosen by raw gain: selecting it by ratio degenerates
    # into outlier-shaving splits whose split-info is nearly zero
    best = int(np.argmax(gains))  # first maximum: smaller threshold wins ties
    wl = nl[best] / n_present
    wr = nr[best] / n_present
    split_info = float(-(wl * np.log2(wl) + wr * np.log2(wr)))
    if split_info <= 0.0:
        return None
    threshold = (v[boundaries[best]] + v[boundaries[best] + 1]) / 2.0
    return _Split(-1, float(gains[best]), float(gains[best]) / split_info, float(threshold))


def _choose_split(
    enc: EncodedTraining,
    rows: np.ndarray,
    banned_nominal: frozenset[int],
    n_classes: int,
) -> _Split | None:
    candidates: list[_Split] = []
    y_node = enc.y[rows]
    for attr, col in enumerate(enc.columns):
        if col.kind == NOMINAL:
            if attr in banned_nominal:
                continue
            split = _best_nominal_split(enc.arrays[attr][rows], y_node, n_classes, len(col.categories))
        else:
            split = _best_numeric_split(enc.arrays[attr][rows], y_node, n_classes)
        if split is None:
            continue
        split.attr = attr
        candidates.append(split)
    if not candidates:
        return None
    positive = [c for c in candidates if c.gain > 0.0]
    if not positive:
        # all candidate gains are zero: split anyway so consistent data separates
        return candidates[0]
    # Quinlan's guard: maximize gain ratio only among candidates with at least
    # average gain, otherwise near-empty splits win on a vanishing split-info
    average = sum(c.gain for c in positive) / len(positive)
    eligible = [c for c in positive if c.gain >= average]
    best = eligible[0]
    for candidate in eligible[1:]:
        if candidate.ratio > best.ratio:
            best = candidate
    return best


def train_decision_tree(
    train: Dataset,
    criterion: str = "gain_ratio",
    min_leaf: int = DEFAULT_MIN_LEAF,
    max_depth: int | None = None,
) -> DecisionTreeModel:
    """Grow a tree until nodes are pure, unsplittable, smaller than 2*min_leaf,
    or at the depth limit. Rows with a missing value on a chosen split attribute
    follow the default child (the one that received the most training rows)."""
    if criterion != "gain_ratio":
        raise TrainingError(f"unsupported criterion {criterion!r}")
    if min_leaf < 1:
        raise TrainingError(f"min_leaf must be >= 1, got {min_leaf}")
    enc = encode_training(train)
    n_classes = len(enc.classes)

    def make_node(rows: np.ndarray) -> TreeNode:
        counts = np.bincount(enc.y[rows], minlength=n_classes)
        return TreeNode(counts=counts.tolist(), prediction=int(np.argmax(counts)))

    root = make_node(np.arange(enc.n_rows))
    stack: list[tuple[TreeNode, np.ndarray, int, frozenset[int]]] = [
        (root, np.arange(enc.n_rows), 0, frozenset())
    ]
    while stack:
        node, rows, depth, banned = stack.pop()
        counts = np.asarray(node.counts)
        if (
            int((counts > 0).sum()) <= 1
            or len(rows) < 2 * min_leaf
            or (max_depth is not None and depth >= max_depth)
        ):
            continue
        split = _choose_split(enc, rows, banned, n_classes)
        if split is None:
            continue
        col = enc.columns[split.attr]
        node.column = split.attr
        if col.kind == NOMINAL:
            codes = enc.arrays[split.attr][rows]
            node.children = {}
            groups: dict[int, np.ndarray] = {}
            for code in np.unique(codes[codes >= 0]):
                groups[int(code)] = rows[codes == code]
            default = max(groups, key=lambda c: (len(groups[c]), -c))
            missing_rows = rows[codes == MISSING_CODE]
            if len(missing_rows):
                groups[default] = np.concatenate([groups[default], missing_rows])
            node.default_key = default
            child_banned = banned | {split.attr}
            for code, child_rows in groups.items():
                child = make_node(child_rows)
                node.children[code] = child
                stack.append((child, child_rows, depth + 1, child_banned))
        else:
            values = enc.arrays[split.attr][rows]
            node.threshold = split.threshold
            goes_low = values <= split.threshold
            goes_high = values > split.threshold
            low_rows = rows[goes_low]
            high_rows = rows[goes_high]
            default_side = 0 if len(low_rows) >= len(high_rows) else 1
            missing_rows = rows[np.isnan(values)]
            if len(missing_rows):
                if default_side == 0:
                    low_rows = np.concatenate([low_rows, missing_rows])
                else:
                    high_rows = np.concatenate([high_rows, missing_rows])
            node.default_key = default_side
            node.low = make_node(low_rows)
            node.high = make_node(high_rows)
            stack.append((node.low, low_rows, depth + 1, banned))
            stack.append((node.high, high_rows, depth + 1, banned))
    return DecisionTreeModel(enc.columns, enc.classes, root, criterion, min_leaf, max_depth)


def _route(model: DecisionTreeModel, codes: np.ndarray, values: np.ndarray) -> int:
    node = model.root
    while not node.is_leaf:
        col = model.columns[node.column]
        if col.kind == NOMINAL:
            code = int(codes[node.column])
            child = node.children.get(code) if code >= 0 else None
            if child is None:
                child = node.children[node.default_key]
            node = child
        else:
            value = values[node.column]
            if np.isnan(value):
                node = node.low if node.default_key == 0 else node.high
            else:
                node = node.low if value <= node.threshold else node.high
    return node.prediction


def predict_tree(model: DecisionTreeModel, row: list[Cell]) -> str:
    """Classify one cell vector aligned with the model's attribute columns."""
    codes, values = encode_row(row, model.columns)
    return model.classes[_route(model, codes, values)]


def predict_tree_dataset(model: DecisionTreeModel, ds: Dataset) -> list[str]:
    arrays = encode_dataset(ds, model.columns)
    n = ds.n_rows
    width = len(model.columns)
    codes = np.full((n, width), MISSING_CODE, dtype=np.int64)
    values = np.full((n, width), np.nan, dtype=np.float64)
    for j, col in enumerate(model.columns):
        if col.kind == NOMINAL:
            codes[:, j] = arrays[j]
        else:
            values[:, j] = arrays[j]
    return [model.classes[_route(model, codes[i], values[i])] for i in range(n)]
