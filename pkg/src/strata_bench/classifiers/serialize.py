"""Versioned text serialization so experiments can persist and reload models.

The on-disk form is a JSON document with a format marker and version number.
Tree models store the nested node list, Bayes models their tables, k-NN models
a reference to the training CSV plus parameters (the instance store is rebuilt
on load).
"""

from __future__ import annotations

import json
import os
from typing import Any

import numpy as np

from ..dataset import Column, load_dataset
from ..errors import PredictionError
from .bayes import NaiveBayesModel
from .knn import KnnModel, train_knn
from .tree import DecisionTreeModel, TreeNode

FORMAT_MARKER = "strata-bench-model"
FORMAT_VERSION = 1

Model = DecisionTreeModel | NaiveBayesModel | KnnModel


def _column_to_dict(col: Column) -> dict[str, Any]:
    return {"name": col.name, "kind": col.kind, "categories": list(col.categories), "tag": col.tag}


def _column_from_dict(data: dict[str, Any]) -> Column:
    return Column(data["name"], data["kind"], tuple(data["categories"]), data.get("tag"))


def _node_to_dict(node: TreeNode) -> dict[str, Any]:
    out: dict[str, Any] = {"counts": node.counts, "prediction": node.prediction}
    if node.is_leaf:
        return out
    out["column"] = node.column
    out["default"] = node.default_key
    if node.children is not None:
        out["children"] = {str(code): _node_to_dict(child) for code, child in node.children.items()}
    else:
        out["threshold"] = node.threshold
        out["low"] = _node_to_dict(node.low)
        out["high"] = _node_to_dict(node.high)
    return out


def _node_from_dict(data: dict[str, Any]) -> TreeNode:
    node = TreeNode(counts=data["counts"], prediction=data["prediction"])
    if "column" not in data:
        return node
    node.column = data["column"]
    node.default_key = data["default"]
    if "children" in data:
        node.children = {int(code): _node_from_dict(child) for code, child in data["children"].items()}
    else:
        node.threshold = data["threshold"]
        node.low = _node_from_dict(data["low"])
        node.high = _node_from_dict(data["high"])
    return node


def dumps_model(model: Model) -> str:
    doc: dict[str, Any] = {
        "format": FORMAT_MARKER,
        "version": FORMAT_VERSION,
        "columns": [_column_to_dict(c) for c in model.columns],
        "classes": list(model.classes),
    }
    if isinstance(model, DecisionTreeModel):
        doc["kind"] = "tree"
        doc["params"] = {"criterion": model.criterion, "min_leaf": model.min_leaf, "max_depth": model.max_depth}
        doc["root"] = _node_to_dict(model.root)
    elif isinstance(model, NaiveBayesModel):
        doc["kind"] = "bayes"
        doc["alpha"] = model.alpha
        doc["priors"] = model.priors.tolist()
        doc["nominal_tables"] = {str(a): t.tolist() for a, t in model.nominal_tables.items()}
        doc["numeric_stats"] = {str(a): [m.tolist(), v.tolist()] for a, (m, v) in model.numeric_stats.items()}
    elif isinstance(model, KnnModel):
        if model.training_ref is None:
            raise PredictionError("k-NN model has no training reference; pass training_ref to train_knn")
        doc["kind"] = "knn"
        doc["k"] = model.k
        doc["training_csv"] = model.training_ref
        doc["label"] = None  # label travels with the dataset sidecar
    else:
        raise PredictionError(f"unknown model type {type(model).__name__}")
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def loads_model(text: str, base_dir: str = ".") -> Model:
    doc = json.loads(text)
    if doc.get("format") != FORMAT_MARKER:
        raise PredictionError("not a strata-bench model file")
    if doc.get("version") != FORMAT_VERSION:
        raise PredictionError(f"unsupported model format version {doc.get('version')!r}")
    columns = tuple(_column_from_dict(c) for c in doc["columns"])
    classes = tuple(doc["classes"])
    kind = doc.get("kind")
    if kind == "tree":
        params = doc["params"]
        return DecisionTreeModel(
            columns, classes, _node_from_dict(doc["root"]),
            params["criterion"], params["min_leaf"], params["max_depth"],
        )
    if kind == "bayes":
        return NaiveBayesModel(
            columns,
            classes,
            np.asarray(doc["priors"], dtype=np.float64),
            {int(a): np.asarray(t, dtype=np.float64) for a, t in doc["nominal_tables"].items()},
            {int(a): (np.asarray(m, dtype=np.float64), np.asarray(v, dtype=np.float64)) for a, (m, v) in doc["numeric_stats"].items()},
            doc["alpha"],
        )
    if kind == "knn":
        path = doc["training_csv"]
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        train = load_dataset(path)
        return train_knn(train, doc["k"], training_ref=doc["training_csv"])
    raise PredictionError(f"unknown model kind {kind!r}")


def save_model(model: Model, path: str) -> None:
    from ..fileio import write_text_atomic

    write_text_atomic(path, dumps_model(model))


def load_model(path: str) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_model(fh.read(), base_dir=os.path.dirname(os.path.abspath(path)))
