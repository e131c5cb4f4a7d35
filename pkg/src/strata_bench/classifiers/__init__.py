"""The three benchmark classifiers and their serialization."""

from .bayes import (
    NaiveBayesModel,
    predict_bayes,
    predict_bayes_dataset,
    predict_bayes_posteriors,
    train_naive_bayes,
)
from .knn import KnnModel, knn_predict, knn_predict_dataset, mixed_distance, train_knn
from .serialize import dumps_model, load_model, loads_model, save_model
from .tree import DecisionTreeModel, predict_tree, predict_tree_dataset, train_decision_tree

CLASSIFIERS = ("tree", "bayes", "knn")

__all__ = [
    "CLASSIFIERS",
    "DecisionTreeModel",
    "KnnModel",
    "NaiveBayesModel",
    "dumps_model",
    "knn_predict",
    "knn_predict_dataset",
    "load_model",
    "loads_model",
    "mixed_distance",
    "predict_bayes",
    "predict_bayes_dataset",
    "predict_bayes_posteriors",
    "predict_tree",
    "predict_tree_dataset",
    "save_model",
    "train_decision_tree",
    "train_knn",
    "train_naive_bayes",
]
