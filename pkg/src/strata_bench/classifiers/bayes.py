"""Naive Bayes over mixed attributes.

Posterior of a class given a row splits into the class prior and a product of
per-attribute likelihoods: additively smoothed frequency tables for nominal
attributes, per-class Gaussians for numeric ones. Computation runs in log
space and posteriors are normalized to sum to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..dataset import MISSING_CODE, NOMINAL, Cell, Column, Dataset
from ..errors import TrainingError
from .common import encode_dataset, encode_row, encode_training

VARIANCE_FLOOR = 1e-9


@dataclass(frozen=True)
class NaiveBayesModel:
    columns: tuple[Column, ...]
    classes: tuple[str, ...]
    priors: np.ndarray = field(repr=False)  # (C,)
    nominal_tables: dict[int, np.ndarray] = field(repr=False)  # attr -> (K, C) P(value | class)
    numeric_stats: dict[int, tuple[np.ndarray, np.ndarray]] = field(repr=False)  # attr -> (means, vars)
    alpha: float = 1.0

    # log-space views computed once so prediction is lookups and adds
    def __post_init__(self):
        with np.errstate(divide="ignore"):
            object.__setattr__(self, "_log_priors", np.log(self.priors))
            log_nominal = {a: np.log(t) for a, t in self.nominal_tables.items()}
        object.__setattr__(self, "_log_nominal", log_nominal)
        zero_row = np.zeros((1, len(self.classes)))
        object.__setattr__(
            self,
            "_log_nominal_padded",  # extra zero row: the missing-code sentinel
            {a: np.vstack([t, zero_row]) for a, t in log_nominal.items()},
        )
        gauss = {}
        for attr, (means, variances) in self.numeric_stats.items():
            gauss[attr] = (means, variances, -0.5 * np.log(2.0 * math.pi * variances))
        object.__setattr__(self, "_gauss", gauss)


def train_naive_bayes(train: Dataset, alpha: float = 1.0) -> NaiveBayesModel:
    """Priors are class frequencies; nominal conditionals use Laplace smoothing
    (count + alpha) / (present_class_count + alpha * n_values); numeric attributes
    get per-class mean and population variance with a positive floor."""
    if alpha < 0:
        raise TrainingError(f"alpha must be >= 0, got {alpha}")
    enc = encode_training(train)
    n_classes = len(enc.classes)
    class_counts = np.bincount(enc.y, minlength=n_classes).astype(np.float64)
    priors = class_counts / class_counts.sum()

    nominal_tables: dict[int, np.ndarray] = {}
    numeric_stats: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for attr, col in enumerate(enc.columns):
        arr = enc.arrays[attr]
        if col.kind == NOMINAL:
            k = len(col.categories)
            present = arr != MISSING_CODE
            counts = np.bincount(arr[present] * n_classes + enc.y[present], minlength=k * n_classes)
            counts = counts.reshape(k, n_classes).astype(np.float64)
            denom = counts.sum(axis=0) + alpha * k
            with np.errstate(divide="ignore", invalid="ignore"):
                table = np.where(denom > 0, (counts + alpha) / denom, 0.0)
            nominal_tables[attr] = table
        else:
            present = ~np.isnan(arr)
            if present.any():
                global_mean = float(arr[present].mean())
                global_var = max(float(arr[present].var()), VARIANCE_FLOOR)
            else:
                global_mean, global_var = 0.0, 1.0
            means = np.full(n_classes, global_mean)
            variances = np.full(n_classes, global_var)
            for c in range(n_classes):
                values = arr[present & (enc.y == c)]
                if len(values):
                    means[c] = values.mean()
                    variances[c] = max(float(values.var()), VARIANCE_FLOOR)
            numeric_stats[attr] = (means, variances)
    return NaiveBayesModel(enc.columns, enc.classes, priors, nominal_tables, numeric_stats, alpha)


def _log_posteriors(model: NaiveBayesModel, codes: np.ndarray, values: np.ndarray) -> np.ndarray:
    logp = model._log_priors.copy()
    for attr, col in enumerate(model.columns):
        if col.kind == NOMINAL:
            code = codes[attr]
            if code == MISSING_CODE:
                continue
            logp += model._log_nominal[attr][code]
        else:
            x = values[attr]
            if np.isnan(x):
                continue
            means, variances, log_norm = model._gauss[attr]
            logp += log_norm - 0.5 * (x - means) ** 2 / variances
    return logp


def _normalize(logp: np.ndarray, priors: np.ndarray) -> np.ndarray:
    peak = logp.max()
    if not np.isfinite(peak):  # alpha=0 can zero out every class: fall back to priors
        return priors / priors.sum()
    weights = np.exp(logp - peak)
    return weights / weights.sum()


def _normalize_rows(logp: np.ndarray, priors: np.ndarray) -> np.ndarray:
    peaks = logp.max(axis=1)
    finite = np.isfinite(peaks)
    out = np.empty_like(logp)
    if finite.any():
        shifted = logp[finite] - peaks[finite][:, None]
        weights = np.exp(shifted)
        out[finite] = weights / weights.sum(axis=1, keepdims=True)
    if not finite.all():
        out[~finite] = priors / priors.sum()
    return out


def predict_bayes(model: NaiveBayesModel, row: list[Cell]) -> tuple[str, np.ndarray]:
    """Return (argmax class, posterior vector over model.classes). Missing cells
    are skipped; an all-missing row falls back to the prior argmax."""
    codes, values = encode_row(row, model.columns)
    posterior = _normalize(_log_posteriors(model, codes, values), model.priors)
    return model.classes[int(np.argmax(posterior))], posterior


def predict_bayes_posteriors(model: NaiveBayesModel, ds: Dataset) -> np.ndarray:
    """Posterior matrix (rows x model.classes); each row sums to 1 with the same
    all-missing prior fallback as predict_bayes."""
    return _normalize_rows(_batch_log_posteriors(model, ds), model.priors)


def predict_bayes_dataset(model: NaiveBayesModel, ds: Dataset) -> list[str]:
    posteriors = predict_bayes_posteriors(model, ds)
    best = np.argmax(posteriors, axis=1)
    return [model.classes[int(c)] for c in best]


def _batch_log_posteriors(model: NaiveBayesModel, ds: Dataset) -> np.ndarray:
    arrays = encode_dataset(ds, model.columns)
    n = ds.n_rows
    logp = np.empty((n, len(model.classes)))
    logp[:] = model._log_priors
    with np.errstate(invalid="ignore"):
        for attr, col in enumerate(model.columns):
            arr = arrays[attr]
            if col.kind == NOMINAL:
                logp += model._log_nominal_padded[attr][arr]  # missing hits the zero sentinel row
            else:
                means, variances, log_norm = model._gauss[attr]
                x = arr[:, None]
                contrib = log_norm[None, :] - 0.5 * (x - means[None, :]) ** 2 / variances[None, :]
                logp += np.where(np.isnan(x), 0.0, contrib)
    return logp
