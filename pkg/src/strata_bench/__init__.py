"""strata-bench: sampling-strategy benchmark for imbalanced prognosis classification.

Pipeline pieces: fixed-width record parsing driven by a data dictionary,
preprocessing (recodes, missing handling, correlation and information-gain
filters), three sampling strategies including balanced stratified sampling
with a minority-class cutoff, three from-scratch classifiers, an experiment
grid with a best-of-N protocol, a synthetic imbalanced data generator, and
report/figure emission.
"""

from .dataset import Column, Dataset, load_dataset, save_dataset
from .dictionary import DataDictionary, FieldSpec, load_dictionary
from .errors import StrataBenchError
from .evaluate import EvalCell, ExperimentReport, GridConfig, accuracy, run_cell, run_grid, split_train_test
from .parsing import ParseReport, parse_records
from .sampling import (
    SamplingPlan,
    StrataIndex,
    allocate_balanced,
    balanced_stratified_sample,
    build_strata,
    eligible_classes,
    random_sample,
    stratified_sample,
)
from .synth import SynthSpec, default_profile, generate, mix

__version__ = "0.1.0"

__all__ = [
    "Column",
    "DataDictionary",
    "Dataset",
    "EvalCell",
    "ExperimentReport",
    "FieldSpec",
    "GridConfig",
    "ParseReport",
    "SamplingPlan",
    "StrataBenchError",
    "StrataIndex",
    "SynthSpec",
    "accuracy",
    "allocate_balanced",
    "balanced_stratified_sample",
    "build_strata",
    "default_profile",
    "eligible_classes",
    "generate",
    "load_dataset",
    "load_dictionary",
    "mix",
    "parse_records",
    "random_sample",
    "run_cell",
    "run_grid",
    "save_dataset",
    "split_train_test",
    "stratified_sample",
    "__version__",
]
