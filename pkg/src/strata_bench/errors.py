"""Exception hierarchy. Every error the CLI maps to exit code 1 derives from StrataBenchError."""


class StrataBenchError(Exception):
    """Base class for all errors raised by this package."""


class DictionaryError(StrataBenchError):
    """Malformed or inconsistent data dictionary."""


class ParseError(StrataBenchError):
    """A record or cell could not be parsed."""


class SchemaError(StrataBenchError):
    """Dataset schema violated (unknown column, wrong kind, bad category)."""


class ConfigError(StrataBenchError):
    """Malformed configuration file or block."""


class SamplingError(StrataBenchError):
    """Base class for sampling failures."""


class InsufficientDataError(SamplingError):
    """Requested sample size exceeds the available rows."""


class NoEligibleStrataError(SamplingError):
    """Every class fell below the minority-ratio cutoff."""


class CapacityError(SamplingError):
    """No stratum subset can supply the requested balanced sample."""

    def __init__(self, message: str, max_achievable: int):
        super().__init__(message)
        self.max_achievable = max_achievable


class PreprocessError(StrataBenchError):
    """Recode or filter failure."""


class DegenerateDatasetError(PreprocessError):
    """A filter removed every predictor column."""


class MappingError(PreprocessError):
    """Staging-code mapping has no entry for an (era, code) pair."""


class TrainingError(StrataBenchError):
    """Classifier training failed."""


class PredictionError(StrataBenchError):
    """Prediction input does not conform to the trained model."""


class EvaluationError(StrataBenchError):
    """Scoring or experiment-grid failure."""


class ReportError(StrataBenchError):
    """Report emission failure."""
