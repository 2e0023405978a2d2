"""Exception types shared across the library."""


class TsforgeError(Exception):
    """Base class for all library errors."""


class AlignmentError(TsforgeError):
    """Univariates cannot be placed on a common timestamp grid."""


class SplitError(TsforgeError):
    """A train/test split would leave one side empty."""


class TransformError(TsforgeError):
    """A transform cannot be fitted or applied to the given data."""


class InvertibilityError(TransformError):
    """Inversion requested on a transform or chain that cannot be inverted."""


class FitError(TsforgeError):
    """Model estimation failed.

    Carries ``params`` with the best parameters found before the failure,
    when any exist.
    """

    def __init__(self, message, params=None):
        super().__init__(message)
        self.params = params


class HistoryError(TsforgeError):
    """Not enough conditioning history to produce a forecast or score."""


class ModelSpecError(TsforgeError):
    """A model configuration is inconsistent with the data."""


class EnsembleError(TsforgeError):
    """Every ensemble member failed, or members cannot be combined."""


class MetricError(TsforgeError):
    """A metric is undefined for the given inputs."""


class DataLoadError(TsforgeError):
    """A dataset file or manifest could not be parsed."""


class ConfigError(TsforgeError):
    """A benchmark run configuration is invalid."""
