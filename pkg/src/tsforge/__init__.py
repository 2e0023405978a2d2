"""tsforge: time series forecasting, anomaly detection, and benchmarking."""

from .data import AnomalyLabelSeries, TimeSeries, UnivariateTimeSeries, align, resample, split_at
from .postprocess import AnomalyScoreSeries, Calibrator, ThresholdRule, apply_threshold, calibrate, fit_calibrator
from .transforms import TransformChain

__all__ = [
    "AnomalyLabelSeries",
    "AnomalyScoreSeries",
    "Calibrator",
    "ThresholdRule",
    "TimeSeries",
    "TransformChain",
    "UnivariateTimeSeries",
    "align",
    "apply_threshold",
    "calibrate",
    "fit_calibrator",
    "resample",
    "split_at",
]

__version__ = "0.1.0"
