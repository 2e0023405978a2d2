"""Anomaly score calibration and alert thresholding.

Calibration maps raw anomaly scores onto z-score units: the empirical CDF of
training |score| is anchored at fixed quantiles to standard-normal quantiles
via C(s) = sign(s) * ndtri((1 + F(|s|)) / 2), interpolated by a monotone
cubic between anchors. Thresholding turns calibrated scores into fired
alerts with window counting and post-alert suppression.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .data import AnomalyLabelSeries
from .errors import MetricError
from .interpolate import MonotoneCubicInterpolator

# 5% ladder through the body plus a finer tail; denser anchors below the
# median keep the calibrated distribution close to half-normal even for
# strongly non-uniform score distributions (bimodal, discrete).
ANCHOR_QUANTILES = tuple(np.round(np.arange(0.05, 1.0, 0.05), 2)) + (0.99, 1.0)
Z_MAX = 8.0
MIN_FIT_SCORES = 20


@dataclass
class AnomalyScoreSeries:
    """Per-timestamp anomaly scores; |score| grows with severity.

    ``calibrated`` is False for raw detector output and True once mapped to
    z-score units.
    """

    timestamps: np.ndarray
    scores: np.ndarray
    calibrated: bool = False

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if len(self.timestamps) != len(self.scores):
            raise ValueError("timestamps and scores must have equal length")
        if len(self.timestamps) > 1 and not np.all(np.diff(self.timestamps) > 0):
            raise ValueError("timestamps must be strictly increasing")

    def __len__(self):
        return len(self.timestamps)


class Calibrator:
    """Monotone map from raw score magnitude to z-score units.

    Fit via :func:`fit_calibrator`. The map is odd, C(-s) = -C(s),
    non-decreasing in |s|, extends linearly past the largest anchor with
    the final segment's slope, and clamps output magnitude at ``Z_MAX``.
    """

    def __init__(self, anchors_x, anchors_y, degenerate: bool = False):
        self.degenerate = degenerate
        self.anchors_x = np.asarray(anchors_x, dtype=np.float64)
        self.anchors_y = np.asarray(anchors_y, dtype=np.float64)
        if degenerate:
            self._interp = None
            self._tail_slope = 0.0
        else:
            self._interp = MonotoneCubicInterpolator(self.anchors_x, self.anchors_y)
            dx = self.anchors_x[-1] - self.anchors_x[-2]
            self._tail_slope = (self.anchors_y[-1] - self.anchors_y[-2]) / dx

    def transform_abs(self, mag):
        """Calibrated magnitude for |score| input."""
        mag = np.asarray(mag, dtype=np.float64)
        if self.degenerate:
            return np.zeros_like(mag)
        out = np.empty_like(mag)
        hi = mag > self.anchors_x[-1]
        out[~hi] = self._interp(mag[~hi])
        out[hi] = self.anchors_y[-1] + self._tail_slope * (mag[hi] - self.anchors_x[-1])
        return np.clip(out, 0.0, Z_MAX)

    def __call__(self, scores: np.ndarray) -> np.ndarray:
        scores = np.asarray(scores, dtype=np.float64)
        return np.sign(scores) * self.transform_abs(np.abs(scores))


def fit_calibrator(scores: AnomalyScoreSeries | np.ndarray) -> Calibrator:
    """Fit the calibration map on training scores.

    Anchors sit at fixed |score| quantiles; each quantile q maps to
    ndtri((1 + q) / 2), clamped at ``Z_MAX``. Identical scores everywhere
    yield a degenerate calibrator that maps everything to 0.
    """
    raw = scores.scores if isinstance(scores, AnomalyScoreSeries) else np.asarray(scores, dtype=np.float64)
    raw = raw[np.isfinite(raw)]
    if len(raw) < MIN_FIT_SCORES:
        raise ValueError(f"calibrator needs at least {MIN_FIT_SCORES} finite scores, got {len(raw)}")
    mag = np.abs(raw)
    if np.ptp(mag) == 0.0:
        return Calibrator([0.0, 1.0], [0.0, 0.0], degenerate=True)

    qs = np.asarray(ANCHOR_QUANTILES)
    x = np.quantile(mag, qs)
    y = np.minimum(ndtri((1.0 + qs) / 2.0), Z_MAX)
    if x[0] > 0.0:
        x = np.concatenate([[0.0], x])
        y = np.concatenate([[0.0], y])
    # empirical quantiles can coincide; keep the highest target per x
    keep_x, keep_y = [], []
    for xi, yi in zip(x, y):
        if keep_x and xi <= keep_x[-1]:
            keep_y[-1] = max(keep_y[-1], yi)
        else:
            keep_x.append(xi)
            keep_y.append(yi)
    if len(keep_x) < 2:
        return Calibrator([0.0, 1.0], [0.0, 0.0], degenerate=True)
    return Calibrator(keep_x, keep_y)


def calibrate(cal: Calibrator, scores: AnomalyScoreSeries) -> AnomalyScoreSeries:
    """Apply a fitted calibrator elementwise; output carries z-score units."""
    return AnomalyScoreSeries(scores.timestamps, cal(scores.scores), calibrated=True)


@dataclass
class ThresholdRule:
    """Alert firing rule on calibrated scores.

    A candidate is a timestamp with |z| > threshold. An alert fires at the
    first candidate t with at least ``min_alerts_in_window`` surviving
    candidates inside the trailing ``alert_window_seconds`` (current point
    included). Once an alert fires, every candidate within
    ``suppress_seconds`` of it is suppressed and discarded; the dead-time
    does not restart on suppressed candidates.
    """

    threshold: float = 3.0
    min_alerts_in_window: int = 2
    alert_window_seconds: int = 3600
    suppress_seconds: int = 7200

    def __post_init__(self):
        if self.threshold < 0:
            raise ValueError("threshold must be >= 0")
        if self.min_alerts_in_window < 1:
            raise ValueError("min_alerts_in_window must be >= 1")
        if self.alert_window_seconds <= 0 or self.suppress_seconds < 0:
            raise ValueError("windows must be positive")


def apply_threshold(rule: ThresholdRule, scores: AnomalyScoreSeries) -> AnomalyLabelSeries:
    """Run the alert rule over calibrated scores.

    Returns labels over the full score timestamp domain with 1 at each
    firing point.
    """
    if not scores.calibrated:
        raise ValueError("apply_threshold expects calibrated scores")
    t = scores.timestamps
    candidates = np.abs(scores.scores) > rule.threshold

    fired = np.zeros(len(t), dtype=np.uint8)
    window: list[int] = []  # surviving candidate timestamps in the trailing window
    suppress_until = None
    for i in np.nonzero(candidates)[0]:
        ti = int(t[i])
        if suppress_until is not None and ti <= suppress_until:
            continue  # suppressed and discarded
        window = [w for w in window if ti - w <= rule.alert_window_seconds]
        window.append(ti)
        if len(window) >= rule.min_alerts_in_window:
            fired[i] = 1
            suppress_until = ti + rule.suppress_seconds
    return AnomalyLabelSeries(t, fired)


def mean_scores(series: list[AnomalyScoreSeries]) -> AnomalyScoreSeries:
    """Per-timestamp mean over score series, on the intersection of grids."""
    if not series:
        raise MetricError("no score series to combine")
    grid = series[0].timestamps
    for s in series[1:]:
        grid = np.intersect1d(grid, s.timestamps)
    if len(grid) == 0:
        raise MetricError("score series share no timestamps")
    cols = []
    for s in series:
        idx = np.searchsorted(s.timestamps, grid)
        cols.append(s.scores[idx])
    combined = np.mean(np.column_stack(cols), axis=1)
    return AnomalyScoreSeries(grid, combined, calibrated=all(s.calibrated for s in series))
