"""Shared forecaster interface.

Every forecaster is trained on a ``TimeSeries`` and predicts a single target
univariate at requested future timestamps. Predictions can be conditioned on
alternative history via ``time_series_prev`` without refitting: the model's
rolling state is rebuilt from the provided history.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data import TimeSeries, UnivariateTimeSeries
from ..errors import AlignmentError, HistoryError, ModelSpecError
from ..transforms import TransformChain


@dataclass
class ForecastResult:
    """Target-variable predictions with optional standard errors."""

    timestamps: np.ndarray
    values: np.ndarray
    se: np.ndarray | None = None

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if len(self.timestamps) != len(self.values):
            raise ValueError("timestamps and values must have equal length")
        if len(self.timestamps) > 1 and not np.all(np.diff(self.timestamps) > 0):
            raise ValueError("timestamps must be strictly increasing")
        if self.se is not None:
            self.se = np.asarray(self.se, dtype=np.float64)
            if len(self.se) != len(self.values):
                raise ValueError("se length must match values")
            if not np.all(self.se > 0):
                raise ValueError("standard errors must be positive")

    def __len__(self):
        return len(self.timestamps)


@dataclass
class ForecasterConfig:
    """Options shared by all forecasters."""

    target_index: int = 0
    max_lags: int = 21
    transform: TransformChain = field(default_factory=TransformChain)


class Forecaster:
    """Base class: train(ts), forecast(stamps, prev), predict_one_step(ts)."""

    needs_aligned = False

    def __init__(self, config: ForecasterConfig | None = None):
        self.config = config or ForecasterConfig()
        self.trained = False
        self._train_transformed: TimeSeries | None = None
        self._train_original: TimeSeries | None = None

    # -- subclass hooks, all in transformed space ------------------------

    def _fit(self, ts: TimeSeries) -> None:
        raise NotImplementedError

    def _predict(self, history: TimeSeries, horizon: int) -> tuple[np.ndarray, np.ndarray | None]:
        """(values, se) for `horizon` steps past the end of `history`."""
        raise NotImplementedError

    def _predict_one_step(self, ts: TimeSeries) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
        """(timestamps, yhat, se): one-step-ahead predictions over ts,
        each conditioned on the true values before it."""
        raise NotImplementedError

    # -- public API -------------------------------------------------------

    @property
    def target_index(self) -> int:
        return self.config.target_index

    def _as_ts(self, data) -> TimeSeries:
        return TimeSeries([data]) if isinstance(data, UnivariateTimeSeries) else data

    def train(self, ts: TimeSeries | UnivariateTimeSeries) -> None:
        ts = self._as_ts(ts)
        if not 0 <= self.config.target_index < ts.dim:
            raise ModelSpecError(
                f"target_index {self.config.target_index} out of range for {ts.dim} univariates"
            )
        work = self.config.transform.fit_apply(ts) if len(self.config.transform) else ts
        if self.needs_aligned and not work.is_aligned():
            raise AlignmentError(f"{type(self).__name__} requires aligned input; call align() first")
        self._train_original = ts
        self._train_transformed = work
        self._fit(work)
        self.trained = True

    def _conditioning(self, time_series_prev) -> tuple[TimeSeries, TimeSeries]:
        """(transformed history, original context) for forecasting."""
        if time_series_prev is None:
            return self._train_transformed, self._train_original
        prev = self._as_ts(time_series_prev)
        work = self.config.transform.apply(prev) if len(self.config.transform) else prev
        if self.needs_aligned and not work.is_aligned():
            raise AlignmentError("conditioning history must be aligned")
        return work, prev

    def forecast(self, time_stamps, time_series_prev=None) -> ForecastResult:
        if not self.trained:
            raise ModelSpecError("forecast() called before train()")
        stamps = np.asarray(time_stamps, dtype=np.int64)
        if len(stamps) == 0:
            return ForecastResult(stamps, np.array([]))
        history, context = self._conditioning(time_series_prev)
        values, se = self._predict(history, len(stamps))
        name = context.names[self.target_index]
        if len(self.config.transform):
            values = self.config.transform.invert_forecast(values, context[name])
            if se is not None:
                scale = self.config.transform.se_scale(name)
                se = se * scale if scale is not None else None
        return ForecastResult(stamps, values, se)

    def predict_one_step(self, ts: TimeSeries | UnivariateTimeSeries) -> ForecastResult:
        """One-step-ahead predictions over ts, conditioned on true history.

        ts must contain the training series as a prefix (the model state is
        simply re-run over the full series).
        """
        if not self.trained:
            raise ModelSpecError("predict_one_step() called before train()")
        ts = self._as_ts(ts)
        work = self.config.transform.apply(ts) if len(self.config.transform) else ts
        if self.needs_aligned and not work.is_aligned():
            raise AlignmentError("predict_one_step requires aligned input")
        t, yhat, se = self._predict_one_step(work)
        if len(t) == 0:
            raise HistoryError("series too short for any one-step prediction")
        name = ts.names[self.target_index]
        if len(self.config.transform):
            yhat = self.config.transform.invert_pointwise(t, yhat, ts[name])
            if se is not None:
                scale = self.config.transform.se_scale(name)
                se = se * scale if scale is not None else None
        return ForecastResult(t, yhat, se)


def future_stamps(u: UnivariateTimeSeries, horizon: int) -> np.ndarray:
    """Continue a series' grid by `horizon` steps of its median gap."""
    gap = u.median_gap()
    last = int(u.timestamps[-1])
    return last + gap * np.arange(1, horizon + 1, dtype=np.int64)
