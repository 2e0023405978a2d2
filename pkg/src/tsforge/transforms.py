"""Invertible pre-processing transforms and composable chains.

Each transform is fitted per univariate on the data it first sees; after
fitting, ``apply`` and ``invert`` are read-only. ``normalize`` and
``difference`` invert exactly; ``moving-average`` and ``resample`` are
lossy and flagged non-invertible.
"""

from __future__ import annotations

import numpy as np

from .data import TimeSeries, UnivariateTimeSeries, resample as _resample
from .errors import InvertibilityError, TransformError


class Transform:
    """Base class: fit once, then apply/invert without mutation."""

    kind = "identity"
    invertible = True

    def __init__(self):
        self.fitted = False

    def fit_apply(self, ts: TimeSeries) -> TimeSeries:
        out = TimeSeries([self._fit_apply_uni(u) for u in ts])
        self.fitted = True
        return out

    def apply(self, ts: TimeSeries) -> TimeSeries:
        if not self.fitted:
            raise TransformError(f"{self.kind} transform is not fitted")
        return TimeSeries([self._apply_uni(u) for u in ts])

    def invert(self, ts: TimeSeries) -> TimeSeries:
        if not self.fitted:
            raise TransformError(f"{self.kind} transform is not fitted")
        if not self.invertible:
            raise InvertibilityError(f"{self.kind} transform is not invertible")
        return TimeSeries([self._invert_uni(u) for u in ts])

    def se_scale(self, name: str) -> float | None:
        """Multiplier mapping standard errors back through the inverse, or
        None when the inverse does not preserve a constant error scale."""
        return 1.0

    def _fit_apply_uni(self, u: UnivariateTimeSeries) -> UnivariateTimeSeries:
        raise NotImplementedError

    def _apply_uni(self, u: UnivariateTimeSeries) -> UnivariateTimeSeries:
        raise NotImplementedError

    def _invert_uni(self, u: UnivariateTimeSeries) -> UnivariateTimeSeries:
        raise NotImplementedError

    def _invert_continuation(self, values: np.ndarray, context: UnivariateTimeSeries) -> np.ndarray:
        """Invert forecast values that continue past ``context`` (the stage's
        input history). Default: same as pointwise inversion with no lag."""
        if not self.invertible:
            raise InvertibilityError(f"{self.kind} transform is not invertible")
        raise NotImplementedError

    def _invert_pointwise(
        self, timestamps: np.ndarray, values: np.ndarray, context: UnivariateTimeSeries
    ) -> np.ndarray:
        """Invert one-step predictions at ``timestamps``, using the true
        stage-input history ``context`` for any lagged terms."""
        if not self.invertible:
            raise InvertibilityError(f"{self.kind} transform is not invertible")
        raise NotImplementedError

    def to_config(self) -> dict:
        return {"kind": self.kind}


class Normalize(Transform):
    """Center and scale each univariate: (x - mu) / sigma, sample sigma.

    A constant series fits sigma := 1 so the inverse stays exact.
    """

    kind = "normalize"

    def __init__(self):
        super().__init__()
        self.params: dict[str, tuple[float, float]] = {}

    def _fit_apply_uni(self, u):
        if len(u) == 0:
            raise TransformError("cannot fit normalize on an empty univariate")
        mu = float(np.mean(u.values))
        sigma = float(np.std(u.values, ddof=1)) if len(u) > 1 else 0.0
        if not sigma > 0.0:
            sigma = 1.0
        self.params[u.name] = (mu, sigma)
        return u.with_values((u.values - mu) / sigma)

    def _apply_uni(self, u):
        mu, sigma = self._lookup(u.name)
        return u.with_values((u.values - mu) / sigma)

    def _invert_uni(self, u):
        mu, sigma = self._lookup(u.name)
        return u.with_values(u.values * sigma + mu)

    def _lookup(self, name):
        if name not in self.params:
            raise TransformError(f"normalize was not fitted on univariate {name!r}")
        return self.params[name]

    def _invert_continuation(self, values, context):
        mu, sigma = self._lookup(context.name)
        return values * sigma + mu

    def _invert_pointwise(self, timestamps, values, context):
        mu, sigma = self._lookup(context.name)
        return values * sigma + mu

    def se_scale(self, name):
        return self._lookup(name)[1]


class Difference(Transform):
    """Order-k differencing: y_j = x_j - x_{j-k}, dropping the first k points.

    The fitted original series is retained so inversion can reconstruct both
    the fitted output (seeded by the head) and forecast continuations
    (seeded by the last observed values).
    """

    kind = "difference"

    def __init__(self, order: int = 1):
        super().__init__()
        if order < 1:
            raise ValueError("difference order must be >= 1")
        self.order = order
        self.state: dict[str, tuple[np.ndarray, np.ndarray]] = {}

    def _diff(self, u):
        k = self.order
        if len(u) <= k:
            raise TransformError(f"difference(k={k}) needs more than {k} points, got {len(u)}")
        return u.with_values(u.values[k:] - u.values[:-k], u.timestamps[k:])

    def _fit_apply_uni(self, u):
        self.state[u.name] = (u.timestamps.copy(), u.values.copy())
        return self._diff(u)

    def _apply_uni(self, u):
        return self._diff(u)

    def _invert_uni(self, u):
        if u.name not in self.state:
            raise TransformError(f"difference was not fitted on univariate {u.name!r}")
        fit_t, fit_v = self.state[u.name]
        k = self.order
        vals = np.asarray(u.values, dtype=np.float64)
        out = np.empty(len(vals))
        if len(u) and u.timestamps[0] > fit_t[-1]:
            # forecast continuation: chain off the last observed values
            seed = fit_v[-k:]
        elif np.array_equal(u.timestamps, fit_t[k:]):
            seed = fit_v[:k]
        else:
            raise InvertibilityError(
                "difference inversion requires either the fitted output or a continuation past the fitted span"
            )
        for j in range(len(vals)):
            prev = seed[j] if j < k else out[j - k]
            out[j] = vals[j] + prev
        return u.with_values(out)

    def _invert_continuation(self, values, context):
        k = self.order
        if len(context) < k:
            raise TransformError(f"difference inversion needs at least {k} context points")
        seed = context.values[-k:]
        out = np.empty(len(values))
        for j in range(len(values)):
            prev = seed[j] if j < k else out[j - k]
            out[j] = values[j] + prev
        return out

    def _invert_pointwise(self, timestamps, values, context):
        k = self.order
        pos = np.searchsorted(context.timestamps, timestamps)
        ok = (pos < len(context)) & (pos >= k)
        ok &= context.timestamps[np.clip(pos, 0, len(context) - 1)] == timestamps
        if not ok.all():
            raise TransformError("one-step inversion requires timestamps inside the differenced context")
        return values + context.values[pos - k]

    def se_scale(self, name):
        return None

    def to_config(self):
        return {"kind": self.kind, "order": self.order}


class MovingAverage(Transform):
    """Trailing moving average of the given window; drops the first
    window-1 points. Lossy, therefore non-invertible."""

    kind = "moving-average"
    invertible = False

    def __init__(self, window: int = 3):
        super().__init__()
        if window < 1:
            raise ValueError("window must be >= 1")
        self.window = window

    def _smooth(self, u):
        w = self.window
        if len(u) < w:
            raise TransformError(f"moving-average(window={w}) needs at least {w} points")
        c = np.cumsum(np.concatenate([[0.0], u.values]))
        vals = (c[w:] - c[:-w]) / w
        return u.with_values(vals, u.timestamps[w - 1 :])

    def _fit_apply_uni(self, u):
        return self._smooth(u)

    def _apply_uni(self, u):
        return self._smooth(u)

    def se_scale(self, name):
        return None

    def to_config(self):
        return {"kind": self.kind, "window": self.window}


class Resample(Transform):
    """Bucket-mean resampling to a fixed granularity; non-invertible."""

    kind = "resample"
    invertible = False

    def __init__(self, granularity: int, agg: str = "mean"):
        super().__init__()
        self.granularity = granularity
        self.agg = agg

    def _fit_apply_uni(self, u):
        return _resample(u, self.granularity, self.agg)

    def _apply_uni(self, u):
        return _resample(u, self.granularity, self.agg)

    def se_scale(self, name):
        return None

    def to_config(self):
        return {"kind": self.kind, "granularity": self.granularity, "agg": self.agg}


class TransformChain:
    """An ordered, composable list of transforms.

    ``fit_apply`` fits each stage on its predecessor's output; ``invert``
    applies the stage inverses strictly in reverse order. The chain is
    invertible iff every stage is.
    """

    def __init__(self, transforms: list[Transform] | None = None):
        self.transforms = list(transforms or [])

    def __len__(self):
        return len(self.transforms)

    @property
    def invertible(self) -> bool:
        return all(t.invertible for t in self.transforms)

    def fit_apply(self, ts: TimeSeries) -> TimeSeries:
        for t in self.transforms:
            ts = t.fit_apply(ts)
        return ts

    def apply(self, ts: TimeSeries) -> TimeSeries:
        for t in self.transforms:
            ts = t.apply(ts)
        return ts

    def invert(self, ts: TimeSeries) -> TimeSeries:
        if not self.invertible:
            bad = [t.kind for t in self.transforms if not t.invertible]
            raise InvertibilityError(f"chain contains non-invertible transforms: {bad}")
        for t in reversed(self.transforms):
            ts = t.invert(ts)
        return ts

    def se_scale(self, name: str) -> float | None:
        scale = 1.0
        for t in self.transforms:
            s = t.se_scale(name)
            if s is None:
                return None
            scale *= s
        return scale

    def _stage_inputs(self, context: UnivariateTimeSeries) -> list[UnivariateTimeSeries]:
        """Push the untransformed context through the chain, keeping each
        stage's input representation."""
        stages = [context]
        cur = context
        for t in self.transforms:
            cur = t._apply_uni(cur)
            stages.append(cur)
        return stages

    def invert_forecast(self, values: np.ndarray, context: UnivariateTimeSeries) -> np.ndarray:
        """Invert forecast values continuing past the end of ``context``.

        ``context`` is the untransformed history the forecast extends; lagged
        inverses (differencing) chain off its tail.
        """
        if not self.invertible:
            raise InvertibilityError("chain contains non-invertible transforms")
        stages = self._stage_inputs(context)
        out = np.asarray(values, dtype=np.float64)
        for t, stage_in in zip(reversed(self.transforms), reversed(stages[:-1])):
            out = t._invert_continuation(out, stage_in)
        return out

    def invert_pointwise(
        self, timestamps: np.ndarray, values: np.ndarray, context: UnivariateTimeSeries
    ) -> np.ndarray:
        """Invert one-step-ahead predictions at in-sample timestamps, using
        the true history for lagged terms."""
        if not self.invertible:
            raise InvertibilityError("chain contains non-invertible transforms")
        stages = self._stage_inputs(context)
        out = np.asarray(values, dtype=np.float64)
        for t, stage_in in zip(reversed(self.transforms), reversed(stages[:-1])):
            out = t._invert_pointwise(timestamps, out, stage_in)
        return out

    def to_config(self) -> list[dict]:
        return [t.to_config() for t in self.transforms]

    @classmethod
    def from_config(cls, specs: list[dict]) -> "TransformChain":
        """Build a chain from a list of {kind, params} dictionaries."""
        out = []
        for spec in specs:
            kind = spec.get("kind")
            if kind == "normalize":
                out.append(Normalize())
            elif kind == "difference":
                out.append(Difference(order=int(spec.get("order", 1))))
            elif kind == "moving-average":
                out.append(MovingAverage(window=int(spec.get("window", 3))))
            elif kind == "resample":
                out.append(Resample(granularity=int(spec["granularity"]), agg=spec.get("agg", "mean")))
            else:
                raise TransformError(f"unknown transform kind {kind!r}")
        return cls(out)
