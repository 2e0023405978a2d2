"""Core time series containers and alignment/resampling primitives.

Timestamps are integer seconds since the epoch. Values are finite floats;
missing data is represented by the absence of a point, never by a NaN
sentinel. All containers are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import AlignmentError, SplitError


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class UnivariateTimeSeries:
    """A named sequence of (timestamp, value) points.

    Timestamps must be strictly increasing and values finite.
    """

    __slots__ = ("name", "timestamps", "values")

    def __init__(self, name: str, timestamps: Sequence[int], values: Sequence[float]):
        t = np.asarray(timestamps, dtype=np.int64)
        v = np.asarray(values, dtype=np.float64)
        if t.ndim != 1 or v.ndim != 1 or len(t) != len(v):
            raise ValueError("timestamps and values must be 1-d sequences of equal length")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValueError(f"timestamps of {name!r} must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"values of {name!r} must be finite; drop missing points instead")
        self.name = name
        self.timestamps = _freeze(t)
        self.values = _freeze(v)

    def __len__(self) -> int:
        return len(self.timestamps)

    def __iter__(self) -> Iterator[tuple[int, float]]:
        return zip(self.timestamps.tolist(), self.values.tolist())

    def __repr__(self) -> str:
        return f"UnivariateTimeSeries({self.name!r}, n={len(self)})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, UnivariateTimeSeries)
            and self.name == other.name
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.values, other.values)
        )

    def with_values(self, values: Sequence[float], timestamps: Sequence[int] | None = None) -> "UnivariateTimeSeries":
        """New series with the same name, replacing values (and optionally stamps)."""
        t = self.timestamps if timestamps is None else timestamps
        return UnivariateTimeSeries(self.name, t, values)

    def slice_time(self, start: int | None = None, end: int | None = None) -> "UnivariateTimeSeries":
        """Points with start <= t <= end (either bound may be None)."""
        t = self.timestamps
        mask = np.ones(len(t), dtype=bool)
        if start is not None:
            mask &= t >= start
        if end is not None:
            mask &= t <= end
        return UnivariateTimeSeries(self.name, t[mask], self.values[mask])

    def concat(self, other: "UnivariateTimeSeries") -> "UnivariateTimeSeries":
        """Append a later series; other must start after this one ends."""
        if len(other) == 0:
            return self
        if len(self) and other.timestamps[0] <= self.timestamps[-1]:
            raise ValueError("concat requires strictly later timestamps")
        return UnivariateTimeSeries(
            self.name,
            np.concatenate([self.timestamps, other.timestamps]),
            np.concatenate([self.values, other.values]),
        )

    def median_gap(self) -> int:
        """Median spacing between consecutive timestamps, >= 1."""
        if len(self) < 2:
            return 1
        return max(1, int(np.median(np.diff(self.timestamps))))


class TimeSeries:
    """An ordered collection of uniquely named univariates.

    Univariates may differ in length and timestamps; use :func:`align` to put
    them on a shared grid before matrix-based modeling.
    """

    __slots__ = ("univariates",)

    def __init__(self, univariates: Iterable[UnivariateTimeSeries]):
        uts = tuple(univariates)
        if not uts:
            raise ValueError("TimeSeries requires at least one univariate")
        names = [u.name for u in uts]
        if len(set(names)) != len(names):
            raise ValueError(f"univariate names must be unique, got {names}")
        self.univariates = uts

    @classmethod
    def from_arrays(cls, timestamps, values_by_name: dict[str, Sequence[float]]) -> "TimeSeries":
        return cls([UnivariateTimeSeries(n, timestamps, v) for n, v in values_by_name.items()])

    @property
    def dim(self) -> int:
        return len(self.univariates)

    @property
    def names(self) -> list[str]:
        return [u.name for u in self.univariates]

    def __getitem__(self, key: int | str) -> UnivariateTimeSeries:
        if isinstance(key, str):
            for u in self.univariates:
                if u.name == key:
                    return u
            raise KeyError(key)
        return self.univariates[key]

    def __len__(self) -> int:
        return self.dim

    def __iter__(self) -> Iterator[UnivariateTimeSeries]:
        return iter(self.univariates)

    def __repr__(self) -> str:
        return f"TimeSeries({self.names}, lengths={[len(u) for u in self.univariates]})"

    def is_aligned(self) -> bool:
        first = self.univariates[0].timestamps
        return all(np.array_equal(u.timestamps, first) for u in self.univariates[1:])

    def to_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """(timestamps, n x d value matrix); requires aligned univariates."""
        if not self.is_aligned():
            raise AlignmentError("univariates are not on a shared timestamp grid; call align() first")
        cols = [u.values for u in self.univariates]
        return self.univariates[0].timestamps, np.column_stack(cols)

    def union_timestamps(self) -> np.ndarray:
        out = self.univariates[0].timestamps
        for u in self.univariates[1:]:
            out = np.union1d(out, u.timestamps)
        return out

    def slice_time(self, start: int | None = None, end: int | None = None) -> "TimeSeries":
        return TimeSeries([u.slice_time(start, end) for u in self.univariates])

    def concat(self, other: "TimeSeries") -> "TimeSeries":
        if self.names != other.names:
            raise ValueError("concat requires identical univariate names")
        return TimeSeries([a.concat(b) for a, b in zip(self.univariates, other.univariates)])


class AnomalyLabelSeries:
    """Per-timestamp binary anomaly labels with derived anomaly windows.

    A window is a maximal run of consecutive anomalous points; windows
    partition the anomalous timestamps exactly.
    """

    __slots__ = ("timestamps", "labels")

    def __init__(self, timestamps: Sequence[int], labels: Sequence[int]):
        t = np.asarray(timestamps, dtype=np.int64)
        lab = np.asarray(labels)
        if t.ndim != 1 or lab.ndim != 1 or len(t) != len(lab):
            raise ValueError("timestamps and labels must be 1-d sequences of equal length")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("timestamps must be strictly increasing")
        if not np.all((lab == 0) | (lab == 1)):
            raise ValueError("labels must be 0 (normal) or 1 (anomalous)")
        self.timestamps = _freeze(t)
        self.labels = _freeze(lab.astype(np.uint8))

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def windows(self) -> list[tuple[int, int]]:
        """Maximal runs of consecutive anomalous points as (start_ts, end_ts)."""
        lab = self.labels
        if len(lab) == 0:
            return []
        padded = np.concatenate([[0], lab, [0]])
        d = np.diff(padded.astype(np.int8))
        starts = np.nonzero(d == 1)[0]
        ends = np.nonzero(d == -1)[0] - 1
        t = self.timestamps
        return [(int(t[s]), int(t[e])) for s, e in zip(starts, ends)]

    def slice_time(self, start: int | None = None, end: int | None = None) -> "AnomalyLabelSeries":
        t = self.timestamps
        mask = np.ones(len(t), dtype=bool)
        if start is not None:
            mask &= t >= start
        if end is not None:
            mask &= t <= end
        return AnomalyLabelSeries(t[mask], self.labels[mask])

    def restrict_to(self, timestamps: Sequence[int]) -> "AnomalyLabelSeries":
        """Labels at exactly the given timestamps (missing stamps become 0)."""
        wanted = np.asarray(timestamps, dtype=np.int64)
        idx = np.searchsorted(self.timestamps, wanted)
        idx = np.clip(idx, 0, max(len(self.timestamps) - 1, 0))
        lab = np.zeros(len(wanted), dtype=np.uint8)
        if len(self.timestamps):
            hit = self.timestamps[idx] == wanted
            lab[hit] = self.labels[idx[hit]]
        return AnomalyLabelSeries(wanted, lab)


def align(ts: TimeSeries, policy: str = "outer-join", fill: str = "none") -> TimeSeries:
    """Put every univariate on one shared timestamp grid.

    policy ``outer-join`` uses the union of timestamps, ``inner-join`` the
    intersection. fill ``forward-fill`` carries the last observed value,
    ``linear`` interpolates inside each univariate's span, ``none`` leaves
    gaps. After filling, rows with any remaining missing value are dropped.
    Filling never extrapolates beyond a univariate's own span.
    """
    if policy not in ("outer-join", "inner-join"):
        raise ValueError(f"unknown align policy {policy!r}")
    if fill not in ("forward-fill", "linear", "none"):
        raise ValueError(f"unknown fill {fill!r}")

    if policy == "inner-join":
        grid = ts.univariates[0].timestamps
        for u in ts.univariates[1:]:
            grid = np.intersect1d(grid, u.timestamps)
        if len(grid) == 0:
            raise AlignmentError("inner-join produced an empty timestamp intersection")
    else:
        grid = ts.union_timestamps()

    columns = []
    for u in ts.univariates:
        col = np.full(len(grid), np.nan)
        pos = np.searchsorted(u.timestamps, grid)
        pos_c = np.clip(pos, 0, len(u) - 1)
        exact = u.timestamps[pos_c] == grid
        col[exact] = u.values[pos_c[exact]]
        if fill == "forward-fill":
            prev = np.searchsorted(u.timestamps, grid, side="right") - 1
            have_prev = prev >= 0
            fill_mask = ~exact & have_prev
            col[fill_mask] = u.values[prev[fill_mask]]
        elif fill == "linear":
            in_span = (grid >= u.timestamps[0]) & (grid <= u.timestamps[-1])
            fill_mask = ~exact & in_span
            if fill_mask.any():
                col[fill_mask] = np.interp(grid[fill_mask], u.timestamps, u.values)
        columns.append(col)

    matrix = np.column_stack(columns)
    keep = np.all(np.isfinite(matrix), axis=1)
    if not keep.any():
        raise AlignmentError("alignment left no complete rows")
    kept_grid = grid[keep]
    return TimeSeries(
        [UnivariateTimeSeries(u.name, kept_grid, matrix[keep, i]) for i, u in enumerate(ts.univariates)]
    )


def resample(u: UnivariateTimeSeries, granularity: int, agg: str = "mean") -> UnivariateTimeSeries:
    """Aggregate points into buckets of the given width in seconds.

    Output timestamps are the multiples of ``granularity`` that start each
    non-empty bucket; a point at t falls in the bucket starting at
    floor(t / granularity) * granularity.
    """
    if granularity <= 0:
        raise ValueError("granularity must be positive")
    if agg not in ("mean", "last"):
        raise ValueError(f"unknown aggregation {agg!r}")
    if len(u) == 0:
        return u
    buckets = (u.timestamps // granularity) * granularity
    # buckets is non-decreasing because timestamps are increasing
    starts = np.nonzero(np.concatenate([[True], np.diff(buckets) != 0]))[0]
    out_t = buckets[starts]
    if agg == "mean":
        sums = np.add.reduceat(u.values, starts)
        counts = np.diff(np.concatenate([starts, [len(u)]]))
        out_v = sums / counts
    else:
        ends = np.concatenate([starts[1:], [len(u)]]) - 1
        out_v = u.values[ends]
    return UnivariateTimeSeries(u.name, out_t, out_v)


def split_at(ts: TimeSeries, fraction: float) -> tuple[TimeSeries, TimeSeries]:
    """Chronological split at the timestamp sitting at ``fraction`` of the
    union of all timestamps; train keeps stamps <= the split point."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0, 1)")
    for u in ts.univariates:
        if len(u) < 2:
            raise SplitError(f"univariate {u.name!r} has fewer than 2 points")
    union = ts.union_timestamps()
    n = len(union)
    idx = max(0, math.ceil(fraction * n) - 1)
    if idx >= n - 1:
        raise SplitError("split point leaves an empty test side")
    cut = int(union[idx])
    train = [u.slice_time(end=cut) for u in ts.univariates]
    test = [u.slice_time(start=cut + 1) for u in ts.univariates]
    return TimeSeries(train), TimeSeries(test)
