"""Monotone piecewise-cubic Hermite interpolation (Fritsch-Carlson slopes)."""

from __future__ import annotations

import numpy as np


class MonotoneCubicInterpolator:
    """Shape-preserving cubic interpolant through (x, y) knots.

    Knot x must be strictly increasing. When y is monotone the interpolant
    is monotone as well. Queries outside the knot range extrapolate linearly
    with the one-sided endpoint derivative.
    """

    def __init__(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if len(x) < 2:
            raise ValueError("need at least two knots")
        if np.any(np.diff(x) <= 0):
            raise ValueError("knot x must be strictly increasing")
        self.x = x
        self.y = y
        self.m = self._slopes(x, y)

    @staticmethod
    def _slopes(x, y):
        h = np.diff(x)
        d = np.diff(y) / h
        n = len(x)
        m = np.zeros(n)
        for i in range(1, n - 1):
            if d[i - 1] * d[i] <= 0:
                m[i] = 0.0
            else:
                w1 = 2 * h[i] + h[i - 1]
                w2 = h[i] + 2 * h[i - 1]
                m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i])
        m[0] = MonotoneCubicInterpolator._edge(h[0], h[1] if n > 2 else h[0], d[0], d[1] if n > 2 else d[0])
        m[-1] = MonotoneCubicInterpolator._edge(h[-1], h[-2] if n > 2 else h[-1], d[-1], d[-2] if n > 2 else d[-1])
        return m

    @staticmethod
    def _edge(h0, h1, d0, d1):
        # three-point estimate, limited to keep the end interval monotone
        m = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1)
        if np.sign(m) != np.sign(d0):
            return 0.0
        if np.sign(d0) != np.sign(d1) and abs(m) > 3 * abs(d0):
            return 3 * d0
        return m

    def __call__(self, xq):
        xq = np.asarray(xq, dtype=np.float64)
        scalar = xq.ndim == 0
        q = np.atleast_1d(xq)
        out = np.empty_like(q)

        below = q < self.x[0]
        above = q > self.x[-1]
        inside = ~(below | above)
        out[below] = self.y[0] + self.m[0] * (q[below] - self.x[0])
        out[above] = self.y[-1] + self.m[-1] * (q[above] - self.x[-1])

        if inside.any():
            qi = q[inside]
            seg = np.clip(np.searchsorted(self.x, qi, side="right") - 1, 0, len(self.x) - 2)
            h = self.x[seg + 1] - self.x[seg]
            t = (qi - self.x[seg]) / h
            t2 = t * t
            t3 = t2 * t
            h00 = 2 * t3 - 3 * t2 + 1
            h10 = t3 - 2 * t2 + t
            h01 = -2 * t3 + 3 * t2
            h11 = t3 - t2
            out[inside] = (
                h00 * self.y[seg]
                + h10 * h * self.m[seg]
                + h01 * self.y[seg + 1]
                + h11 * h * self.m[seg + 1]
            )
        return float(out[0]) if scalar else out
