"""Seasonal ARIMA fitted by conditional sum of squares.

Estimation minimizes the conditional sum of squared innovations: the
residual recursion starts after the longest autoregressive lag with earlier
innovations set to zero. Pure-AR models solve exactly by least squares;
models with moving-average terms are optimized by Nelder-Mead. Model
quality is scored as aic = n * ln(sse / n) + 2 * (n_coefficients + 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter

from ..data import TimeSeries, UnivariateTimeSeries
from ..errors import FitError, HistoryError
from .base import Forecaster, ForecasterConfig, future_stamps

_BIG = 1e12


@dataclass
class SarimaOrders:
    """(p, d, q) x (P, D, Q)_m order specification."""

    p: int = 0
    d: int = 0
    q: int = 0
    P: int = 0
    D: int = 0
    Q: int = 0
    m: int = 1

    def __post_init__(self):
        if min(self.p, self.d, self.q, self.P, self.D, self.Q) < 0 or self.m < 1:
            raise ValueError("orders must be non-negative and m >= 1")
        if self.m == 1 and (self.P or self.D or self.Q):
            raise ValueError("seasonal orders require m > 1")

    @property
    def n_coefficients(self) -> int:
        return self.p + self.q + self.P + self.Q

    def min_length(self) -> int:
        return self.p + self.d + self.q + self.m * (self.P + self.D + self.Q) + 2

    def as_tuple(self):
        return (self.p, self.d, self.q, self.P, self.D, self.Q, self.m)


@dataclass
class SarimaParams:
    """Fitted coefficients plus fit diagnostics."""

    orders: SarimaOrders
    ar: np.ndarray
    ma: np.ndarray
    sar: np.ndarray
    sma: np.ndarray
    intercept: float | None
    sigma2: float
    sse: float
    n_obs: int
    aic: float
    converged: bool = True

    def n_params(self) -> int:
        return self.orders.n_coefficients + (1 if self.intercept is not None else 0)


def seasonal_then_regular_levels(x: np.ndarray, d: int, D: int, m: int) -> list[np.ndarray]:
    """All differencing stages: original, D seasonal diffs, then d regular."""
    levels = [np.asarray(x, dtype=np.float64)]
    for _ in range(D):
        cur = levels[-1]
        if len(cur) <= m:
            raise HistoryError("series too short for seasonal differencing")
        levels.append(cur[m:] - cur[:-m])
    for _ in range(d):
        cur = levels[-1]
        if len(cur) <= 1:
            raise HistoryError("series too short for differencing")
        levels.append(cur[1:] - cur[:-1])
    return levels


def _expand_poly(coeffs: np.ndarray, s_coeffs: np.ndarray, m: int, sign: float) -> np.ndarray:
    """Multiply (1 + sign*sum c_i B^i) by (1 + sign*sum C_I B^(I*m)).

    Returns the full polynomial coefficient array, index = lag, entry 0 = 1.
    """
    a = np.concatenate([[1.0], sign * np.asarray(coeffs, dtype=np.float64)])
    b = np.zeros(m * len(s_coeffs) + 1)
    b[0] = 1.0
    for i, c in enumerate(s_coeffs, start=1):
        b[i * m] = sign * c
    return np.convolve(a, b)


def expanded_ar(ar, sar, m) -> np.ndarray:
    """AR lag weights g with w_t = c + sum g_l w_{t-l} + ... from the
    multiplicative polynomial (1 - phi(B))(1 - Phi(B^m))."""
    poly = _expand_poly(ar, sar, m, sign=-1.0)
    return -poly[1:]


def expanded_ma(ma, sma, m) -> np.ndarray:
    """MA lag weights h with eps contribution sum h_l eps_{t-l}."""
    poly = _expand_poly(ma, sma, m, sign=+1.0)
    return poly[1:]


def css_innovations(w: np.ndarray, ar_w: np.ndarray, ma_w: np.ndarray, c: float) -> np.ndarray:
    """Innovations for t >= len(ar_w), earlier innovations fixed at zero."""
    n = len(w)
    t0 = len(ar_w)
    if n - t0 < 1:
        raise FitError("not enough observations after the autoregressive burn-in")
    rhs = w[t0:] - c
    if t0 > 0:
        kern = np.concatenate([[0.0], ar_w])
        conv = np.convolve(w, kern)[:n]
        rhs = rhs - conv[t0:]
    if len(ma_w) == 0:
        return rhs
    return lfilter([1.0], np.concatenate([[1.0], ma_w]), rhs)


def _aic(sse: float, n: int, k: int) -> float:
    return n * np.log(max(sse, 1e-300) / n) + 2.0 * (k + 1)


def _ols_ar_fit(w: np.ndarray, orders: SarimaOrders, intercept: bool):
    """Exact conditional least squares for models linear in the AR weights.

    Valid when there are no MA terms and at most one of (p, P) is non-zero,
    so the expanded polynomial has no cross products.
    """
    lags = list(range(1, orders.p + 1)) + [orders.m * i for i in range(1, orders.P + 1)]
    t0 = max(lags) if lags else 0
    n = len(w)
    cols = [w[t0 - lag : n - lag] for lag in lags]
    if intercept:
        cols.append(np.ones(n - t0))
    if not cols:
        return np.array([]), np.array([]), None, w.copy()
    X = np.column_stack(cols)
    y = w[t0:]
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    ar = beta[: orders.p]
    sar = beta[orders.p : orders.p + orders.P]
    c = float(beta[-1]) if intercept else None
    return ar, sar, c, resid


def fit_sarima(
    u: UnivariateTimeSeries,
    orders: SarimaOrders,
    include_intercept: bool | None = None,
    maxiter: int = 2000,
    tol: float = 1e-8,
) -> SarimaParams:
    """Fit by conditional sum of squares.

    ``include_intercept=None`` applies the usual rule: a constant is kept
    while the total differencing d + D is at most 1. A fit that runs out of
    iterations is returned with ``converged=False``; only a non-finite
    objective raises :class:`FitError` (carrying best-so-far parameters).
    """
    if len(u) < orders.min_length():
        raise FitError(f"series of length {len(u)} too short for orders {orders.as_tuple()}")
    if include_intercept is None:
        include_intercept = orders.d + orders.D <= 1

    levels = seasonal_then_regular_levels(u.values, orders.d, orders.D, orders.m)
    w = levels[-1]
    p, q, P, Q, m = orders.p, orders.q, orders.P, orders.Q, orders.m
    t0 = p + m * P
    n_eff = len(w) - t0
    k = orders.n_coefficients + (1 if include_intercept else 0)
    if n_eff <= k + 1:
        raise FitError(f"only {n_eff} usable observations for {k} coefficients")

    linear_ar = q == 0 and Q == 0 and (p == 0 or P == 0)
    if linear_ar:
        ar, sar, c, resid = _ols_ar_fit(w, orders, include_intercept)
        sse = float(resid @ resid)
        sigma2 = sse / n_eff
        return SarimaParams(
            orders, np.asarray(ar), np.array([]), np.asarray(sar), np.array([]),
            c, sigma2, sse, n_eff, _aic(sse, n_eff, k), converged=True,
        )

    # Nelder-Mead over [intercept?, ar, ma, sar, sma]; AR weights start from
    # the additive least-squares approximation, MA weights near zero.
    ar0, sar0, c0, _ = _ols_ar_fit(w, SarimaOrders(p=p, P=P if p == 0 else 0, m=m), include_intercept)
    x0 = []
    if include_intercept:
        x0.append(c0 if c0 is not None else float(np.mean(w)))
    x0 += list(ar0) + [0.0] * (p - len(ar0))
    x0 += [0.05] * q
    x0 += list(sar0) + [0.0] * (P - len(sar0)) if p == 0 else [0.05] * P
    x0 += [0.05] * Q
    x0 = np.asarray(x0, dtype=np.float64)

    def unpack(x):
        i = 0
        c = 0.0
        if include_intercept:
            c = x[0]
            i = 1
        ar = x[i : i + p]; i += p
        ma = x[i : i + q]; i += q
        sar = x[i : i + P]; i += P
        sma = x[i : i + Q]
        return c, ar, ma, sar, sma

    def objective(x):
        c, ar, ma, sar, sma = unpack(x)
        with np.errstate(all="ignore"):
            eps = css_innovations(w, expanded_ar(ar, sar, m), expanded_ma(ma, sma, m), c)
            sse = float(eps @ eps)
        if not np.isfinite(sse):
            return _BIG * (1.0 + float(np.linalg.norm(x)))
        return sse

    res = minimize(
        objective, x0, method="Nelder-Mead",
        options={"maxiter": maxiter, "maxfev": 4 * maxiter, "xatol": tol * 10, "fatol": tol, "adaptive": len(x0) > 4},
    )
    best = res.x if np.isfinite(res.fun) and res.fun < _BIG else x0
    c, ar, ma, sar, sma = unpack(best)
    eps = css_innovations(w, expanded_ar(ar, sar, m), expanded_ma(ma, sma, m), c)
    sse = float(eps @ eps)
    params = SarimaParams(
        orders, np.asarray(ar).copy(), np.asarray(ma).copy(), np.asarray(sar).copy(), np.asarray(sma).copy(),
        c if include_intercept else None, sse / n_eff, sse, n_eff, _aic(sse, n_eff, k),
        converged=bool(res.success),
    )
    if not np.isfinite(sse):
        raise FitError("optimizer produced a non-finite objective", params=params)
    return params


def _history_state(params: SarimaParams, values: np.ndarray):
    o = params.orders
    levels = seasonal_then_regular_levels(values, o.d, o.D, o.m)
    w = levels[-1]
    ar_w = expanded_ar(params.ar, params.sar, o.m)
    ma_w = expanded_ma(params.ma, params.sma, o.m)
    c = params.intercept if params.intercept is not None else 0.0
    if len(w) <= len(ar_w):
        raise HistoryError(f"history too short: need more than {len(ar_w)} differenced observations")
    eps_tail = css_innovations(w, ar_w, ma_w, c)
    eps = np.concatenate([np.zeros(len(ar_w)), eps_tail])
    return levels, w, eps, ar_w, ma_w, c


def psi_weights(params: SarimaParams, horizon: int) -> np.ndarray:
    """MA-infinity weights of the fully integrated model, psi_0 = 1."""
    o = params.orders
    ar_poly = _expand_poly(params.ar, params.sar, o.m, sign=-1.0)
    for _ in range(o.d):
        ar_poly = np.convolve(ar_poly, [1.0, -1.0])
    for _ in range(o.D):
        seas = np.zeros(o.m + 1)
        seas[0], seas[-1] = 1.0, -1.0
        ar_poly = np.convolve(ar_poly, seas)
    g = -ar_poly[1:]
    ma_w = expanded_ma(params.ma, params.sma, o.m)
    psi = np.zeros(horizon)
    psi[0] = 1.0
    for j in range(1, horizon):
        acc = ma_w[j - 1] if j - 1 < len(ma_w) else 0.0
        upto = min(j, len(g))
        for i in range(1, upto + 1):
            acc += g[i - 1] * psi[j - i]
        psi[j] = acc
    return psi


def forecast_sarima(params: SarimaParams, history: UnivariateTimeSeries, horizon: int):
    """Iterated one-step forecasts with future innovations set to zero.

    Differencing is inverted against the history tail; standard errors come
    from sigma^2 with psi-weight accumulation.
    """
    levels, w, eps, ar_w, ma_w, c = _history_state(params, history.values)
    o = params.orders
    w_ext = list(w)
    e_ext = list(eps)
    out = []
    for _ in range(horizon):
        acc = c
        for l, g in enumerate(ar_w, start=1):
            acc += g * w_ext[-l]
        for l, h in enumerate(ma_w, start=1):
            acc += h * e_ext[-l]
        w_ext.append(acc)
        e_ext.append(0.0)
        out.append(acc)
    pred = np.asarray(out)

    # invert regular differencing, deepest level first, then seasonal
    for j in range(len(levels) - 2, o.D - 1, -1):
        pred = np.cumsum(pred) + levels[j][-1]
    for j in range(o.D - 1, -1, -1):
        base = levels[j]
        y = np.empty(horizon)
        for i in range(horizon):
            y[i] = pred[i] + (base[i - o.m] if i < o.m else y[i - o.m])
        pred = y

    psi = psi_weights(params, horizon)
    se = np.sqrt(np.maximum(params.sigma2, 1e-24) * np.cumsum(psi**2))
    return pred, np.maximum(se, 1e-12)


def one_step_sarima(params: SarimaParams, u: UnivariateTimeSeries):
    """One-step-ahead predictions over ``u`` conditioned on true history."""
    levels, w, eps, ar_w, ma_w, c = _history_state(params, u.values)
    o = params.orders
    t0 = len(ar_w)
    yhat_w = w[t0:] - eps[t0:]
    # climb back up the differencing stack with true lagged values
    offset = t0
    pred = yhat_w
    for j in range(len(levels) - 2, -1, -1):
        lag = o.m if j < o.D else 1
        base = levels[j]
        pred = pred + base[offset : offset + len(pred)]
        offset += lag
    t = u.timestamps[offset - 0 :][-len(pred) :] if len(pred) else u.timestamps[:0]
    se = np.full(len(pred), max(np.sqrt(params.sigma2), 1e-12))
    return t, pred, se


class Sarima(Forecaster):
    """Forecaster wrapper around the CSS fit and recursions."""

    def __init__(self, orders: SarimaOrders | None = None, config: ForecasterConfig | None = None,
                 include_intercept: bool | None = None, maxiter: int = 2000, tol: float = 1e-8):
        super().__init__(config)
        self.orders = orders or SarimaOrders(p=1, d=0, q=0)
        self.include_intercept = include_intercept
        self.maxiter = maxiter
        self.tol = tol
        self.params: SarimaParams | None = None

    def _target_uni(self, ts: TimeSeries) -> UnivariateTimeSeries:
        return ts.univariates[self.config.target_index]

    def _fit(self, ts):
        self.params = fit_sarima(
            self._target_uni(ts), self.orders, self.include_intercept, self.maxiter, self.tol
        )

    def _predict(self, history, horizon):
        return forecast_sarima(self.params, self._target_uni(history), horizon)

    def _predict_one_step(self, ts):
        return one_step_sarima(self.params, self._target_uni(ts))

    def default_stamps(self, horizon: int) -> np.ndarray:
        return future_stamps(self._target_uni(self._train_original), horizon)
