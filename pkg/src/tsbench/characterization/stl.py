"""Seasonal-trend decomposition by loess (STL).

Straight numpy port of Cleveland et al.'s inner loop with unit robustness
weights and jump 1 for every smoother. Interior loess fits reduce to a
fixed tricube convolution, so only the edges are fitted point by point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import TooShortError, ValidationError

SEASONAL_SPAN = 7
INNER_ITERATIONS = 2


@dataclass(frozen=True, eq=False)
class Decomposition:
    trend: np.ndarray
    seasonal: np.ndarray
    remainder: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.trend + self.seasonal + self.remainder


def _odd_at_least(x: float) -> int:
    k = int(math.ceil(x))
    return k if k % 2 else k + 1


def default_trend_span(period: int, seasonal_span: int = SEASONAL_SPAN) -> int:
    return _odd_at_least(1.5 * period / (1.0 - 1.5 / seasonal_span))


def nonseasonal_trend_span(length: int) -> int:
    # span 3 would reproduce the input exactly, so use a wider floor
    return _odd_at_least(max(7.0, 0.1 * length))


def _tricube(r: np.ndarray, h: float) -> np.ndarray:
    w = np.zeros_like(r)
    inside = r <= 0.999 * h
    near = r <= 0.001 * h
    w[inside] = (1.0 - (r[inside] / h) ** 3) ** 3
    w[near] = 1.0
    return w


def _fit_point(y: np.ndarray, xs: float, nleft: int, nright: int, span: int) -> float | None:
    """Local linear fit at 1-based position ``xs`` using points nleft..nright."""
    n = len(y)
    h = max(xs - nleft, nright - xs)
    if span > n:
        h += (span - n) // 2
    pos = np.arange(nleft, nright + 1, dtype=float)
    w = _tricube(np.abs(pos - xs), h)
    total = w.sum()
    if total <= 0.0:
        return None
    w /= total
    if h > 0:
        centre = np.dot(w, pos)
        spread = np.dot(w, (pos - centre) ** 2)
        if math.sqrt(spread) > 0.001 * (n - 1):
            slope = (xs - centre) / spread
            w = w * (slope * (pos - centre) + 1.0)
    return float(np.dot(w, y[nleft - 1 : nright]))


def loess_smooth(y: np.ndarray, span: int) -> np.ndarray:
    """Degree-1 loess with tricube weights evaluated at every index."""
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n < 2:
        return y.copy()
    if span < 3 or span % 2 == 0:
        raise ValidationError(f"loess span must be an odd integer >= 3, got {span}")
    out = np.empty(n)
    if span >= n:
        for i in range(1, n + 1):
            v = _fit_point(y, i, 1, n, span)
            out[i - 1] = y[i - 1] if v is None else v
        return out

    half = (span + 1) // 2
    h = half - 1
    kernel = _tricube(np.abs(np.arange(-h, h + 1, dtype=float)), float(h))
    kernel /= kernel.sum()
    # interior points: symmetric neighbourhood, linear term vanishes
    out[half - 1 : n - half + 1] = np.convolve(y, kernel, mode="valid")
    for i in range(1, half):
        v = _fit_point(y, i, 1, span, span)
        out[i - 1] = y[i - 1] if v is None else v
    for i in range(n - half + 2, n + 1):
        v = _fit_point(y, i, n - span + 1, n, span)
        out[i - 1] = y[i - 1] if v is None else v
    return out


def _smooth_subseries(y: np.ndarray, period: int, span: int) -> np.ndarray:
    """Loess-smooth each cycle-subseries and extend it one cycle at each end."""
    n = len(y)
    out = np.empty(n + 2 * period)
    for j in range(period):
        sub = y[j::period]
        k = len(sub)
        ext = np.empty(k + 2)
        ext[1 : k + 1] = loess_smooth(sub, span) if k > 1 else sub
        v = _fit_point(sub, 0.0, 1, min(span, k), span) if k > 1 else None
        ext[0] = ext[1] if v is None else v
        v = _fit_point(sub, float(k + 1), max(1, k - span + 1), k, span) if k > 1 else None
        ext[k + 1] = ext[k] if v is None else v
        out[j :: period][: k + 2] = ext
    return out


def _moving_average(x: np.ndarray, width: int) -> np.ndarray:
    return np.convolve(x, np.full(width, 1.0 / width), mode="valid")


def stl_decompose(
    series,
    period: int,
    seasonal_span: int = SEASONAL_SPAN,
    trend_span: int | None = None,
    low_pass_span: int | None = None,
    inner_iterations: int = INNER_ITERATIONS,
) -> Decomposition:
    """Additive STL decomposition of a univariate series.

    For ``period < 2`` there is no seasonal cycle: the trend is a loess fit
    of the whole series and the seasonal component is zero.

    Raises
    ------
    TooShortError
        If the series holds fewer than ``2 * period + 1`` points.
    """
    y = np.asarray(getattr(series, "values", series), dtype=float).reshape(-1)
    n = len(y)
    if period < 2:
        if n < 2:
            raise TooShortError(f"need at least 2 points, got {n}")
        trend = loess_smooth(y, trend_span or nonseasonal_trend_span(n))
        seasonal = np.zeros(n)
        return Decomposition(trend, seasonal, y - trend - seasonal)
    if n < 2 * period + 1:
        raise TooShortError(f"need at least {2 * period + 1} points for period {period}, got {n}")

    ns = seasonal_span
    nt = trend_span or default_trend_span(period, ns)
    nl = low_pass_span or _odd_at_least(period + 1)

    trend = np.zeros(n)
    seasonal = np.zeros(n)
    for _ in range(inner_iterations):
        cycle = _smooth_subseries(y - trend, period, ns)
        low = _moving_average(_moving_average(_moving_average(cycle, period), period), 3)
        low = loess_smooth(low, nl)
        seasonal = cycle[period : period + n] - low
        trend = loess_smooth(y - seasonal, nt)
    return Decomposition(trend, seasonal, y - trend - seasonal)
