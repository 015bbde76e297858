"""Scalar characteristic scores of a single univariate series."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateVarianceError, TooShortAfterDownsampleError, TooShortError, ValidationError
from .stl import Decomposition, stl_decompose

DEFAULT_THRESHOLDS = 100
MIN_DOWNSAMPLED = 6


def _values(series) -> np.ndarray:
    return np.asarray(getattr(series, "values", series), dtype=float).reshape(-1)


def _explained(remainder: np.ndarray, rest: np.ndarray) -> float:
    denom = np.var(rest)
    if denom == 0.0:
        return 0.0
    return float(min(1.0, max(0.0, 1.0 - np.var(remainder) / denom)))


def trend_strength(series, period: int, decomposition: Decomposition | None = None) -> float:
    """``max(0, 1 - var(R) / var(X - S))`` from an STL fit; 0 for a constant
    series or when the deseasonalised series has no variance."""
    x = _values(series)
    if np.ptp(x) == 0.0:
        return 0.0
    d = decomposition or stl_decompose(x, period)
    return _explained(d.remainder, x - d.seasonal)


def seasonality_strength(series, period: int, decomposition: Decomposition | None = None) -> float:
    """``max(0, 1 - var(R) / var(X - T))`` from an STL fit."""
    x = _values(series)
    if np.ptp(x) == 0.0:
        return 0.0
    d = decomposition or stl_decompose(x, period)
    return _explained(d.remainder, x - d.trend)


def acf(series, max_lag: int) -> np.ndarray:
    """Autocorrelations for lags ``0..max_lag``.

    Each lag's autocovariance averages its own ``T - k`` products before
    dividing by the lag-0 autocovariance, so a perfectly alternating series
    has lag-1 autocorrelation of exactly -1.
    """
    x = _values(series)
    n = len(x)
    if n < 2:
        raise TooShortError(f"ACF needs at least 2 points, got {n}")
    if not 1 <= max_lag < n:
        raise ValidationError(f"max_lag must lie in [1, {n - 1}], got {max_lag}")
    d = x - x.mean()
    c0 = np.dot(d, d) / n
    if c0 == 0.0:
        raise DegenerateVarianceError("ACF undefined for a constant series")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = np.dot(d[:-k], d[k:]) / (n - k) / c0
    return out


def first_zero_acf(series) -> int:
    """Smallest lag whose autocorrelation is <= 0, capped at ``min(T-1, T//2)``."""
    x = _values(series)
    n = len(x)
    if n < 3:
        raise TooShortError(f"need at least 3 points, got {n}")
    cap = min(n - 1, n // 2)
    r = acf(x, cap)
    hits = np.flatnonzero(r[1:] <= 0.0)
    return int(hits[0] + 1) if hits.size else cap


def _zscore(x: np.ndarray) -> np.ndarray:
    sd = x.std()
    if sd == 0.0:
        raise DegenerateVarianceError("z-score undefined for a constant series")
    return (x - x.mean()) / sd


def shifting_value(series, m: int = DEFAULT_THRESHOLDS) -> float:
    """Threshold-median shift score in [0, 1].

    For ``m`` evenly spaced thresholds across the z-scored range, take the
    median 1-based time index of the points strictly above each threshold,
    min-max normalise those medians and return their median. Returns 0 when
    every median coincides.
    """
    x = _values(series)
    if len(x) < 3:
        raise TooShortError(f"need at least 3 points, got {len(x)}")
    if m < 2:
        raise ValidationError(f"m must be >= 2, got {m}")
    z = _zscore(x)
    lo, hi = z.min(), z.max()
    idx = np.arange(1, len(z) + 1)
    medians = []
    for i in range(1, m + 1):
        above = idx[z > lo + (i - 1) * (hi - lo) / m]
        if above.size:
            medians.append(np.median(above))
    med = np.asarray(medians)
    span = med.max() - med.min()
    if span == 0.0:
        return 0.0
    return float(np.median((med - med.min()) / span))


def rank_symbols(y: np.ndarray, alphabet: int = 3) -> np.ndarray:
    """Equiprobable symbols from ranks; ties keep index order."""
    n = len(y)
    rank = np.empty(n, dtype=np.int64)
    rank[np.argsort(y, kind="stable")] = np.arange(n)
    return np.minimum(rank * alphabet // n, alphabet - 1)


def transition_value(series) -> float:
    """Trace of the covariance of the 3-symbol transition matrix.

    The series is downsampled by its first ACF zero crossing, rank-binned
    into three symbols, and consecutive symbol pairs are counted into a 3x3
    matrix divided by the downsampled length. The covariance between the
    matrix columns uses population normalisation.
    """
    x = _values(series)
    tau = first_zero_acf(x)
    y = x[::tau]
    n = len(y)
    if n < MIN_DOWNSAMPLED:
        raise TooShortAfterDownsampleError(
            f"downsampled length {n} (stride {tau}) below {MIN_DOWNSAMPLED}"
        )
    sym = rank_symbols(y)
    counts = np.zeros((3, 3))
    np.add.at(counts, (sym[:-1], sym[1:]), 1.0)
    cov = np.cov(counts / n, rowvar=False, bias=True)
    return float(np.trace(cov))
