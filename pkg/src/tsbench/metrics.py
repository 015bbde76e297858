"""Point-forecast accuracy metrics.

All functions accept arrays of shape ``(h,)`` or ``(h, N)``; multivariate
errors are pooled over every (step, channel) cell except MASE, which is
scaled per channel and then averaged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import (
    DivisionByZeroError,
    LengthMismatchError,
    MetricError,
    MissingTrainSeriesError,
    NonFiniteError,
    ValidationError,
)

METRIC_NAMES = ("mae", "mape", "mse", "smape", "rmse", "wape", "msmape", "mase")
MSMAPE_EPSILON = 0.1


@dataclass(frozen=True)
class MetricContext:
    forecasts: np.ndarray
    actuals: np.ndarray
    train_series: np.ndarray | None = None
    seasonal_period: int = 1
    msmape_epsilon: float = MSMAPE_EPSILON

    def __post_init__(self):
        f = np.asarray(self.forecasts, dtype=float)
        y = np.asarray(self.actuals, dtype=float)
        if f.shape != y.shape:
            raise LengthMismatchError(f"forecast shape {f.shape} != actual shape {y.shape}")
        if f.size == 0:
            raise ValidationError("empty forecast")
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(y))):
            raise NonFiniteError("forecasts and actuals must be finite")
        object.__setattr__(self, "forecasts", f)
        object.__setattr__(self, "actuals", y)
        if self.train_series is not None:
            object.__setattr__(self, "train_series", np.asarray(self.train_series, dtype=float))


def mae(ctx: MetricContext) -> float:
    return float(np.mean(np.abs(ctx.forecasts - ctx.actuals)))


def mse(ctx: MetricContext) -> float:
    return float(np.mean((ctx.forecasts - ctx.actuals) ** 2))


def rmse(ctx: MetricContext) -> float:
    return math.sqrt(mse(ctx))


def mape(ctx: MetricContext) -> float:
    """Percent error against ``|Y|`` (sign-safe for negative actuals)."""
    y = np.abs(ctx.actuals)
    if np.any(y == 0.0):
        raise DivisionByZeroError("mape", "an actual value is zero")
    return float(np.mean(np.abs(ctx.actuals - ctx.forecasts) / y) * 100.0)


def smape(ctx: MetricContext) -> float:
    denom = (np.abs(ctx.actuals) + np.abs(ctx.forecasts)) / 2.0
    err = np.abs(ctx.forecasts - ctx.actuals)
    if np.any((denom == 0.0) & (err != 0.0)):
        raise DivisionByZeroError("smape", "|Y| + |F| is zero")
    # 0/0 cells are perfect forecasts of zero
    ratio = np.divide(err, denom, out=np.zeros_like(err), where=denom != 0.0)
    return float(np.mean(ratio) * 100.0)


def wape(ctx: MetricContext) -> float:
    total = np.sum(np.abs(ctx.actuals))
    if total == 0.0:
        raise DivisionByZeroError("wape", "sum of |Y| is zero")
    return float(np.sum(np.abs(ctx.actuals - ctx.forecasts)) / total)


def msmape(ctx: MetricContext) -> float:
    eps = ctx.msmape_epsilon
    denom = np.maximum(np.abs(ctx.actuals) + np.abs(ctx.forecasts) + eps, 0.5 + eps) / 2.0
    return float(np.mean(np.abs(ctx.forecasts - ctx.actuals) / denom) * 100.0)


def _mase_1d(f: np.ndarray, y: np.ndarray, train: np.ndarray, s: int) -> float:
    m = len(train)
    if not m > s >= 1:
        raise ValidationError(f"MASE needs train length {m} > seasonal period {s} >= 1")
    h = len(f)
    scale = h / (m - s) * np.sum(np.abs(train[s:] - train[:-s]))
    if scale == 0.0:
        raise DivisionByZeroError("mase", "seasonal-naive in-sample error is zero")
    return float(np.sum(np.abs(f - y)) / scale)


def mase(ctx: MetricContext) -> float:
    if ctx.train_series is None:
        raise MissingTrainSeriesError("mase requires the training series")
    f, y, train = ctx.forecasts, ctx.actuals, ctx.train_series
    s = int(ctx.seasonal_period)
    if f.ndim == 1:
        return _mase_1d(f, y, train.reshape(-1), s)
    if train.ndim != 2 or train.shape[1] != f.shape[1]:
        raise LengthMismatchError(f"train shape {train.shape} incompatible with forecast {f.shape}")
    return float(np.mean([_mase_1d(f[:, j], y[:, j], train[:, j], s) for j in range(f.shape[1])]))


METRICS: dict[str, Callable[[MetricContext], float]] = {
    "mae": mae,
    "mape": mape,
    "mse": mse,
    "smape": smape,
    "rmse": rmse,
    "wape": wape,
    "msmape": msmape,
    "mase": mase,
}


def compute_metric(name: str, ctx: MetricContext) -> float:
    key = name.lower()
    if key not in METRICS:
        raise MetricError(f"unknown metric {name!r}; expected one of {', '.join(METRIC_NAMES)}")
    return METRICS[key](ctx)


def average_over_windows(values: Iterable[float]) -> float:
    """Arithmetic mean of per-window values.

    Uses exactly rounded summation so the result does not depend on the
    order or grouping in which windows were scored.
    """
    vals = [float(v) for v in values]
    if not vals:
        raise ValidationError("no window values to average")
    if not all(math.isfinite(v) for v in vals):
        raise NonFiniteError("non-finite window metric")
    return math.fsum(vals) / len(vals)
