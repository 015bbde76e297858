"""Evaluation layer: fixed and rolling strategies over a single cell.

A cell is one (dataset, method, horizon, strategy) combination described by
an :class:`EvaluationPlan`. Every enumerated window is scored; execution
batching only groups work and never changes which windows count.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import forecasters
from .core import Dataset, SplitSpec, split_chronological
from .errors import (
    BenchmarkError,
    HorizonTooLongError,
    ValidationError,
)
from .forecasters import MethodSpec
from .metrics import METRIC_NAMES, MetricContext, average_over_windows, compute_metric

log = logging.getLogger(__name__)

STRATEGIES = ("fixed", "rolling")
NORMALIZATIONS = ("zscore", "none")
DEFAULT_ROLLING_LOOKBACK = 96


def fixed_lookback(horizon: int) -> int:
    """Look-back length paired with a horizon under the fixed strategy."""
    return max(1, int(round(1.25 * horizon)))


@dataclass(frozen=True, eq=False)
class EvaluationPlan:
    dataset: Dataset
    method: MethodSpec
    strategy: str
    horizon: int
    lookback: int | None = None
    stride: int = 1
    metrics: Sequence[str] = ("mae", "mse")
    normalization: str = "zscore"
    metric_scale: str = "normalized"
    retrain_each_window: bool | None = None
    batch_size: int = 1
    split: SplitSpec | None = None
    seasonal_period: int | None = None
    train_window: int | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValidationError(f"horizon must be a positive integer, got {self.horizon}")
        if self.stride < 1:
            raise ValidationError(f"stride must be >= 1, got {self.stride}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.lookback is not None and self.lookback < 1:
            raise ValidationError(f"lookback must be >= 1, got {self.lookback}")
        if self.normalization not in NORMALIZATIONS:
            raise ValidationError(f"normalization must be one of {NORMALIZATIONS}")
        if self.metric_scale not in ("normalized", "raw"):
            raise ValidationError("metric_scale must be 'normalized' or 'raw'")
        metrics = tuple(m.lower() for m in self.metrics)
        bad = [m for m in metrics if m not in METRIC_NAMES]
        if bad or not metrics:
            raise ValidationError(f"unknown metric(s) {bad}; expected among {METRIC_NAMES}")
        object.__setattr__(self, "metrics", metrics)
        forecasters.validate_spec(self.method)

    @property
    def period(self) -> int:
        return int(self.seasonal_period or self.dataset.seasonal_period)

    @property
    def retrain(self) -> bool:
        if self.retrain_each_window is not None:
            return bool(self.retrain_each_window)
        return forecasters.get_method(self.method.name).family == "statistical"

    @property
    def effective_lookback(self) -> int:
        if self.lookback is not None:
            return int(self.lookback)
        if self.strategy == "fixed":
            return fixed_lookback(self.horizon)
        return DEFAULT_ROLLING_LOOKBACK

    def test_start(self) -> int:
        if self.strategy == "fixed":
            return self.dataset.length - self.horizon
        return split_chronological(self.dataset, self.split)[2].start

    def validate(self) -> None:
        """Check the plan fits the dataset; raises before any work starts."""
        t_len = self.dataset.length
        if self.strategy == "fixed":
            if self.effective_lookback + self.horizon > t_len:
                raise HorizonTooLongError(
                    f"{self.dataset.name}: lookback {self.effective_lookback} + horizon "
                    f"{self.horizon} exceeds length {t_len}"
                )
            return
        _, _, test = split_chronological(self.dataset, self.split)
        if len(test) < self.horizon:
            raise HorizonTooLongError(
                f"{self.dataset.name}: horizon {self.horizon} exceeds test length {len(test)}"
            )
        if not self.retrain and test.start < self.effective_lookback:
            raise ValidationError(
                f"{self.dataset.name}: lookback {self.effective_lookback} exceeds "
                f"pre-test history {test.start}"
            )


@dataclass(frozen=True)
class Normalizer:
    mean: np.ndarray
    std: np.ndarray

    def apply(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) / self.std

    def invert(self, z) -> np.ndarray:
        return np.asarray(z, dtype=float) * self.std + self.mean


def fit_normalizer(data, train_range: range | slice) -> Normalizer:
    """Per-channel mean and population std over the training range only.
    Constant channels get std 1."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if isinstance(train_range, range):
        train_range = slice(train_range.start, train_range.stop)
    train = arr[train_range]
    if len(train) == 0:
        raise ValidationError("training range is empty")
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return Normalizer(mean=mean, std=std)


def identity_normalizer(n_channels: int) -> Normalizer:
    return Normalizer(mean=np.zeros(n_channels), std=np.ones(n_channels))


def enumerate_rolling_windows(test_length: int, horizon: int, stride: int = 1) -> list[int]:
    """Window offsets from the test start, in order.

    Offsets step by ``stride``; a final window ending exactly at the series
    end is appended when the stride skips it.

    >>> len(enumerate_rolling_windows(2880, 336))
    2545
    """
    if horizon < 1 or stride < 1:
        raise ValidationError("horizon and stride must be positive")
    last = test_length - horizon
    if last < 0:
        raise HorizonTooLongError(f"horizon {horizon} exceeds test length {test_length}")
    offsets = list(range(0, last + 1, stride))
    if offsets[-1] != last:
        offsets.append(last)
    return offsets


def batched(items: Sequence, size: int) -> Iterator[Sequence]:
    for i in range(0, len(items), size):
        yield items[i : i + size]


@dataclass
class MetricRow:
    dataset: str
    method: str
    horizon: int
    strategy: str
    metric: str
    value: float | None
    windows: int
    failures: int
    seconds: float = 0.0
    reason: str = ""

    @property
    def failed(self) -> bool:
        return self.value is None


@dataclass
class _Accumulator:
    values: dict[str, list[float]] = field(default_factory=dict)
    failures: dict[str, int] = field(default_factory=dict)
    reasons: dict[str, str] = field(default_factory=dict)

    def fail(self, metric: str, exc: Exception) -> None:
        self.failures[metric] = self.failures.get(metric, 0) + 1
        self.reasons.setdefault(metric, f"{type(exc).__name__}: {exc}")


def _score(plan: EvaluationPlan, acc: _Accumulator, pred_z, actual_z, norm: Normalizer, raw, end):
    pred_raw = norm.invert(pred_z)
    actual_raw = raw[end : end + plan.horizon]
    squeeze = raw.shape[1] == 1
    for name in plan.metrics:
        try:
            if name == "mase" or plan.metric_scale == "raw":
                f, y = pred_raw, actual_raw
            else:
                f, y = pred_z, actual_z
            train = raw[:end]
            if squeeze:
                f, y, train = f[:, 0], y[:, 0], train[:, 0]
            ctx = MetricContext(f, y, train_series=train, seasonal_period=plan.period)
            acc.values.setdefault(name, []).append(compute_metric(name, ctx))
        except BenchmarkError as exc:
            acc.fail(name, exc)


def _rows(plan: EvaluationPlan, acc: _Accumulator, n_windows: int, seconds: float) -> list[MetricRow]:
    rows = []
    for name in plan.metrics:
        vals = acc.values.get(name, [])
        fails = acc.failures.get(name, 0)
        value = average_over_windows(vals) if vals else None
        rows.append(
            MetricRow(
                dataset=plan.dataset.name,
                method=plan.method.label(),
                horizon=plan.horizon,
                strategy=plan.strategy,
                metric=name,
                value=value,
                windows=n_windows,
                failures=fails,
                seconds=seconds,
                reason=acc.reasons.get(name, "") if fails else "",
            )
        )
    return rows


def _fit_on(plan: EvaluationPlan, z: np.ndarray, end: int):
    start = 0 if plan.train_window is None else max(0, end - plan.train_window)
    return forecasters.fit(plan.method, z[start:end], plan.period, plan.horizon)


def _run_windows(plan: EvaluationPlan, ends: list[int], norm_range: range) -> list[MetricRow]:
    started = time.perf_counter()
    raw = plan.dataset.values()
    if plan.normalization == "zscore":
        norm = fit_normalizer(raw, norm_range)
    else:
        norm = identity_normalizer(raw.shape[1])
    z = norm.apply(raw)
    acc = _Accumulator()
    method = forecasters.get_method(plan.method.name)
    lookback = plan.effective_lookback

    shared = None
    if not plan.retrain:
        try:
            shared = _fit_on(plan, z, min(ends))
        except BenchmarkError as exc:
            for name in plan.metrics:
                acc.failures[name] = len(ends)
                acc.reasons[name] = f"{type(exc).__name__}: {exc}"
            return _rows(plan, acc, len(ends), time.perf_counter() - started)

    for batch in batched(ends, plan.batch_size):
        for end in batch:
            try:
                if plan.retrain:
                    model = _fit_on(plan, z, end)
                    history = z[:end]
                else:
                    model = shared
                    history = z[max(0, end - lookback) : end]
                pred = method.predict(model, history, plan.horizon)
            except BenchmarkError as exc:
                for name in plan.metrics:
                    acc.fail(name, exc)
                continue
            _score(plan, acc, pred, z[end : end + plan.horizon], norm, raw, end)
    seconds = time.perf_counter() - started
    log.debug("cell %s/%s/F=%d done in %.3fs", plan.dataset.name, plan.method.name, plan.horizon, seconds)
    return _rows(plan, acc, len(ends), seconds)


def run_fixed(plan: EvaluationPlan) -> list[MetricRow]:
    """Predict the last ``horizon`` points from everything before them."""
    if plan.strategy != "fixed":
        raise ValidationError("run_fixed needs a plan with strategy 'fixed'")
    plan.validate()
    end = plan.dataset.length - plan.horizon
    return _run_windows(plan, [end], range(0, end))


def rolling_ends(plan: EvaluationPlan) -> list[int]:
    _, _, test = split_chronological(plan.dataset, plan.split)
    offsets = enumerate_rolling_windows(len(test), plan.horizon, plan.stride)
    return [test.start + k for k in offsets]


def run_rolling(plan: EvaluationPlan) -> list[MetricRow]:
    """Score every rolling window over the test range and average.

    Normalisation statistics come from the training range; without
    retraining the model is fitted once on train + validation.
    """
    if plan.strategy != "rolling":
        raise ValidationError("run_rolling needs a plan with strategy 'rolling'")
    plan.validate()
    train, _, _ = split_chronological(plan.dataset, plan.split)
    return _run_windows(plan, rolling_ends(plan), train)


def run_plan(plan: EvaluationPlan) -> list[MetricRow]:
    return run_fixed(plan) if plan.strategy == "fixed" else run_rolling(plan)
