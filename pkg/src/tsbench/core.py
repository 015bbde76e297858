"""Domain types shared by every layer: series, datasets, splits, windows."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptySeriesError,
    LengthMismatchError,
    NonFiniteError,
    NonMonotoneTimestampsError,
    TooShortError,
    ValidationError,
)

FREQUENCIES = ("yearly", "quarterly", "monthly", "weekly", "daily", "hourly", "other")

DEFAULT_PERIODS = {
    "yearly": 1,
    "quarterly": 4,
    "monthly": 12,
    "weekly": 52,
    "daily": 7,
    "hourly": 24,
    "other": 1,
}

# Forecast horizons used for univariate series of each frequency.
DEFAULT_HORIZONS = {
    "yearly": 6,
    "quarterly": 8,
    "monthly": 18,
    "weekly": 13,
    "daily": 14,
    "hourly": 48,
    "other": 8,
}


def default_period(frequency_label: str, length: int | None = None) -> int:
    """Seasonal period conventionally associated with ``frequency_label``.

    When ``length`` is given the period is capped below it.
    """
    if frequency_label not in DEFAULT_PERIODS:
        raise ValidationError(f"unknown frequency label {frequency_label!r}")
    period = DEFAULT_PERIODS[frequency_label]
    if length is not None and period >= length:
        period = max(1, length - 1)
    return period


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """One channel of values plus frequency metadata.

    Instances are built through :func:`validate_series`, which enforces
    finiteness, non-emptiness and timestamp monotonicity.
    """

    values: np.ndarray
    timestamps: np.ndarray | None = None
    seasonal_period: int = 1
    frequency_label: str = "other"
    name: str = ""

    def __len__(self) -> int:
        return len(self.values)

    def same_as(self, other: "TimeSeries") -> bool:
        if not isinstance(other, TimeSeries):
            return False
        if (self.timestamps is None) != (other.timestamps is None):
            return False
        ts_equal = self.timestamps is None or np.array_equal(self.timestamps, other.timestamps)
        return (
            np.array_equal(self.values, other.values)
            and ts_equal
            and self.seasonal_period == other.seasonal_period
            and self.frequency_label == other.frequency_label
            and self.name == other.name
        )


def validate_series(
    values: Iterable[float] | np.ndarray | TimeSeries,
    timestamps: Sequence | np.ndarray | None = None,
    seasonal_period: int | None = None,
    frequency_label: str = "other",
    name: str = "",
) -> TimeSeries:
    """Check raw values and build an immutable :class:`TimeSeries`.

    Passing an existing ``TimeSeries`` re-validates it and returns an equal
    copy, so the operation is idempotent.
    """
    if isinstance(values, TimeSeries):
        ts = values
        return validate_series(
            ts.values, ts.timestamps, ts.seasonal_period, ts.frequency_label, ts.name
        )

    arr = np.array(values, dtype=float).reshape(-1)
    if arr.size == 0:
        raise EmptySeriesError("series is empty")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise NonFiniteError(f"non-finite value at index {bad}")

    stamps = None
    if timestamps is not None:
        stamps = np.array(timestamps)
        if stamps.ndim != 1 or len(stamps) != len(arr):
            raise LengthMismatchError(
                f"{len(stamps)} timestamps for {len(arr)} values"
            )
        if len(stamps) > 1 and not np.all(stamps[1:] > stamps[:-1]):
            raise NonMonotoneTimestampsError("timestamps must be strictly increasing")
        stamps = _frozen(stamps.copy())

    if frequency_label not in DEFAULT_PERIODS:
        raise ValidationError(f"unknown frequency label {frequency_label!r}")
    if seasonal_period is None:
        seasonal_period = default_period(frequency_label, len(arr))
    if int(seasonal_period) != seasonal_period or seasonal_period < 1:
        raise ValidationError(f"seasonal_period must be a positive integer, got {seasonal_period}")

    return TimeSeries(
        values=_frozen(arr),
        timestamps=stamps,
        seasonal_period=int(seasonal_period),
        frequency_label=frequency_label,
        name=name,
    )


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x).limit_denominator(10**6)


@dataclass(frozen=True)
class SplitSpec:
    """Chronological train/validation/test proportions (exact rationals)."""

    train_fraction: Fraction
    val_fraction: Fraction
    test_fraction: Fraction

    def __post_init__(self):
        fracs = [_as_fraction(f) for f in (self.train_fraction, self.val_fraction, self.test_fraction)]
        for name, f in zip(("train", "val", "test"), fracs):
            if not 0 < f < 1:
                raise ValidationError(f"{name} fraction {f} outside (0, 1)")
        if sum(fracs) != 1:
            raise ValidationError(f"split fractions sum to {sum(fracs)}, not 1")
        object.__setattr__(self, "train_fraction", fracs[0])
        object.__setattr__(self, "val_fraction", fracs[1])
        object.__setattr__(self, "test_fraction", fracs[2])

    @classmethod
    def from_ratio(cls, ratio: str | Sequence) -> "SplitSpec":
        """Build from ``"7:1:2"`` or a 3-sequence of parts / fractions."""
        if isinstance(ratio, SplitSpec):
            return ratio
        if isinstance(ratio, str):
            parts = ratio.split(":")
        else:
            parts = list(ratio)
        if len(parts) != 3:
            raise ValidationError(f"split needs three parts, got {ratio!r}")
        try:
            parts = [_as_fraction(p) for p in parts]
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise ValidationError(f"bad split {ratio!r}: {exc}") from None
        total = sum(parts)
        if total <= 0:
            raise ValidationError(f"bad split {ratio!r}")
        return cls(*(p / total for p in parts))

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction]:
        return self.train_fraction, self.val_fraction, self.test_fraction

    def __str__(self) -> str:
        return ":".join(str(f) for f in self.as_tuple())


DEFAULT_SPLIT = SplitSpec(Fraction(7, 10), Fraction(1, 10), Fraction(2, 10))


@dataclass(frozen=True, eq=False)
class Dataset:
    name: str
    channels: tuple[TimeSeries, ...]
    domain_tag: str = ""
    split: SplitSpec = DEFAULT_SPLIT

    def __post_init__(self):
        chans = tuple(self.channels)
        if not chans:
            raise ValidationError("dataset needs at least one channel")
        n = len(chans[0])
        for ch in chans[1:]:
            if len(ch) != n:
                raise LengthMismatchError(
                    f"channel {ch.name!r} has length {len(ch)}, expected {n}"
                )
            a, b = chans[0].timestamps, ch.timestamps
            if (a is None) != (b is None) or (a is not None and not np.array_equal(a, b)):
                raise LengthMismatchError(f"channel {ch.name!r} timestamps differ")
        object.__setattr__(self, "channels", chans)

    @property
    def length(self) -> int:
        return len(self.channels[0])

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    @property
    def channel_names(self) -> list[str]:
        return [ch.name or f"ch{i}" for i, ch in enumerate(self.channels)]

    @property
    def seasonal_period(self) -> int:
        return self.channels[0].seasonal_period

    @property
    def timestamps(self) -> np.ndarray | None:
        return self.channels[0].timestamps

    def values(self) -> np.ndarray:
        """Return a fresh ``(T, N)`` float array."""
        return np.column_stack([ch.values for ch in self.channels])

    @classmethod
    def from_array(
        cls,
        name: str,
        data,
        seasonal_period: int | None = None,
        frequency_label: str = "other",
        channel_names: Sequence[str] | None = None,
        timestamps=None,
        domain_tag: str = "",
        split: SplitSpec | str = DEFAULT_SPLIT,
    ) -> "Dataset":
        arr = np.asarray(data, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        names = list(channel_names) if channel_names is not None else [f"ch{i}" for i in range(arr.shape[1])]
        if len(names) != arr.shape[1]:
            raise LengthMismatchError(f"{len(names)} names for {arr.shape[1]} channels")
        chans = tuple(
            validate_series(arr[:, j], timestamps, seasonal_period, frequency_label, names[j])
            for j in range(arr.shape[1])
        )
        if isinstance(split, str):
            split = SplitSpec.from_ratio(split)
        return cls(name=name, channels=chans, domain_tag=domain_tag, split=split)


def split_chronological(
    dataset: Dataset | int, split_spec: SplitSpec | None = None
) -> tuple[range, range, range]:
    """Partition ``[0, T)`` into train, validation and test index ranges.

    Boundaries are ``floor(cumulative_fraction * T)``; any remainder falls to
    the test range.

    >>> split_chronological(11, SplitSpec.from_ratio("7:1:2"))
    (range(0, 7), range(7, 8), range(8, 11))
    """
    if isinstance(dataset, Dataset):
        length = dataset.length
        spec = split_spec or dataset.split
    else:
        length = int(dataset)
        spec = split_spec or DEFAULT_SPLIT
    if length < 3:
        raise TooShortError(f"need at least 3 points to split, got {length}")
    train_end = math.floor(spec.train_fraction * length)
    val_end = math.floor((spec.train_fraction + spec.val_fraction) * length)
    ranges = (range(0, train_end), range(train_end, val_end), range(val_end, length))
    for label, r in zip(("train", "validation", "test"), ranges):
        if len(r) == 0:
            raise TooShortError(f"{label} range is empty for T={length} and split {spec}")
    return ranges


@dataclass(frozen=True)
class ForecastWindow:
    history_end: int
    horizon: int
    lookback: int

    def __post_init__(self):
        if self.horizon < 1:
            raise ValidationError(f"horizon must be positive, got {self.horizon}")
        if self.lookback < 1:
            raise ValidationError(f"lookback must be positive, got {self.lookback}")
        if self.history_end < self.lookback:
            raise ValidationError(
                f"history_end {self.history_end} shorter than lookback {self.lookback}"
            )

    def check_fits(self, length: int) -> None:
        if self.history_end + self.horizon > length:
            raise ValidationError(
                f"window ending at {self.history_end + self.horizon} exceeds series length {length}"
            )

    @property
    def target(self) -> slice:
        return slice(self.history_end, self.history_end + self.horizon)


__all__ = [
    "DEFAULT_HORIZONS",
    "DEFAULT_PERIODS",
    "DEFAULT_SPLIT",
    "FREQUENCIES",
    "Dataset",
    "ForecastWindow",
    "SplitSpec",
    "TimeSeries",
    "default_period",
    "split_chronological",
    "validate_series",
]

