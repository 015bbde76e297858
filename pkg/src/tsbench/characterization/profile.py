"""Six-score characteristic profiles, channel correlation, PFA selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..core import Dataset
from ..errors import (
    DegenerateFeaturesError,
    EmptyCollectionError,
    UnivariateError,
    ValidationError,
)
from .adf import adf_test
from .characteristics import (
    DEFAULT_THRESHOLDS,
    seasonality_strength,
    shifting_value,
    transition_value,
    trend_strength,
)
from .features import FEATURE_NAMES, feature_vector
from .stl import stl_decompose

FLAG_NAMES = ("seasonality", "trend", "shifting", "transition", "stationarity")


@dataclass(frozen=True)
class CharacteristicProfile:
    trend_strength: float
    seasonality_strength: float
    stationary: bool
    adf_pvalue: float
    shifting: float
    transition: float
    correlation: float | None = None

    def __post_init__(self):
        checks = {
            "trend_strength": (self.trend_strength, 0.0, 1.0),
            "seasonality_strength": (self.seasonality_strength, 0.0, 1.0),
            "adf_pvalue": (self.adf_pvalue, 0.0, 1.0),
            "shifting": (self.shifting, 0.0, 1.0),
            "transition": (self.transition, 0.0, 1.0 / 3.0),
        }
        for name, (v, lo, hi) in checks.items():
            if not lo <= v <= hi:
                raise ValidationError(f"{name}={v} outside [{lo}, {hi}]")
        if self.correlation is not None and not -1.0 < self.correlation <= 2.0:
            raise ValidationError(f"correlation={self.correlation} outside (-1, 2]")

    def scores(self) -> dict[str, float]:
        """The six scores keyed by characteristic name (stationarity as 0/1)."""
        out = {
            "trend": self.trend_strength,
            "seasonality": self.seasonality_strength,
            "stationarity": float(self.stationary),
            "shifting": self.shifting,
            "transition": self.transition,
        }
        if self.correlation is not None:
            out["correlation"] = self.correlation
        return out


def characterize_series(
    series, period: int | None = None, shift_thresholds: int = DEFAULT_THRESHOLDS
) -> CharacteristicProfile:
    if period is None:
        period = getattr(series, "seasonal_period", 1)
    x = np.asarray(getattr(series, "values", series), dtype=float)
    decomp = stl_decompose(x, period)
    adf = adf_test(x)
    return CharacteristicProfile(
        trend_strength=trend_strength(x, period, decomp),
        seasonality_strength=seasonality_strength(x, period, decomp),
        stationary=adf.pvalue <= 0.05,
        adf_pvalue=adf.pvalue,
        shifting=shifting_value(x, shift_thresholds),
        transition=transition_value(x),
    )


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    da = a - a.mean()
    db = b - b.mean()
    r = np.dot(da, db) / math.sqrt(np.dot(da, da) * np.dot(db, db))
    return float(min(1.0, max(-1.0, r)))


def _standardize_columns(features: np.ndarray) -> np.ndarray:
    # rows are channels; scale each feature across channels
    sd = features.std(axis=0)
    safe = np.where(sd == 0.0, 1.0, sd)
    return np.where(sd == 0.0, 0.0, (features - features.mean(axis=0)) / safe)


def correlation_score(
    dataset: Dataset | Sequence | np.ndarray,
    standardize: bool = False,
    features: np.ndarray | None = None,
) -> float:
    """Mean pairwise Pearson correlation of channel feature vectors plus
    ``1 / (1 + var)`` of those correlations.

    Pairs involving a constant feature vector are skipped. With
    ``standardize`` each feature is z-scored across channels first.
    """
    if features is None:
        features = channel_features(dataset)
    if features.shape[0] < 2:
        raise UnivariateError("correlation needs at least two channels")
    if standardize:
        features = _standardize_columns(features)
    coeffs = []
    n = features.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            a, b = features[i], features[j]
            if np.ptp(a) == 0.0 or np.ptp(b) == 0.0:
                continue
            coeffs.append(_pearson(a, b))
    if not coeffs:
        raise DegenerateFeaturesError("every channel pair has a constant feature vector")
    p = np.asarray(coeffs)
    return float(p.mean() + 1.0 / (1.0 + p.var()))


def _channel_arrays(dataset) -> list[np.ndarray]:
    if isinstance(dataset, Dataset):
        return [ch.values for ch in dataset.channels]
    arr = np.asarray(dataset, dtype=float)
    if arr.ndim == 1:
        return [arr]
    return [arr[:, j] for j in range(arr.shape[1])]


def channel_features(dataset) -> np.ndarray:
    """``(N, 22)`` matrix of per-channel feature vectors."""
    return np.vstack([feature_vector(x) for x in _channel_arrays(dataset)])


def characterize_dataset(
    dataset: Dataset,
    shift_thresholds: int = DEFAULT_THRESHOLDS,
    standardize_features: bool = False,
) -> tuple[CharacteristicProfile, list[CharacteristicProfile]]:
    """Profile every channel and summarise the dataset.

    The dataset profile averages the channel scores and ADF p-values;
    stationarity is re-derived from the averaged p-value.
    """
    per_channel = [
        characterize_series(ch, dataset.seasonal_period, shift_thresholds)
        for ch in dataset.channels
    ]
    corr = None
    if dataset.n_channels > 1:
        corr = correlation_score(dataset, standardize=standardize_features)

    def mean(attr: str) -> float:
        return float(np.mean([getattr(p, attr) for p in per_channel]))

    pval = mean("adf_pvalue")
    summary = CharacteristicProfile(
        trend_strength=mean("trend_strength"),
        seasonality_strength=mean("seasonality_strength"),
        stationary=pval <= 0.05,
        adf_pvalue=pval,
        shifting=mean("shifting"),
        transition=mean("transition"),
        correlation=corr,
    )
    return summary, per_channel


def pfa_select(collection: Sequence, threshold: float = 0.9) -> list[int]:
    """Indices of the highest-variance series covering ``threshold`` of the
    total variance, in selection order. At least one series is kept."""
    if len(collection) == 0:
        raise EmptyCollectionError("nothing to select from")
    if not 0.0 < threshold <= 1.0:
        raise ValidationError(f"threshold must lie in (0, 1], got {threshold}")
    variances = np.array([np.var(np.asarray(getattr(s, "values", s), dtype=float)) for s in collection])
    order = np.argsort(-variances, kind="stable")
    total = variances.sum()
    chosen = []
    cum = 0.0
    for i in order:
        chosen.append(int(i))
        cum += variances[i]
        if total == 0.0 or cum / total >= threshold:
            break
    return chosen


@dataclass(frozen=True)
class Thresholds:
    """Cut-offs for the yes/no characteristic flags (all inclusive)."""

    trend: float = 0.5
    seasonality: float = 0.5
    shifting: float = 0.5
    transition: float = 1.0 / 6.0

    @classmethod
    def from_collection(cls, profiles: Sequence[CharacteristicProfile], **overrides) -> "Thresholds":
        """Median split on shifting and transition across ``profiles``."""
        if not profiles:
            raise EmptyCollectionError("no profiles to derive thresholds from")
        base = cls(
            shifting=float(np.median([p.shifting for p in profiles])),
            transition=float(np.median([p.transition for p in profiles])),
        )
        return replace(base, **overrides)


def classify_characteristics(
    profile: CharacteristicProfile, thresholds: Thresholds | None = None
) -> dict[str, bool]:
    th = thresholds or Thresholds()
    return {
        "seasonality": profile.seasonality_strength >= th.seasonality,
        "trend": profile.trend_strength >= th.trend,
        "shifting": profile.shifting >= th.shifting,
        "transition": profile.transition >= th.transition,
        "stationarity": bool(profile.stationary),
    }


@dataclass
class ProfileRecord:
    """Export row: scores, feature vector and flags for one series."""

    name: str
    profile: CharacteristicProfile
    features: np.ndarray
    flags: dict[str, bool] = field(default_factory=dict)

    def as_row(self) -> dict[str, object]:
        p = self.profile
        row: dict[str, object] = {
            "series": self.name,
            "trend_strength": p.trend_strength,
            "seasonality_strength": p.seasonality_strength,
            "stationary": p.stationary,
            "adf_pvalue": p.adf_pvalue,
            "shifting": p.shifting,
            "transition": p.transition,
            "correlation": "" if p.correlation is None else p.correlation,
        }
        for name, v in zip(FEATURE_NAMES, self.features):
            row[f"f_{name}"] = float(v)
        for flag in FLAG_NAMES:
            row[f"is_{flag}"] = self.flags.get(flag, "")
        return row


def profile_records(
    dataset: Dataset,
    thresholds: Thresholds | None = None,
    shift_thresholds: int = DEFAULT_THRESHOLDS,
) -> list[ProfileRecord]:
    """Per-channel export rows; thresholds default to the median split over
    this dataset's channels."""
    _, per_channel = characterize_dataset(dataset, shift_thresholds)
    th = thresholds or Thresholds.from_collection(per_channel)
    return [
        ProfileRecord(
            name=name,
            profile=prof,
            features=feature_vector(ch),
            flags=classify_characteristics(prof, th),
        )
        for name, ch, prof in zip(dataset.channel_names, dataset.channels, per_channel)
    ]

