"""Augmented Dickey-Fuller unit-root test (constant, no trend)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from ..errors import DegenerateVarianceError, TooShortError

MIN_LENGTH = 20

# MacKinnon (1994) response-surface coefficients, constant-only regression,
# one I(1) series.
_TAU_MAX = 2.74
_TAU_MIN = -18.83
_TAU_STAR = -1.61
_SMALL_P = (2.1659, 1.4412, 0.038269)
_LARGE_P = (1.7339, 0.93202, -0.12745, -0.010368)


@dataclass(frozen=True)
class ADFResult:
    statistic: float
    pvalue: float
    lags: int
    nobs: int


def schwert_lags(length: int) -> int:
    return int(math.floor(12.0 * (length / 100.0) ** 0.25))


def mackinnon_pvalue(stat: float) -> float:
    """Approximate asymptotic p-value of a constant-only DF t statistic."""
    if stat > _TAU_MAX:
        return 1.0
    if stat < _TAU_MIN:
        return 0.0
    coef = _SMALL_P if stat <= _TAU_STAR else _LARGE_P
    z = sum(c * stat**i for i, c in enumerate(coef))
    return float(norm.cdf(z))


def adf_test(series, lags: int | None = None) -> ADFResult:
    """Regress the differences on a constant, the lagged level and ``lags``
    lagged differences; the statistic is the t ratio of the level term.
    """
    x = np.asarray(getattr(series, "values", series), dtype=float).reshape(-1)
    n = len(x)
    if n < MIN_LENGTH:
        raise TooShortError(f"ADF needs at least {MIN_LENGTH} points, got {n}")
    if np.ptp(x) == 0.0:
        raise DegenerateVarianceError("ADF undefined for a constant series")
    p = schwert_lags(n) if lags is None else int(lags)

    dx = np.diff(x)
    # Noise-free periodic inputs make the lagged differences exactly
    # collinear; drop lags until the design has full rank.
    while True:
        nobs = len(dx) - p
        k = p + 2
        if nobs <= k:
            raise TooShortError(f"{nobs} usable observations for {k} ADF regressors")
        target = dx[p:]
        cols = [np.ones(nobs), x[p : p + nobs]]
        for i in range(1, p + 1):
            cols.append(dx[p - i : p - i + nobs])
        design = np.column_stack(cols)
        coef, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
        if rank == k:
            break
        if p == 0:
            raise DegenerateVarianceError("ADF regressors are collinear")
        p -= 1
    resid = target - design @ coef
    sigma2 = resid @ resid / (nobs - k)
    cov = sigma2 * np.linalg.inv(design.T @ design)
    se = math.sqrt(cov[1, 1])
    if se == 0.0:
        stat = -math.inf if coef[1] < 0 else math.inf
    else:
        stat = float(coef[1] / se)
    return ADFResult(statistic=stat, pvalue=mackinnon_pvalue(stat), lags=p, nobs=nobs)


def adf_pvalue(series) -> float:
    return adf_test(series).pvalue


def stationarity(series) -> bool:
    """True when the ADF p-value is at most 0.05."""
    return adf_pvalue(series) <= 0.05
