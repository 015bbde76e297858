"""Fixed 22-entry feature vector used to compare channels.

The set follows the catch22 naming where a feature has a catch22
counterpart; implementations are simplified and make no claim of numeric
parity with the reference C code. Order (index: name):

 0 DN_Mean                          mean of the raw values
 1 DN_Variance                      population variance of the raw values
 2 CO_ac_lag1                       lag-1 autocorrelation
 3 CO_FirstZero_ac                  first lag with autocorrelation <= 0
 4 SB_TransitionMatrix_3ac_trcov    transition_value (0 if too short)
 5 CO_f1ecac                        first 1/e crossing of the ACF, interpolated
 6 CO_FirstMin_ac                   first local minimum of the ACF
 7 DN_HistogramMode_5               mode of a 5-bin histogram of z-scores
 8 DN_HistogramMode_10              mode of a 10-bin histogram of z-scores
 9 DN_OutlierInclude_p_001_mdrmd    timing of positive excursions
10 DN_OutlierInclude_n_001_mdrmd    timing of negative excursions
11 SB_BinaryStats_mean_longstretch1 longest run above the mean
12 SB_BinaryStats_diff_longstretch0 longest run of decreases
13 SB_MotifThree_quantile_hh        entropy of 2-letter words, 3 rank symbols
14 CO_trev_1_num                    mean cubed lag-1 increment of z-scores
15 MD_hrv_classic_pnn40             share of |increments| of z-scores > 0.04
16 CO_HistogramAMI_even_2_5         lag-2 mutual information, 5 even bins
17 IN_AutoMutualInfoStats_40_gaussian_fmmi  first minimum of Gaussian AMI
18 PD_PeriodicityWang_th0_01        first ACF peak above 0.01 after a zero
19 FC_LocalSimple_mean1_tauresrat   first-zero ratio, residuals of naive fit
20 FC_LocalSimple_mean3_stderr      std of residuals of a 3-mean forecast
21 SP_Summaries_welch_rect_area_5_1 share of spectral power in lowest fifth

A constant input maps to the all-zero vector.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import TooShortError, TooShortAfterDownsampleError
from .characteristics import acf, first_zero_acf, rank_symbols, transition_value

FEATURE_NAMES = (
    "DN_Mean",
    "DN_Variance",
    "CO_ac_lag1",
    "CO_FirstZero_ac",
    "SB_TransitionMatrix_3ac_trcov",
    "CO_f1ecac",
    "CO_FirstMin_ac",
    "DN_HistogramMode_5",
    "DN_HistogramMode_10",
    "DN_OutlierInclude_p_001_mdrmd",
    "DN_OutlierInclude_n_001_mdrmd",
    "SB_BinaryStats_mean_longstretch1",
    "SB_BinaryStats_diff_longstretch0",
    "SB_MotifThree_quantile_hh",
    "CO_trev_1_num",
    "MD_hrv_classic_pnn40",
    "CO_HistogramAMI_even_2_5",
    "IN_AutoMutualInfoStats_40_gaussian_fmmi",
    "PD_PeriodicityWang_th0_01",
    "FC_LocalSimple_mean1_tauresrat",
    "FC_LocalSimple_mean3_stderr",
    "SP_Summaries_welch_rect_area_5_1",
)
N_FEATURES = len(FEATURE_NAMES)
TRANSITION_INDEX = FEATURE_NAMES.index("SB_TransitionMatrix_3ac_trcov")
MIN_LENGTH = 20


def _histogram_mode(z: np.ndarray, bins: int) -> float:
    counts, edges = np.histogram(z, bins=bins)
    k = int(np.argmax(counts))
    return float((edges[k] + edges[k + 1]) / 2)


def _outlier_timing(z: np.ndarray, step: float = 0.01) -> float:
    n = len(z)
    idx = np.arange(1, n + 1)
    stats = []
    thr = 0.0
    top = z.max()
    while thr <= top:
        hit = idx[z >= thr]
        if hit.size < max(2, 0.02 * n):
            break
        stats.append(np.median(hit) / (n / 2) - 1.0)
        thr += step
    return float(np.median(stats)) if stats else 0.0


def _longest_run(mask: np.ndarray) -> int:
    best = run = 0
    for v in mask:
        run = run + 1 if v else 0
        best = max(best, run)
    return best


def _word_entropy(z: np.ndarray) -> float:
    sym = rank_symbols(z, 3)
    counts = np.zeros((3, 3))
    np.add.at(counts, (sym[:-1], sym[1:]), 1.0)
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def _histogram_ami(z: np.ndarray, lag: int = 2, bins: int = 5) -> float:
    edges = np.linspace(z.min(), z.max(), bins + 1)
    a = np.clip(np.searchsorted(edges, z[:-lag], side="right") - 1, 0, bins - 1)
    b = np.clip(np.searchsorted(edges, z[lag:], side="right") - 1, 0, bins - 1)
    joint = np.zeros((bins, bins))
    np.add.at(joint, (a, b), 1.0)
    joint /= joint.sum()
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    nz = joint > 0
    return float((joint[nz] * np.log(joint[nz] / np.outer(pa, pb)[nz])).sum())


def _f1ecac(r: np.ndarray) -> float:
    thresh = 1.0 / math.e
    for k in range(1, len(r)):
        if r[k] < thresh:
            prev = r[k - 1]
            return float(k - 1 + (prev - thresh) / (prev - r[k]))
    return float(len(r) - 1)


def _first_min(r: np.ndarray) -> float:
    for k in range(1, len(r) - 1):
        if r[k] < r[k - 1] and r[k] < r[k + 1]:
            return float(k)
    return float(len(r) - 1)


def _gaussian_ami_first_min(r: np.ndarray) -> float:
    ami = -0.5 * np.log(np.clip(1.0 - r[1:] ** 2, 1e-12, None))
    for k in range(1, len(ami) - 1):
        if ami[k] < ami[k - 1] and ami[k] < ami[k + 1]:
            return float(k + 1)
    return float(len(ami))


def _periodicity(r: np.ndarray) -> float:
    crossed = False
    for k in range(1, len(r) - 1):
        if r[k] <= 0:
            crossed = True
        elif crossed and r[k] > 0.01 and r[k] >= r[k - 1] and r[k] >= r[k + 1]:
            return float(k)
    return 0.0


def _tau_ratio(x: np.ndarray) -> float:
    resid = np.diff(x)
    if np.ptp(resid) == 0.0 or len(resid) < 3:
        return 0.0
    return first_zero_acf(resid) / first_zero_acf(x)


def _mean3_stderr(x: np.ndarray) -> float:
    pred = (x[:-3] + x[1:-2] + x[2:-1]) / 3.0
    return float(np.std(x[3:] - pred))


def _low_power_share(z: np.ndarray) -> float:
    power = np.abs(np.fft.rfft(z))[1:] ** 2
    total = power.sum()
    if total == 0.0:
        return 0.0
    k = max(1, len(power) // 5)
    return float(power[:k].sum() / total)


def feature_vector(series) -> np.ndarray:
    """Compute the 22 features listed in the module docstring."""
    x = np.asarray(getattr(series, "values", series), dtype=float).reshape(-1)
    n = len(x)
    if n < MIN_LENGTH:
        raise TooShortError(f"feature extraction needs at least {MIN_LENGTH} points, got {n}")
    out = np.zeros(N_FEATURES)
    if np.ptp(x) == 0.0:
        return out

    sd = x.std()
    z = (x - x.mean()) / sd
    max_lag = min(n - 1, n // 2)
    r = acf(x, max_lag)
    dz = np.diff(z)
    try:
        trans = transition_value(x)
    except TooShortAfterDownsampleError:
        trans = 0.0

    out[:] = [
        x.mean(),
        x.var(),
        r[1],
        first_zero_acf(x),
        trans,
        _f1ecac(r),
        _first_min(r),
        _histogram_mode(z, 5),
        _histogram_mode(z, 10),
        _outlier_timing(z),
        _outlier_timing(-z),
        _longest_run(x > x.mean()),
        _longest_run(np.diff(x) < 0),
        _word_entropy(z),
        np.mean(dz**3),
        np.mean(np.abs(dz) > 0.04),
        _histogram_ami(z),
        _gaussian_ami_first_min(r[: min(len(r), 41)]),
        _periodicity(r),
        _tau_ratio(x),
        _mean3_stderr(x),
        _low_power_share(z),
    ]
    out[~np.isfinite(out)] = 0.0
    return out
