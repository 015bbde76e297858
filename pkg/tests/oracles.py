"""Independent reference implementations used as test oracles.

The metric evaluator below is deliberately written with plain Python loops
over lists so it shares no code path with the vectorised implementations.
"""

from __future__ import annotations

import math


def _cells(f, y):
    f = [list(r) if hasattr(r, "__len__") else [r] for r in f]
    y = [list(r) if hasattr(r, "__len__") else [r] for r in y]
    out = []
    for fr, yr in zip(f, y):
        for a, b in zip(fr, yr):
            out.append((float(a), float(b)))
    return out


def brute_mae(f, y):
    c = _cells(f, y)
    return sum(abs(a - b) for a, b in c) / len(c)


def brute_mse(f, y):
    c = _cells(f, y)
    return sum((a - b) * (a - b) for a, b in c) / len(c)


def brute_rmse(f, y):
    return math.sqrt(brute_mse(f, y))


def brute_mape(f, y):
    c = _cells(f, y)
    return 100.0 * sum(abs(b - a) / abs(b) for a, b in c) / len(c)


def brute_smape(f, y):
    c = _cells(f, y)
    return 100.0 * sum(abs(a - b) / ((abs(b) + abs(a)) / 2.0) for a, b in c) / len(c)


def brute_wape(f, y):
    c = _cells(f, y)
    return sum(abs(b - a) for a, b in c) / sum(abs(b) for _, b in c)


def brute_msmape(f, y, eps=0.1):
    c = _cells(f, y)
    total = 0.0
    for a, b in c:
        total += abs(a - b) / (max(abs(b) + abs(a) + eps, 0.5 + eps) / 2.0)
    return 100.0 * total / len(c)


def brute_mase(f, y, train, s):
    """Per-channel MASE averaged over channels; ``train`` is (m,) or (m, N)."""
    rows_f = [list(r) if hasattr(r, "__len__") else [r] for r in f]
    rows_y = [list(r) if hasattr(r, "__len__") else [r] for r in y]
    rows_t = [list(r) if hasattr(r, "__len__") else [r] for r in train]
    n = len(rows_f[0])
    h, m = len(rows_f), len(rows_t)
    vals = []
    for j in range(n):
        num = sum(abs(rows_f[i][j] - rows_y[i][j]) for i in range(h))
        den = sum(abs(rows_t[i][j] - rows_t[i - s][j]) for i in range(s, m))
        vals.append(num / (h / (m - s) * den))
    return sum(vals) / n


BRUTE = {
    "mae": brute_mae,
    "mse": brute_mse,
    "rmse": brute_rmse,
    "mape": brute_mape,
    "smape": brute_smape,
    "wape": brute_wape,
    "msmape": brute_msmape,
}


def count_rolling_windows(test_length, horizon, stride):
    """Count windows by walking the test range one origin at a time."""
    n = 0
    last_start = None
    start = 0
    while start + horizon <= test_length:
        n += 1
        last_start = start
        start += stride
    if last_start is not None and last_start != test_length - horizon:
        n += 1
    return n
