"""Acceptance suite: one check per numbered criterion.

Each ``check_N`` returns ``(status, detail)`` where status is "PASS",
"FAIL" or "SKIP". Under pytest every check is also a test; a summary with
one line per criterion is printed at the end of the session. Running this
file directly prints the same lines.

Criterion 10 needs a user-supplied ILI CSV; point ``TSBENCH_ILI_CSV`` at it.
"""

from __future__ import annotations

import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import BRUTE, brute_mase  # noqa: E402
from tsbench.characterization import (  # noqa: E402
    characterize_series,
    correlation_score,
    seasonality_strength,
    shifting_value,
    stationarity,
    transition_value,
    trend_strength,
)
from tsbench.cli import main as cli_main  # noqa: E402
from tsbench.core import Dataset, SplitSpec  # noqa: E402
from tsbench.errors import TooShortAfterDownsampleError  # noqa: E402
from tsbench.evaluation import EvaluationPlan, enumerate_rolling_windows, run_rolling  # noqa: E402
from tsbench.forecasters import METHODS, VAR, MethodSpec, fit, predict  # noqa: E402
from tsbench.ingestion import DatasetManifest, load_dataset  # noqa: E402
from tsbench.metrics import METRIC_NAMES, MetricContext, compute_metric  # noqa: E402

RESULTS: dict[int, tuple[str, str]] = {}


def _verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def check_1():
    started = time.perf_counter()
    worst = 0.0
    rng = np.random.default_rng(2024)
    for _ in range(100):
        h, n = int(rng.integers(1, 40)), int(rng.integers(1, 5))
        y = rng.uniform(0.1, 10.0, (h, n)) * rng.choice([-1.0, 1.0], (h, n))
        f = y + rng.normal(0, 2, (h, n))
        train = rng.normal(0, 1, (int(rng.integers(30, 80)), n)).cumsum(axis=0)
        s = int(rng.integers(1, 12))
        ctx = MetricContext(f, y, train_series=train, seasonal_period=s)
        for name in METRIC_NAMES:
            ref = brute_mase(f, y, train, s) if name == "mase" else BRUTE[name](f, y)
            worst = max(worst, abs(compute_metric(name, ctx) - ref) / abs(ref))
    msmape = compute_metric("msmape", MetricContext(np.array([0.2]), np.array([0.1])))
    mase = compute_metric(
        "mase", MetricContext(np.array([6.5]), np.array([6.0]), train_series=np.arange(1.0, 6.0))
    )
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-9 and abs(msmape - 100.0 / 3.0) < 1e-12 and mase == 0.5 and elapsed < 1.0
    return _verdict(ok), (
        f"max rel err {worst:.2e} over 100 cases x 8 metrics; msmape {msmape:.6f}%; "
        f"mase {mase}; {elapsed:.2f}s"
    )


def check_2():
    n = len(enumerate_rolling_windows(2880, 336, 1))
    rem = [n % b for b in (32, 64, 128)]
    return _verdict(n == 2545 and rem == [17, 49, 113]), f"windows {n}, remainders {rem}"


def check_3():
    started = time.perf_counter()
    rng = np.random.default_rng(3)
    t = np.arange(3000)
    x = 10 + 3 * np.sin(2 * np.pi * t / 24) + np.sin(2 * np.pi * t / 168) + rng.normal(0, 0.5, 3000)
    ds = Dataset.from_array("synthetic3000", x, seasonal_period=24, frequency_label="hourly")
    # 2% / 2% / 96% leaves a 2880-point test range: 2545 windows at F=336
    split = SplitSpec.from_ratio("1:1:48")
    outcomes = {}
    for b in (1, 32, 64, 128):
        plan = EvaluationPlan(ds, MethodSpec("seasonal_naive"), "rolling", 336,
                              metrics=("mae", "mse"), batch_size=b, split=split)
        rows = run_rolling(plan)
        outcomes[b] = tuple((r.value, r.windows, r.failures) for r in rows)
    elapsed = time.perf_counter() - started
    first = outcomes[1]
    same = all(v == first for v in outcomes.values())
    windows = first[0][1]
    ok = same and windows == 2545 and first[0][2] == 0 and elapsed < 10.0
    return _verdict(ok), (
        f"MAE {first[0][0]!r} MSE {first[1][0]!r} identical for batch 1/32/64/128: {same}; "
        f"{windows} windows; {elapsed:.2f}s"
    )


def _corpus(rng, n_series: int):
    kinds = ("sine", "ramp", "walk", "noise", "step", "ar")
    out = []
    for i in range(n_series):
        kind = kinds[i % len(kinds)]
        length = int(rng.integers(100, 400))
        period = int(rng.choice([4, 7, 12, 24]))
        t = np.arange(length)
        noise = rng.normal(0, rng.uniform(0.01, 2.0), length)
        if kind == "sine":
            x = rng.uniform(0.5, 5) * np.sin(2 * np.pi * t / period) + noise
        elif kind == "ramp":
            x = rng.uniform(-1, 1) * t + noise
        elif kind == "walk":
            x = np.cumsum(noise)
        elif kind == "step":
            x = noise + rng.uniform(1, 10) * (t > rng.integers(10, length - 10))
        elif kind == "ar":
            x = np.zeros(length)
            phi = rng.uniform(-0.9, 0.9)
            for k in range(1, length):
                x[k] = phi * x[k - 1] + noise[k]
        else:
            x = noise
        out.append((x, period))
    return out


def check_4():
    started = time.perf_counter()
    rng = np.random.default_rng(4)
    bad = []
    skipped = 0
    for i, (x, period) in enumerate(_corpus(rng, 200)):
        tr, se = trend_strength(x, period), seasonality_strength(x, period)
        sh = shifting_value(x)
        try:
            tv = transition_value(x)
        except TooShortAfterDownsampleError:
            tv = None
            skipped += 1
        if not (0 <= tr <= 1 and 0 <= se <= 1 and 0 <= sh <= 1):
            bad.append(i)
        if tv is not None and not 0 <= tv <= 1 / 3:
            bad.append(i)
    corr = []
    for g in range(40):
        data = rng.normal(size=(300, 5)).cumsum(axis=0) * rng.uniform(0.1, 3, 5)
        data[:, 1] += rng.uniform(0, 1) * data[:, 0]
        corr.append(correlation_score(Dataset.from_array(f"g{g}", data)))
    base = rng.normal(size=300)
    ident = correlation_score(Dataset.from_array("same", np.column_stack([base] * 4)))
    elapsed = time.perf_counter() - started
    corr_ok = all(-1 < c <= 2 for c in corr)
    ok = not bad and corr_ok and ident == 2.0 and elapsed < 60.0
    return _verdict(ok), (
        f"{200 - len(set(bad))}/200 series in range ({skipped} too short for transition after "
        f"downsampling); correlation range [{min(corr):.3f}, {max(corr):.3f}] over 40 datasets; "
        f"identical channels -> {ident!r}; {elapsed:.1f}s"
    )


def check_5():
    s = shifting_value(np.arange(1.0, 7.0), m=3)
    tv = transition_value(np.tile([1.0, 2.0, 3.0], 4))
    ok = abs(s - 1 / 3) <= 1e-9 and abs(tv - 0.0633) <= 1e-4
    return _verdict(ok), f"shifting {s:.12f}, transition {tv:.6f}"


def check_6():
    """Per-seed reading: every one of the 20 seeds must satisfy each check."""
    started = time.perf_counter()
    t = np.arange(240)
    trend_s, seas_s, ramp_t, shift_pairs = [], [], [], []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        sine = np.sin(2 * np.pi * t / 12) + rng.normal(0, 0.01, 240)
        trend_s.append(trend_strength(sine, 12))
        seas_s.append(seasonality_strength(sine, 12))
        ramp = np.arange(200.0) + rng.normal(0, 0.01, 200)
        ramp_t.append(trend_strength(ramp, 12))
        noise = rng.normal(size=500)
        step = rng.normal(size=500)
        step[250:] += 3.0
        shift_pairs.append((shifting_value(step), shifting_value(noise)))
    trend_s, seas_s, ramp_t = map(np.asarray, (trend_s, seas_s, ramp_t))
    wins = sum(a > b for a, b in shift_pairs)
    n_seas = int((seas_s > 0.95).sum())
    n_trend = int((trend_s < 0.2).sum())
    n_ramp = int((ramp_t > 0.99).sum())
    elapsed = time.perf_counter() - started
    ok = n_seas == n_trend == n_ramp == wins == 20 and elapsed < 30.0
    step_mean = np.mean([a for a, _ in shift_pairs])
    noise_mean = np.mean([b for _, b in shift_pairs])
    return _verdict(ok), (
        f"seeds passing: sine seasonality>0.95 {n_seas}/20, sine trend<0.2 {n_trend}/20 "
        f"(max {trend_s.max():.3f}, mean {trend_s.mean():.3f}), ramp trend>0.99 {n_ramp}/20, "
        f"step shifting > noise {wins}/20 (means {step_mean:.3f} vs {noise_mean:.3f}); {elapsed:.1f}s"
    )


def check_7():
    adfuller = pytest.importorskip("statsmodels.tsa.stattools").adfuller
    started = time.perf_counter()
    agree = truth = 0
    for seed in range(20):
        rng = np.random.default_rng(700 + seed)
        stationary_truth = seed < 10
        x = rng.normal(size=500) if stationary_truth else np.cumsum(rng.normal(size=500))
        ours = stationarity(x)
        ref = adfuller(x, regression="c", autolag="AIC")[1] <= 0.05
        agree += ours == ref
        truth += ours == stationary_truth
    elapsed = time.perf_counter() - started
    return _verdict(agree >= 18 and elapsed < 10.0), (
        f"agreement with reference ADF {agree}/20, with generating process {truth}/20; {elapsed:.2f}s"
    )


def _subprocess_script(tmp: Path) -> Path:
    path = tmp / "last.py"
    path.write_text(
        "import csv, json, sys\n"
        "req, meta, resp = sys.argv[1:4]\n"
        "info = json.load(open(meta))\n"
        "last = list(csv.reader(open(req)))[-1]\n"
        "open(resp, 'w').write('\\n'.join([','.join(last)] * info['horizon']) + '\\n')\n"
    )
    return path


def check_8():
    started = time.perf_counter()
    y = 2.0 * np.arange(11)
    lr = predict(fit(MethodSpec("linear_regression", {"lags": 3}), y, 1, 2), y, 2)[:, 0]
    lr_ok = np.allclose(lr, [22.0, 24.0], atol=1e-6, rtol=0)

    rng = np.random.default_rng(8)
    x1 = rng.normal(size=1000)
    x2 = np.r_[0.0, x1[:-1]] + rng.normal(0, 1e-3, 1000)
    model = fit(MethodSpec("var", {"order": 1}), np.column_stack([x1, x2]), 1, 1)
    cross = VAR.lag_matrices(model)[0][1, 0]

    tt = np.arange(300)
    data = np.column_stack([np.sin(2 * np.pi * tt / 24) + 0.01 * tt, np.cos(tt / 5.0)])
    mismatched = []
    with tempfile.TemporaryDirectory() as tmp:
        script = _subprocess_script(Path(tmp))
        for name in sorted(METHODS):
            hp = {"command": [sys.executable, str(script)]} if name == "subprocess" else {}
            outs = [
                predict(fit(MethodSpec(name, hp, mode), data, 24, 1), data, 1) for mode in ("DMS", "IMS")
            ]
            if not np.array_equal(outs[0], outs[1]):
                mismatched.append(name)
    elapsed = time.perf_counter() - started
    ok = lr_ok and abs(cross - 1.0) <= 0.05 and not mismatched and elapsed < 10.0
    return _verdict(ok), (
        f"LR continuation {lr.tolist()}; VAR(1) cross coefficient {cross:.4f}; "
        f"IMS==DMS at F=1 for {len(METHODS) - len(mismatched)}/{len(METHODS)} methods; {elapsed:.2f}s"
    )


def check_9():
    started = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        runs = {
            "a": ["--parallel", "1"],
            "b": ["--parallel", "1"],
            "c": ["--parallel", "8"],
        }
        codes = {}
        for key, extra in runs.items():
            codes[key] = cli_main(["run", "--config", "demo", "--seed", "7", "-o", f"{tmp}/{key}", *extra])
        blobs = {k: (Path(tmp) / k / "results.csv").read_bytes() for k in runs}
    elapsed = time.perf_counter() - started
    same = blobs["a"] == blobs["b"] == blobs["c"]
    n_rows = blobs["a"].count(b"\n") - 1
    ok = same and set(codes.values()) == {0} and elapsed < 60.0
    return _verdict(ok), (
        f"exit codes {sorted(codes.values())}; {n_rows} rows; twice + parallel 1 vs 8 "
        f"byte-identical: {same}; {elapsed:.1f}s"
    )


def check_10():
    path = os.environ.get("TSBENCH_ILI_CSV")
    if not path or not Path(path).exists():
        return "SKIP", "set TSBENCH_ILI_CSV to an ILI CSV to run this check"
    ds = load_dataset(DatasetManifest(Path(path), seasonal_period=52))
    maes = {}
    for name in ("naive", "seasonal_naive"):
        plan = EvaluationPlan(ds, MethodSpec(name), "rolling", 24, metrics=("mae",),
                              split=SplitSpec.from_ratio("7:1:2"))
        row = run_rolling(plan)[0]
        maes[name] = row.value
    ok = all(v is not None and 0.5 < v < 2.5 for v in maes.values())
    return _verdict(ok), ", ".join(f"{k} MAE {v}" for k, v in maes.items())


CHECKS = {i: globals()[f"check_{i}"] for i in range(1, 11)}
TITLES = {
    1: "metric oracle suite",
    2: "rolling window count",
    3: "batch-size invariance",
    4: "characterization ranges",
    5: "algorithm hand traces",
    6: "synthetic characteristic discrimination",
    7: "stationarity agreement",
    8: "forecaster sanity",
    9: "end-to-end determinism",
    10: "ILI dataset smoke test",
}


def summary_lines() -> list[str]:
    return [f"criterion {i:>2} [{RESULTS[i][0]}] {TITLES[i]}: {RESULTS[i][1]}" for i in sorted(RESULTS)]


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number):
    status, detail = CHECKS[number]()
    RESULTS[number] = (status, detail)
    if status == "SKIP":
        pytest.skip(detail)
    assert status == "PASS", detail


if __name__ == "__main__":
    for i, check in CHECKS.items():
        RESULTS[i] = check()
    print("\n".join(summary_lines()))
