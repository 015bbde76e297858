from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import count_rolling_windows
from tsbench.core import Dataset, SplitSpec
from tsbench.errors import HorizonTooLongError, ValidationError
from tsbench.evaluation import (
    EvaluationPlan,
    enumerate_rolling_windows,
    fit_normalizer,
    fixed_lookback,
    rolling_ends,
    run_fixed,
    run_plan,
    run_rolling,
)
from tsbench.forecasters import MethodSpec


def plan(ds, method="naive", strategy="rolling", horizon=4, **kw):
    return EvaluationPlan(dataset=ds, method=MethodSpec(method, kw.pop("hp", {})),
                          strategy=strategy, horizon=horizon, **kw)


def values(rows):
    return {r.metric: r.value for r in rows}


class TestWindows:
    def test_batch_remainder_arithmetic(self):
        n = len(enumerate_rolling_windows(2880, 336, 1))
        assert n == 2545
        assert [n % b for b in (32, 64, 128)] == [17, 49, 113]

    def test_final_aligned_window_added(self):
        assert enumerate_rolling_windows(10, 3, 3) == [0, 3, 6, 7]
        assert enumerate_rolling_windows(10, 4, 3) == [0, 3, 6]

    def test_horizon_too_long(self):
        with pytest.raises(HorizonTooLongError):
            enumerate_rolling_windows(5, 6, 1)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 400), st.integers(1, 60), st.integers(1, 30))
    def test_matches_walk(self, t_len, horizon, stride):
        if horizon > t_len:
            return
        offsets = enumerate_rolling_windows(t_len, horizon, stride)
        assert len(offsets) == count_rolling_windows(t_len, horizon, stride)
        assert offsets[0] == 0 and offsets[-1] == t_len - horizon
        assert offsets == sorted(set(offsets))


class TestNormalizer:
    def test_train_only(self):
        data = np.r_[np.zeros(5), np.full(5, 100.0)]
        data[:5] = [1, 2, 3, 4, 5]
        norm = fit_normalizer(data, range(0, 5))
        assert norm.mean[0] == 3.0
        np.testing.assert_allclose(norm.invert(norm.apply(data[:, None])), data[:, None])

    def test_constant_channel(self):
        norm = fit_normalizer(np.ones((10, 1)), range(0, 10))
        assert norm.std[0] == 1.0


class TestFixed:
    def test_naive_hand_case(self):
        ds = Dataset.from_array("d", np.arange(1.0, 11.0))
        rows = run_fixed(plan(ds, strategy="fixed", horizon=2, metrics=("mae",), normalization="none"))
        assert values(rows)["mae"] == 1.5
        assert rows[0].windows == 1

    def test_default_lookback(self):
        assert fixed_lookback(8) == 10
        assert fixed_lookback(48) == 60

    def test_too_short(self):
        ds = Dataset.from_array("d", np.arange(10.0))
        with pytest.raises(HorizonTooLongError):
            run_fixed(plan(ds, strategy="fixed", horizon=8))


class TestRolling:
    def test_batch_size_invariance(self, seasonal_dataset):
        results = []
        for b in (1, 7, 32):
            p = plan(seasonal_dataset, "seasonal_naive", horizon=24, batch_size=b, stride=5)
            results.append(values(run_rolling(p)))
        assert results[0] == results[1] == results[2]

    def test_window_count_and_ends(self, seasonal_dataset):
        p = plan(seasonal_dataset, horizon=24, stride=10)
        ends = rolling_ends(p)
        assert ends[0] == 480
        assert ends[-1] == 600 - 24
        assert run_rolling(p)[0].windows == len(ends)

    def test_raw_scale_differs(self, seasonal_dataset):
        z = values(run_rolling(plan(seasonal_dataset, horizon=12, stride=12)))
        raw = values(run_rolling(plan(seasonal_dataset, horizon=12, stride=12, metric_scale="raw")))
        assert z["mae"] != raw["mae"]

    def test_mase_on_alternating_series(self):
        ds = Dataset.from_array("d", np.ones(100) + np.arange(100) % 2)
        rows = run_rolling(plan(ds, horizon=2, metrics=("mae", "mase"), hp={}, stride=2))
        by = {r.metric: r for r in rows}
        assert by["mae"].value is not None
        assert by["mase"].failures == 0  # alternating series has non-zero naive error

    def test_division_failure_surfaces(self):
        ds = Dataset.from_array("d", np.r_[np.arange(80.0), np.zeros(20)])
        rows = run_rolling(plan(ds, horizon=2, metrics=("mape",), normalization="none", metric_scale="raw"))
        assert rows[0].failures > 0
        assert "DivisionByZero" in rows[0].reason

    def test_split_too_small(self):
        ds = Dataset.from_array("d", np.arange(50.0))
        with pytest.raises(HorizonTooLongError):
            run_rolling(plan(ds, horizon=20))

    def test_retrain_default(self, seasonal_dataset):
        assert plan(seasonal_dataset, "ets").retrain
        assert not plan(seasonal_dataset, "linear_regression").retrain

    def test_normalization_uses_train_only(self):
        # a level shift in the test range must not leak into the statistics
        x = np.r_[np.sin(np.arange(80)), 100 + np.sin(np.arange(80, 100))]
        ds = Dataset.from_array("d", x, split=SplitSpec.from_ratio("7:1:2"))
        rows = run_plan(plan(ds, horizon=2, metrics=("mae",), lookback=4))
        assert values(rows)["mae"] > 1.0

    def test_bad_plan(self, seasonal_dataset):
        with pytest.raises(ValidationError):
            plan(seasonal_dataset, strategy="expanding")
        with pytest.raises(ValidationError):
            plan(seasonal_dataset, metrics=("mape2",))
