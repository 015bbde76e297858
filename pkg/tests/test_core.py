from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from tsbench.core import (
    DEFAULT_HORIZONS,
    Dataset,
    ForecastWindow,
    SplitSpec,
    default_period,
    split_chronological,
    validate_series,
)
from tsbench.errors import (
    EmptySeriesError,
    LengthMismatchError,
    NonFiniteError,
    NonMonotoneTimestampsError,
    TooShortError,
    ValidationError,
)


class TestValidateSeries:
    def test_basic(self):
        ts = validate_series([1.0, 2.0, 3.0], name="x")
        assert len(ts) == 3
        assert ts.seasonal_period == 1
        assert ts.values.dtype == float

    def test_idempotent(self):
        ts = validate_series([1, 2, 3, 4], timestamps=[0, 1, 2, 3], seasonal_period=2)
        again = validate_series(ts)
        assert again.same_as(ts)

    def test_values_are_read_only(self):
        ts = validate_series([1.0, 2.0])
        with pytest.raises(ValueError):
            ts.values[0] = 5.0

    def test_input_not_aliased(self):
        raw = np.array([1.0, 2.0, 3.0])
        ts = validate_series(raw)
        raw[0] = 99.0
        assert ts.values[0] == 1.0

    @pytest.mark.parametrize("bad", [[1.0, np.nan], [np.inf, 1.0]])
    def test_non_finite(self, bad):
        with pytest.raises(NonFiniteError):
            validate_series(bad)

    def test_empty(self):
        with pytest.raises(EmptySeriesError):
            validate_series([])

    def test_non_monotone_timestamps(self):
        with pytest.raises(NonMonotoneTimestampsError):
            validate_series([1, 2, 3], timestamps=[0, 2, 2])

    def test_timestamp_length(self):
        with pytest.raises(LengthMismatchError):
            validate_series([1, 2, 3], timestamps=[0, 1])

    def test_period_default_from_frequency(self):
        assert validate_series(np.ones(100), frequency_label="hourly").seasonal_period == 24
        # capped below the length
        assert validate_series(np.ones(10), frequency_label="weekly").seasonal_period == 9

    def test_bad_period(self):
        with pytest.raises(ValidationError):
            validate_series([1, 2, 3], seasonal_period=0)

    def test_errors_are_value_errors(self):
        with pytest.raises(ValueError):
            validate_series([np.nan])


def test_default_horizons_table():
    assert DEFAULT_HORIZONS["yearly"] == 6
    assert DEFAULT_HORIZONS["hourly"] == 48
    assert default_period("monthly") == 12


class TestSplit:
    def test_ratio_parse(self):
        s = SplitSpec.from_ratio("7:1:2")
        assert s.as_tuple() == (Fraction(7, 10), Fraction(1, 10), Fraction(2, 10))
        assert SplitSpec.from_ratio([6, 2, 2]).train_fraction == Fraction(3, 5)

    def test_bad_ratio(self):
        with pytest.raises(ValidationError):
            SplitSpec.from_ratio("7:1")

    def test_eleven_points(self):
        train, val, test = split_chronological(11, SplitSpec.from_ratio("7:1:2"))
        assert (len(train), len(val), len(test)) == (7, 1, 3)

    def test_contiguous_and_covering(self):
        for t_len in range(10, 200, 7):
            train, val, test = split_chronological(t_len, SplitSpec.from_ratio("6:2:2"))
            assert train.start == 0 and train.stop == val.start and val.stop == test.start
            assert test.stop == t_len

    def test_too_short(self):
        with pytest.raises(TooShortError):
            split_chronological(3, SplitSpec.from_ratio("7:1:2"))


class TestDataset:
    def test_from_array(self, seasonal_dataset):
        ds = seasonal_dataset
        assert ds.n_channels == 2
        assert ds.values().shape == (600, 2)
        assert ds.channel_names == ["a", "b"]
        assert ds.seasonal_period == 24

    def test_values_is_a_copy(self, seasonal_dataset):
        v = seasonal_dataset.values()
        v[0, 0] = 1e9
        assert seasonal_dataset.values()[0, 0] != 1e9

    def test_unequal_channels(self):
        a = validate_series([1, 2, 3])
        b = validate_series([1, 2])
        with pytest.raises(LengthMismatchError):
            Dataset("x", (a, b))


class TestForecastWindow:
    def test_target(self):
        w = ForecastWindow(history_end=10, horizon=3, lookback=5)
        assert w.target == slice(10, 13)
        w.check_fits(13)
        with pytest.raises(ValidationError):
            w.check_fits(12)

    def test_lookback_too_long(self):
        with pytest.raises(ValidationError):
            ForecastWindow(history_end=3, horizon=1, lookback=5)
