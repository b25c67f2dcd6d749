"""Tests for the Scenario container and the synthetic generator."""

import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "scripts"))

from lib.errors import ConfigError
from lib.model_core import BuildingSpec
from lib.scenario import Scenario, generate_synthetic_scenario


def _flat(n=4, dt=900.0, **overrides):
    values = dict(prices=np.full(n, 0.2), ambient=np.full(n, 5.0), irradiance=np.zeros(n),
                  occupancy=np.zeros(n), hot_water=np.zeros(n))
    values.update(overrides)
    stamps = pd.date_range("2021-03-01", periods=n, freq=pd.Timedelta(seconds=dt))
    return Scenario.from_signals(dt=dt, timestamps=stamps, **values)


class TestScenario:
    def test_window_illuminance(self):
        scenario = _flat(1, irradiance=np.array([100.0]))
        assert scenario.illuminance[0] == pytest.approx(10500.0)

    def test_illuminance_scales_with_window_area(self):
        stamps = pd.date_range("2021-03-01", periods=1, freq="15min")
        scenario = Scenario.from_signals(900.0, stamps, [0.2], [5.0], [100.0], [0.0], [0.0],
                                         building=BuildingSpec(window_area=2.0))
        assert scenario.illuminance[0] == pytest.approx(21000.0)

    def test_day_of_quarter_hours(self):
        scenario = _flat(96)
        assert scenario.n_periods == 96
        assert scenario.periods_per_day == 96
        assert scenario.dt_hours == 0.25

    def test_missing_standby_is_zero(self):
        assert list(_flat().standby) == [0.0] * 4

    def test_day_offset(self):
        stamps = pd.date_range("2021-03-01 06:00", periods=4, freq="1h")
        scenario = Scenario.from_signals(3600.0, stamps, *([np.zeros(4)] * 5))
        assert scenario.day_offset(0) == 6
        assert scenario.day_offset(3) == 9

    def test_windowless_disturbances(self):
        scenario = _flat(3, irradiance=np.full(3, 50.0), occupancy=np.array([0.0, 1.0, 2.0]))
        series = scenario.disturbances(1, 3, windowless=True)
        assert len(series) == 2
        assert list(series.solar_illuminance) == [0.0, 0.0]
        assert list(series.occupancy) == [1.0, 2.0]
        assert list(scenario.disturbances(0, 1).solar_illuminance) == [5250.0]

    def test_window(self):
        part = _flat(8).window(2, 6)
        assert part.n_periods == 4
        assert part.timestamps[0] == pd.Timestamp("2021-03-01 00:30")

    def test_rejects_negative_occupancy(self):
        with pytest.raises(ConfigError, match="occupancy"):
            _flat(2, occupancy=np.array([0.0, -1.0]))

    def test_rejects_irregular_spacing(self):
        stamps = pd.DatetimeIndex(["2021-03-01 00:00", "2021-03-01 00:15", "2021-03-01 00:45"])
        with pytest.raises(ConfigError, match="spaced"):
            Scenario.from_signals(900.0, stamps, *([np.zeros(3)] * 5))

    def test_rejects_dt_not_dividing_a_day(self):
        with pytest.raises(ConfigError, match="divisor"):
            _flat(2, dt=7000.0)

    def test_to_frame_columns(self):
        frame = _flat().to_frame()
        assert list(frame.columns) == ["price", "ambient", "irradiance", "occupancy", "hot_water", "standby"]
        assert frame.index.name == "timestamp"


class TestSynthetic:
    def test_deterministic_for_a_seed(self):
        a = generate_synthetic_scenario(days=2, dt=3600.0, seed=3)
        b = generate_synthetic_scenario(days=2, dt=3600.0, seed=3)
        c = generate_synthetic_scenario(days=2, dt=3600.0, seed=4)
        assert np.array_equal(a.prices, b.prices)
        assert np.array_equal(a.ambient, b.ambient)
        assert not np.array_equal(a.prices, c.prices)

    def test_shape_and_ranges(self):
        scenario = generate_synthetic_scenario(days=7)
        assert scenario.n_periods == 7 * 96
        assert scenario.prices.min() >= 0.01
        assert scenario.irradiance.min() >= 0.0
        assert scenario.irradiance[:24].max() == 0.0
        assert scenario.irradiance.max() > 0.0
        assert set(np.unique(scenario.occupancy)) <= {0.0, 2.0}

    def test_weekday_and_weekend_occupancy(self):
        scenario = generate_synthetic_scenario(days=7, dt=3600.0)
        # 2021-01-04 is a Monday
        assert scenario.occupancy[6] == 2.0
        assert scenario.occupancy[12] == 0.0
        assert scenario.occupancy[5 * 24 + 12] == 2.0

    def test_hot_water_draws(self):
        scenario = generate_synthetic_scenario(days=1, dt=3600.0)
        assert list(np.flatnonzero(scenario.hot_water)) == [7, 19]
        assert scenario.hot_water[7] == pytest.approx(6.0)

    def test_peak_prices_above_night(self):
        scenario = generate_synthetic_scenario(days=1, dt=3600.0)
        assert scenario.prices[18] > scenario.prices[12] > scenario.prices[2]

    def test_rejects_zero_days(self):
        with pytest.raises(ConfigError):
            generate_synthetic_scenario(days=0)
