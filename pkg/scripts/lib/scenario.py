"""Exogenous time series of a simulation run and a synthetic generator."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from lib import signal_names
from lib.errors import ConfigError
from lib.model_core import BuildingSpec, DisturbanceSeries

SECONDS_PER_DAY = 86400


@dataclass(frozen=True)
class Scenario:
    """Aligned per-period signals.

    prices EUR/kWh, ambient degC, irradiance W/m2, occupancy persons,
    hot_water litres per period, standby kW. illuminance is the daylight at
    the window in lumen (irradiance x daylight efficacy x window area).
    """

    dt: float
    timestamps: pd.DatetimeIndex
    prices: np.ndarray
    ambient: np.ndarray
    irradiance: np.ndarray
    occupancy: np.ndarray
    hot_water: np.ndarray
    standby: np.ndarray
    illuminance: np.ndarray

    _SERIES = ("prices", "ambient", "irradiance", "occupancy", "hot_water", "standby", "illuminance")

    def __post_init__(self):
        for name in self._SERIES:
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "timestamps", pd.DatetimeIndex(self.timestamps))
        self.validate()

    @classmethod
    def from_signals(cls, dt, timestamps, prices, ambient, irradiance, occupancy, hot_water,
                     standby=None, building=None):
        """Scenario whose illuminance is derived from irradiance and the building window."""
        building = building or BuildingSpec()
        irradiance = np.asarray(irradiance, dtype=float)
        return cls(
            dt=float(dt),
            timestamps=timestamps,
            prices=prices,
            ambient=ambient,
            irradiance=irradiance,
            occupancy=occupancy,
            hot_water=hot_water,
            standby=np.zeros(len(irradiance)) if standby is None else standby,
            illuminance=irradiance * building.lum_efficacy_daylight * building.window_area,
        )

    def validate(self):
        # type: () -> Scenario
        if self.dt <= 0 or SECONDS_PER_DAY % self.dt:
            raise ConfigError("dt=%r must be a positive divisor of 86400 s" % (self.dt,))
        n = len(self.timestamps)
        for name in self._SERIES:
            if len(getattr(self, name)) != n:
                raise ConfigError("series %r has %d periods, expected %d"
                                  % (name, len(getattr(self, name)), n))
            if not np.all(np.isfinite(getattr(self, name))):
                raise ConfigError("series %r holds non-finite values" % name)
        for name in ("irradiance", "occupancy", "hot_water", "standby", "illuminance"):
            if np.any(getattr(self, name) < 0):
                raise ConfigError("series %r must be >= 0" % name)
        if n > 1:
            steps = np.diff(self.timestamps.to_numpy()) / np.timedelta64(1, "s")
            if np.any(steps != self.dt):
                raise ConfigError("timestamps must be spaced exactly dt=%gs apart" % self.dt)
        return self

    @property
    def n_periods(self):
        # type: () -> int
        return len(self.timestamps)

    @property
    def periods_per_day(self):
        # type: () -> int
        return int(SECONDS_PER_DAY // self.dt)

    @property
    def dt_hours(self):
        # type: () -> float
        return self.dt / 3600.0

    @property
    def occupied(self):
        # type: () -> np.ndarray
        return self.occupancy > 0

    def day_offset(self, period):
        # type: (int) -> int
        """Position of a period within its calendar day."""
        ts = self.timestamps[period]
        midnight = ts.normalize()
        return int((ts - midnight).total_seconds() // self.dt)

    def disturbances(self, start, stop, windowless=False):
        # type: (int, int, bool) -> DisturbanceSeries
        light = np.zeros(stop - start) if windowless else self.illuminance[start:stop]
        return DisturbanceSeries(
            ambient=self.ambient[start:stop],
            occupancy=self.occupancy[start:stop],
            hot_water_draw=self.hot_water[start:stop],
            solar_illuminance=light,
            standby=self.standby[start:stop],
        )

    def window(self, start, stop):
        # type: (int, int) -> Scenario
        return Scenario(self.dt, self.timestamps[start:stop],
                        *(getattr(self, name)[start:stop] for name in self._SERIES))

    def to_frame(self):
        # type: () -> pd.DataFrame
        """One column per signal, indexed by timestamp."""
        return pd.DataFrame({
            signal_names.PRICE: self.prices,
            signal_names.AMBIENT: self.ambient,
            signal_names.IRRADIANCE: self.irradiance,
            signal_names.OCCUPANCY: self.occupancy,
            signal_names.HOT_WATER: self.hot_water,
            signal_names.STANDBY: self.standby,
        }, index=self.timestamps.rename("timestamp"))


def _in_hours(hours, start, stop):
    return (hours >= start) & (hours < stop)


def generate_synthetic_scenario(days=7, dt=900.0, seed=0, start="2021-01-04", building=None):
    # type: (int, float, int, str, Optional[BuildingSpec]) -> Scenario
    """Deterministic desk-scale scenario.

    Ambient follows a seasonal mean with a daily swing peaking mid-afternoon;
    irradiance is a clear-sky bell between sunrise and sunset; prices are a
    night/day/peak tariff with seeded noise; two occupants are home in the
    morning and evening (all day at weekends) and draw hot water at 7:00 and
    19:00. Standby is zero.
    """
    if days < 1:
        raise ConfigError("days must be >= 1, got %r" % (days,))
    if dt <= 0 or SECONDS_PER_DAY % dt:
        raise ConfigError("dt=%r must be a positive divisor of 86400 s" % (dt,))
    rng = np.random.default_rng(seed)
    n = int(days * SECONDS_PER_DAY // dt)
    timestamps = pd.date_range(start, periods=n, freq=pd.Timedelta(seconds=dt))
    hours = (np.asarray(timestamps.hour) + np.asarray(timestamps.minute) / 60.0
             + np.asarray(timestamps.second) / 3600.0)
    doy = np.asarray(timestamps.dayofyear)
    weekend = np.asarray(timestamps.dayofweek) >= 5
    dt_h = dt / 3600.0

    seasonal = 10.0 - 8.0 * np.cos(2.0 * np.pi * (doy - 20) / 365.0)
    ambient = seasonal + 4.0 * np.cos(2.0 * np.pi * (hours - 15.0) / 24.0)
    ambient = ambient + rng.normal(0.0, 0.3, n)

    day_len = 12.0 - 4.0 * np.cos(2.0 * np.pi * (doy + 10) / 365.0)
    sunrise = 12.0 - day_len / 2.0
    peak = 550.0 - 250.0 * np.cos(2.0 * np.pi * (doy + 10) / 365.0)
    mid = hours + dt_h / 2.0
    irradiance = peak * np.clip(np.sin(np.pi * (mid - sunrise) / day_len), 0.0, None)
    irradiance[(mid < sunrise) | (mid > sunrise + day_len)] = 0.0

    prices = np.where(_in_hours(hours, 7, 23), 0.24, 0.11)
    prices = np.where(_in_hours(hours, 7, 9) | _in_hours(hours, 17, 21), 0.31, prices)
    prices = np.clip(prices + rng.uniform(-0.02, 0.02, n), 0.01, None)

    home = _in_hours(hours, 6, 8) | _in_hours(hours, 17, 23)
    home = np.where(weekend, _in_hours(hours, 8, 23), home)
    occupancy = np.where(home, 2.0, 0.0)

    draw_rate = 6.0  # litres per hour
    hot_water = np.where(_in_hours(hours, 7, 8) | _in_hours(hours, 19, 20), draw_rate * dt_h, 0.0)

    return Scenario.from_signals(
        dt=dt,
        timestamps=timestamps,
        prices=np.round(prices, 5),
        ambient=np.round(ambient, 3),
        irradiance=np.round(irradiance, 2),
        occupancy=occupancy,
        hot_water=hot_water,
        standby=np.zeros(n),
        building=building,
    )
