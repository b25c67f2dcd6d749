"""Shared pytest fixtures for household MPC tests."""

import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "scripts"))

from lib.comfort import BoundStrategy, ComfortProfile, Flexibility
from lib.model_core import BuildingSpec, DisturbanceSeries, HeaterVariant, StateVector
from lib.mpc import HorizonProblem


@pytest.fixture
def make_series():
    """Return a helper building a DisturbanceSeries with constant defaults."""

    def make(n, ambient=5.0, occupancy=0.0, draw=0.0, illuminance=0.0, standby=0.0):
        def col(value):
            arr = np.asarray(value, dtype=float)
            return np.full(n, float(arr)) if arr.ndim == 0 else arr

        return DisturbanceSeries(
            ambient=col(ambient),
            occupancy=col(occupancy),
            hot_water_draw=col(draw),
            solar_illuminance=col(illuminance),
            standby=col(standby),
        )

    return make


@pytest.fixture
def make_problem(make_series):
    """Return a helper building an HVAC horizon at dt=3600 unless told otherwise."""

    def make(prices, flexibility=Flexibility.FLEX, strategy=BoundStrategy.PRICE_INDEPENDENT,
             loads=(), heater=HeaterVariant.HVAC, dt=3600.0, lighting=True, building=None,
             comfort=None, series=None, x0=None, **series_kwargs):
        prices = np.asarray(prices, dtype=float)
        series = series if series is not None else make_series(len(prices), **series_kwargs)
        return HorizonProblem.create(
            building or BuildingSpec(),
            heater,
            x0 or StateVector(),
            prices,
            series,
            comfort or ComfortProfile.preset(flexibility, strategy),
            loads,
            dt=dt,
            lighting_enabled=lighting,
        )

    return make


@pytest.fixture
def write_config(tmp_path):
    """Return a helper that writes a dict as a JSON config file."""

    def write(data, filename="config.json"):
        path = tmp_path / filename
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f)
        return path

    return write


@pytest.fixture
def write_series(tmp_path):
    """Return a helper that writes timestamp,value rows as a signal file."""

    def write(filename, rows, header="timestamp,value"):
        path = tmp_path / filename
        with open(path, "w", encoding="utf-8") as f:
            f.write(header + "\n")
            for stamp, value in rows:
                f.write("%s,%s\n" % (stamp, value))
        return path

    return write


@pytest.fixture
def small_config():
    """Fast HVAC settings: hourly periods, one-day commit, no lookahead."""
    return {
        "building": {"heater": "hvac"},
        "comfort": {"preset": "flex"},
        "simulation": {"dt": 3600, "commit_len": 24, "lookahead_len": 0, "days": 1},
    }
