"""Tests for comfort presets and room temperature bounds."""

import dataclasses
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "scripts"))

from lib.comfort import (
    BoundStrategy,
    ComfortProfile,
    Flexibility,
    build_comfort_bounds,
    price_weights,
)
from lib.errors import ConfigError

PI = BoundStrategy.PRICE_INDEPENDENT
PD = BoundStrategy.PRICE_DEPENDENT


class TestBounds:
    @pytest.mark.parametrize("strategy", [PI, PD])
    def test_noflex_collapses_to_setpoint(self, strategy):
        profile = ComfortProfile.preset(Flexibility.NOFLEX, strategy)
        lo, hi = build_comfort_bounds(profile, np.array([0.1, 0.3, 0.2]), 3)
        assert list(lo) == [20.0] * 3
        assert list(hi) == [20.0] * 3

    def test_price_dependent_flex(self):
        profile = ComfortProfile.preset(Flexibility.FLEX, PD)
        lo, hi = build_comfort_bounds(profile, np.array([10.0, 20.0, 30.0]), 3, periods_per_day=3)
        assert list(lo) == pytest.approx([20.0, 19.0, 18.0])
        assert list(hi) == pytest.approx([20.0, 21.0, 22.0])

    def test_price_independent_extraflex(self):
        profile = ComfortProfile.preset(Flexibility.EXTRAFLEX, PI)
        lo, hi = build_comfort_bounds(profile, np.array([0.1, 0.5]), 2)
        assert list(lo) == [15.0, 15.0]
        assert list(hi) == [25.0, 25.0]

    def test_price_dependent_band_inside_independent(self):
        prices = np.random.default_rng(4).uniform(0.05, 0.4, 48)
        pi_lo, pi_hi = build_comfort_bounds(ComfortProfile.preset(Flexibility.FLEX, PI), prices, 48, 24)
        pd_lo, pd_hi = build_comfort_bounds(ComfortProfile.preset(Flexibility.FLEX, PD), prices, 48, 24)
        assert np.all(pd_lo >= pi_lo) and np.all(pd_hi <= pi_hi)

    def test_too_few_prices(self):
        with pytest.raises(ConfigError, match="need 4 prices"):
            build_comfort_bounds(ComfortProfile(), np.zeros(3), 4)


class TestPriceWeights:
    def test_normalized_per_day(self):
        prices = np.array([1.0, 3.0, 10.0, 20.0])
        w = price_weights(prices, 4, periods_per_day=2)
        assert list(w) == [0.0, 1.0, 0.0, 1.0]

    def test_constant_day_weighs_one(self):
        w = price_weights(np.full(4, 0.2), 4, periods_per_day=4)
        assert list(w) == [1.0] * 4

    def test_start_offset_splits_days(self):
        # periods 0-1 close the first day, 2-3 open the next
        prices = np.array([1.0, 2.0, 5.0, 7.0])
        w = price_weights(prices, 4, periods_per_day=4, start_offset=2)
        assert list(w) == [0.0, 1.0, 0.0, 1.0]


class TestProfile:
    def test_presets(self):
        flex = ComfortProfile.preset(Flexibility.FLEX)
        assert flex.alpha == 2.0
        assert flex.wh_bounds == (50.0, 60.0)
        assert flex.rf_bounds == (4.0, 5.0)
        extra = ComfortProfile.preset("extraflex")
        assert extra.wh_bounds == (45.0, 65.0)
        assert extra.flexibility_label is Flexibility.EXTRAFLEX

    def test_overrides_are_validated(self):
        with pytest.raises(ConfigError, match="blind_min"):
            ComfortProfile.preset(Flexibility.FLEX, blind_min=1.5)

    def test_override_keeps_preset(self):
        profile = ComfortProfile.preset(Flexibility.FLEX, PD, alpha=3.0)
        assert profile.alpha == 3.0
        assert profile.bound_strategy is PD
        assert profile.wh_bounds == (50.0, 60.0)

    def test_inverted_band(self):
        with pytest.raises(ConfigError, match="wh_bounds"):
            dataclasses.replace(ComfortProfile(), wh_bounds=(60.0, 50.0)).validate()

    def test_parse(self):
        assert BoundStrategy.parse("PD-CB") is PD
        with pytest.raises(ConfigError):
            BoundStrategy.parse("fixed")
        with pytest.raises(ConfigError):
            Flexibility.parse("superflex")
