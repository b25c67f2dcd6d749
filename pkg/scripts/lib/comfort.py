"""Comfort settings and per-period room temperature bounds."""

import enum
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from lib.errors import ConfigError


class BoundStrategy(enum.Enum):
    """How the room band half-width alpha is weighted over the day."""

    PRICE_INDEPENDENT = "pi-cb"
    PRICE_DEPENDENT = "pd-cb"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError("unknown bound strategy %r (expected 'pi-cb' or 'pd-cb')" % (value,))


class Flexibility(enum.Enum):
    NOFLEX = "noflex"
    FLEX = "flex"
    EXTRAFLEX = "extraflex"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError("unknown flexibility case %r" % (value,))


@dataclass(frozen=True)
class ComfortProfile:
    """Occupant comfort settings; temperatures in degC, penalties per unit slack."""

    room_setpoint: float = 20.0
    alpha: float = 0.0
    bound_strategy: BoundStrategy = BoundStrategy.PRICE_INDEPENDENT
    wh_bounds: Tuple[float, float] = (54.0, 56.0)
    rf_bounds: Tuple[float, float] = (4.9, 5.1)
    light_bounds_lux: Tuple[float, float] = (100.0, 10000.0)
    blind_min: float = 0.0
    rho_temp: float = 1000.0
    rho_light: float = 1000.0
    flexibility_label: Flexibility = Flexibility.NOFLEX

    def validate(self):
        # type: () -> ComfortProfile
        if self.alpha < 0:
            raise ConfigError("comfort.alpha must be >= 0, got %r" % (self.alpha,))
        for name in ("wh_bounds", "rf_bounds", "light_bounds_lux"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ConfigError("comfort.%s needs lower < upper, got %r" % (name, (lo, hi)))
        if self.rho_temp < 0 or self.rho_light < 0:
            raise ConfigError("comfort penalties must be >= 0")
        if not 0.0 <= self.blind_min <= 1.0:
            raise ConfigError("comfort.blind_min must lie in [0, 1], got %r" % (self.blind_min,))
        return self

    @classmethod
    def preset(cls, flexibility, strategy=BoundStrategy.PRICE_INDEPENDENT, **overrides):
        # type: (Flexibility, BoundStrategy, object) -> ComfortProfile
        """Comfort data of the noflex / flex / extraflex cases."""
        flexibility = Flexibility.parse(flexibility)
        alpha, wh, rf = PRESETS[flexibility]
        profile = cls(
            alpha=alpha,
            wh_bounds=wh,
            rf_bounds=rf,
            bound_strategy=BoundStrategy.parse(strategy),
            flexibility_label=flexibility,
        )
        return replace(profile, **overrides).validate() if overrides else profile


PRESETS = {
    Flexibility.NOFLEX: (0.0, (54.0, 56.0), (4.9, 5.1)),
    Flexibility.FLEX: (2.0, (50.0, 60.0), (4.0, 5.0)),
    Flexibility.EXTRAFLEX: (5.0, (45.0, 65.0), (3.0, 6.0)),
}


def price_weights(prices, horizon_len, periods_per_day, start_offset=0):
    # type: (np.ndarray, int, int, int) -> np.ndarray
    """Min-max normalized prices per calendar day; constant days weigh 1."""
    prices = np.asarray(prices, dtype=float)[:horizon_len]
    w = np.ones(horizon_len)
    day_of = (start_offset + np.arange(horizon_len)) // periods_per_day
    for day in np.unique(day_of):
        sel = day_of == day
        lo, hi = prices[sel].min(), prices[sel].max()
        if hi > lo:
            w[sel] = (prices[sel] - lo) / (hi - lo)
    return w


def build_comfort_bounds(profile, prices, horizon_len, periods_per_day=96, start_offset=0):
    # type: (ComfortProfile, np.ndarray, int, int, int) -> Tuple[np.ndarray, np.ndarray]
    """Room temperature band (lower, upper) per period: setpoint -/+ alpha * w_t."""
    if horizon_len < 1:
        raise ConfigError("horizon_len must be >= 1")
    if len(prices) < horizon_len:
        raise ConfigError("need %d prices, got %d" % (horizon_len, len(prices)))
    if profile.bound_strategy is BoundStrategy.PRICE_DEPENDENT:
        w = price_weights(prices, horizon_len, periods_per_day, start_offset)
    else:
        w = np.ones(horizon_len)
    half = profile.alpha * w
    return profile.room_setpoint - half, profile.room_setpoint + half
