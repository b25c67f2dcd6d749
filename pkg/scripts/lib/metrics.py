"""Per-run comfort, cost and price-responsiveness indicators."""

import math
from dataclasses import asdict, dataclass, fields
from typing import Dict, Iterable, List, Optional

import numpy as np

from lib.errors import ConfigError
from lib.log import log

NEAR_BAND = 2.0
FAR_BAND = 5.0


@dataclass(frozen=True)
class Metrics:
    """Summary of one committed trajectory.

    annual_cost excludes comfort penalties, which are reported as
    penalty_cost. Violations are in degC*h summed over room, water heater and
    refrigerator. Frequencies and shares are percentages.
    """

    annual_cost: float
    violations_degree_hours: float
    freq_at_setpoint_pct: float
    freq_near_band_pct: float
    freq_far_band_pct: float
    building_consumption_kwh: float
    share_building_lowprice_pct: float
    share_heating_lowprice_pct: float
    heating_consumption_kwh: float = 0.0
    penalty_cost: float = 0.0
    mean_abs_deviation: float = 0.0

    def to_dict(self):
        # type: () -> Dict[str, float]
        return asdict(self)

    @classmethod
    def field_names(cls):
        return tuple(f.name for f in fields(cls))


def low_price_mask(prices, threshold=0.5):
    # type: (np.ndarray, float) -> np.ndarray
    """Periods whose min-max normalized price lies below threshold.

    Empty when prices are constant.
    """
    prices = np.asarray(prices, dtype=float)
    lo, hi = prices.min(), prices.max()
    if hi == lo:
        return np.zeros(len(prices), dtype=bool)
    return (prices - lo) / (hi - lo) < threshold


def _share(power, mask, dt_hours):
    total = dt_hours * math.fsum(power)
    if total <= 0 or not mask.any():
        return 0.0
    return 100.0 * dt_hours * math.fsum(power[mask]) / total


def compute_metrics(result, scenario=None, low_price_threshold=0.5, setpoint_band=0.05):
    # type: (object, Optional[object], float, float) -> Metrics
    """Metrics of a SimulationResult; scenario, when given, must match its prices."""
    prices = np.asarray(result.prices, dtype=float)
    if scenario is not None:
        if scenario.n_periods != len(prices) or not np.array_equal(scenario.prices, prices):
            raise ConfigError("result and scenario are not aligned (%d vs %d periods)"
                              % (len(prices), scenario.n_periods))
    if not 0.0 <= low_price_threshold <= 1.0:
        raise ConfigError("low_price_threshold must lie in [0, 1]")
    dt_h = result.dt_hours
    power = np.asarray(result.building_power, dtype=float)
    heating = np.asarray(result.heating_power, dtype=float)
    room = np.asarray(result.room_temperature, dtype=float)
    slacks = np.asarray(result.slacks, dtype=float)

    mask = low_price_mask(prices, low_price_threshold)
    if len(prices) and not mask.any():
        log("metrics: prices are constant over the run, low-price shares reported as 0")

    n = max(len(room), 1)
    deviation = np.abs(room - result.comfort.room_setpoint)
    at = deviation <= setpoint_band
    near = ~at & (deviation <= NEAR_BAND)
    far = ~at & ~near & (deviation <= FAR_BAND)

    return Metrics(
        annual_cost=dt_h * math.fsum(prices * power),
        violations_degree_hours=dt_h * math.fsum(slacks[:, :3].ravel()),
        freq_at_setpoint_pct=100.0 * at.sum() / n,
        freq_near_band_pct=100.0 * near.sum() / n,
        freq_far_band_pct=100.0 * far.sum() / n,
        building_consumption_kwh=dt_h * math.fsum(power),
        share_building_lowprice_pct=_share(power, mask, dt_h),
        share_heating_lowprice_pct=_share(heating, mask, dt_h),
        heating_consumption_kwh=dt_h * math.fsum(heating),
        penalty_cost=float(result.penalty_cost),
        mean_abs_deviation=float(deviation.mean()) if len(room) else 0.0,
    )


def flexibility_savings(records):
    # type: (Iterable[dict]) -> List[dict]
    """Percentage cost saving of each flex/extraflex record against its noflex twin.

    Records are matched on heater, bound strategy, UA factor and the lighting
    and window flags; records without a noflex twin are skipped.
    """
    records = [r for r in records if "annual_cost" in r]
    key_fields = ("heater", "bound_strategy", "ua_ra_factor", "lighting_enabled", "windowless")

    def key(record):
        return tuple(record.get(k) for k in key_fields)

    reference = {key(r): r["annual_cost"] for r in records if r.get("flexibility") == "noflex"}
    out = []
    for r in records:
        base = reference.get(key(r))
        if r.get("flexibility") == "noflex" or base is None or base <= 0:
            continue
        out.append({
            "label": r.get("label", ""),
            "flexibility": r["flexibility"],
            "noflex_cost": base,
            "annual_cost": r["annual_cost"],
            "saving_pct": 100.0 * (base - r["annual_cost"]) / base,
        })
    return out
