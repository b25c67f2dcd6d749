"""Uninterruptible appliance cycles and their exact start-time scheduling.

A load runs its phases back to back once inside its permitted window. With
prices known, its cost depends only on the start period, so every feasible
start is priced and the cheapest one (earliest on ties) is kept. This is the
whole binary structure of the cycle constraints, solved by enumeration.
"""

import math
import re
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Sequence, Tuple

import numpy as np

from lib.errors import ConfigError, NoFeasibleStartError

TIE_RTOL = 1e-12

_CLOCK_RANGE = re.compile(r"^\s*(\d{1,2}):(\d{2})\s*-\s*(\d{1,2}):(\d{2})\s*$")


@dataclass(frozen=True)
class UninterruptibleLoad:
    """One appliance cycle: phase powers (kW per period) and permitted periods."""

    name: str
    cycle_phases: Tuple[float, ...]
    window: FrozenSet[int]

    def __post_init__(self):
        object.__setattr__(self, "cycle_phases", tuple(float(p) for p in self.cycle_phases))
        object.__setattr__(self, "window", frozenset(int(t) for t in self.window))

    @property
    def cycle_len(self):
        # type: () -> int
        return len(self.cycle_phases)

    def validate(self):
        # type: () -> UninterruptibleLoad
        if self.cycle_len < 1:
            raise ConfigError("load %r needs at least one cycle phase" % self.name)
        if any(p < 0 or not math.isfinite(p) for p in self.cycle_phases):
            raise ConfigError("load %r phase powers must be finite and >= 0" % self.name)
        if any(t < 0 for t in self.window):
            raise ConfigError("load %r window holds negative periods" % self.name)
        return self

    def shifted(self, offset):
        # type: (int) -> UninterruptibleLoad
        return UninterruptibleLoad(self.name, self.cycle_phases, frozenset(t + offset for t in self.window))


@dataclass(frozen=True)
class LoadSchedule:
    """Chosen start, per-period power over the horizon (kW) and cost (EUR)."""

    name: str
    start: int
    power: np.ndarray
    cost: float


@dataclass(frozen=True)
class ApplianceSpec:
    """Daily appliance as configured: phases and a clock window like '06:00-14:00'."""

    name: str
    phases_kw: Tuple[float, ...]
    window: str

    def for_day(self, day_start, dt):
        # type: (int, float) -> UninterruptibleLoad
        """Load whose window is placed in the day starting at period day_start."""
        periods = parse_clock_window(self.window, dt)
        return UninterruptibleLoad(self.name, tuple(self.phases_kw),
                                   frozenset(day_start + p for p in periods)).validate()

    def to_dict(self):
        return {"name": self.name, "phases_kw": list(self.phases_kw), "window": self.window}


def parse_clock_window(text, dt):
    # type: (str, float) -> List[int]
    """Periods of a 'HH:MM-HH:MM' window, right-exclusive; '00:00' as end is midnight."""
    match = _CLOCK_RANGE.match(text)
    if not match:
        raise ConfigError("window %r is not of the form HH:MM-HH:MM" % (text,))
    h0, m0, h1, m1 = (int(g) for g in match.groups())
    start_s = (h0 * 60 + m0) * 60
    end_s = (h1 * 60 + m1) * 60
    if end_s == 0:
        end_s = 86400
    if h0 > 23 or m0 > 59 or m1 > 59 or end_s > 86400:
        raise ConfigError("window %r holds an invalid clock time" % (text,))
    if end_s <= start_s:
        raise ConfigError("window %r must end after it starts (no wrap past midnight)" % (text,))
    if start_s % dt or end_s % dt:
        raise ConfigError("window %r is not aligned to dt=%gs" % (text, dt))
    return list(range(int(start_s // dt), int(end_s // dt)))


def feasible_starts(load, horizon_len):
    # type: (UninterruptibleLoad, int) -> List[int]
    """Starts s with s..s+CT-1 all permitted and inside the horizon."""
    allowed = load.window
    n = load.cycle_len
    return [s for s in sorted(allowed)
            if s + n <= horizon_len and all((s + c) in allowed for c in range(n))]


def start_cost(load, prices, start, dt_hours):
    # type: (UninterruptibleLoad, Sequence[float], int, float) -> float
    """dt_hours * sum_c price[start + c] * P_c, summed exactly."""
    return dt_hours * math.fsum(float(prices[start + c]) * p for c, p in enumerate(load.cycle_phases))


def pick_cheapest(costs):
    # type: (Sequence[Tuple[int, float]]) -> Tuple[int, float]
    """Earliest (start, cost) among those within TIE_RTOL of the minimum."""
    best = min(c for _, c in costs)
    tol = TIE_RTOL * max(1.0, abs(best))
    for start, cost in sorted(costs):
        if cost <= best + tol:
            return start, cost
    raise AssertionError("unreachable")


def power_profile(load, start, horizon_len):
    # type: (UninterruptibleLoad, int, int) -> np.ndarray
    power = np.zeros(horizon_len)
    power[start:start + load.cycle_len] = load.cycle_phases
    return power


def schedule_uninterruptible(load, prices, dt_hours):
    # type: (UninterruptibleLoad, Sequence[float], float) -> LoadSchedule
    """Cheapest consecutive run of the cycle inside the load's window."""
    load.validate()
    horizon_len = len(prices)
    starts = feasible_starts(load, horizon_len)
    if not starts:
        raise NoFeasibleStartError(load.name, load.cycle_len)
    start, cost = pick_cheapest([(s, start_cost(load, prices, s, dt_hours)) for s in starts])
    return LoadSchedule(load.name, start, power_profile(load, start, horizon_len), cost)


def schedule_all(loads, prices, dt_hours):
    # type: (Iterable[UninterruptibleLoad], Sequence[float], float) -> List[LoadSchedule]
    return [schedule_uninterruptible(load, prices, dt_hours) for load in loads]


# Phase powers are placeholders per 15-min period, not measured cycle data.
DEFAULT_APPLIANCES = (
    ApplianceSpec("washing_machine", (2.0, 0.3, 0.3, 0.6), "06:00-14:00"),
    ApplianceSpec("dishwasher_first", (1.8, 0.15, 1.8, 0.15), "06:00-14:00"),
    ApplianceSpec("dishwasher_second", (1.8, 0.15, 1.8, 0.15), "16:00-00:00"),
    ApplianceSpec("tumble_dryer", (2.5, 2.5, 2.5, 1.0), "15:00-00:00"),
    ApplianceSpec("oven", (2.0, 1.2, 1.2), "10:00-15:00"),
)
