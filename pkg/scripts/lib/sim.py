"""Receding-horizon simulation and case grids.

Each segment solves a horizon of commit_len + lookahead_len periods (clipped
at the end of the scenario), keeps the first commit_len periods and carries
the last committed state into the next segment. Segments run strictly in
order; distinct grid cells run in a thread pool.
"""

import dataclasses
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from lib.comfort import BoundStrategy, ComfortProfile, Flexibility
from lib.errors import ConfigError, DaySolveError, HouseholdMpcError
from lib.loads import (
    DEFAULT_APPLIANCES, ApplianceSpec, UninterruptibleLoad, feasible_starts, parse_clock_window,
)
from lib.log import log
from lib.metrics import Metrics, compute_metrics
from lib.model_core import BuildingSpec, HeaterVariant, StateVector, heating_control
from lib.mpc import SLACK_NAMES, DayPlan, HorizonProblem, solve_horizon
from lib.scenario import Scenario

PROGRESS_EVERY = 30
UA_FACTORS = (0.5, 1.0, 2.0, 4.0)


@dataclass(frozen=True)
class SimulationConfig:
    """One simulated case: heater, comfort case and horizon layout."""

    heater: HeaterVariant = HeaterVariant.FLOOR_HEATING
    flexibility: Flexibility = Flexibility.NOFLEX
    bound_strategy: BoundStrategy = BoundStrategy.PRICE_INDEPENDENT
    commit_len: int = 96
    lookahead_len: int = 96
    ua_ra_factor: float = 1.0
    lighting_enabled: bool = True
    windowless: bool = False
    initial_state: StateVector = field(default_factory=StateVector)

    def validate(self):
        # type: () -> SimulationConfig
        if self.commit_len < 1:
            raise ConfigError("simulation.commit_len must be >= 1, got %r" % (self.commit_len,))
        if self.lookahead_len < 0:
            raise ConfigError("simulation.lookahead_len must be >= 0, got %r" % (self.lookahead_len,))
        if not self.ua_ra_factor > 0:
            raise ConfigError("simulation.ua_ra_factor must be > 0, got %r" % (self.ua_ra_factor,))
        return self

    @property
    def label(self):
        # type: () -> str
        parts = [self.heater.value, self.bound_strategy.value, self.flexibility.value,
                 "ua=%g" % self.ua_ra_factor]
        if not self.lighting_enabled:
            parts.append("nolight")
        if self.windowless:
            parts.append("windowless")
        return "/".join(parts)

    def comfort(self, **overrides):
        # type: (object) -> ComfortProfile
        """Comfort preset of this case's flexibility and strategy."""
        return ComfortProfile.preset(self.flexibility, self.bound_strategy, **overrides)

    def to_dict(self):
        # type: () -> Dict[str, object]
        return {
            "heater": self.heater.value,
            "flexibility": self.flexibility.value,
            "bound_strategy": self.bound_strategy.value,
            "commit_len": self.commit_len,
            "lookahead_len": self.lookahead_len,
            "ua_ra_factor": self.ua_ra_factor,
            "lighting_enabled": self.lighting_enabled,
            "windowless": self.windowless,
        }


@dataclass
class SimulationResult:
    """Committed trajectory of a whole run, period by period."""

    config: SimulationConfig
    comfort: ComfortProfile
    state_names: Tuple[str, ...]
    control_names: Tuple[str, ...]
    timestamps: pd.DatetimeIndex
    x0: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    slacks: np.ndarray
    light: np.ndarray
    load_power: np.ndarray
    standby: np.ndarray
    building_power: np.ndarray
    prices: np.ndarray
    room_lower: np.ndarray
    room_upper: np.ndarray
    dt_hours: float
    electricity_cost: float
    penalty_cost: float
    load_starts: List[Tuple[int, str, int]] = field(default_factory=list)
    lp_iterations: List[int] = field(default_factory=list)
    solve_seconds: float = 0.0

    @property
    def n_periods(self):
        # type: () -> int
        return len(self.prices)

    @property
    def room_temperature(self):
        # type: () -> np.ndarray
        return self.states[:, self.state_names.index("room")]

    @property
    def heating_power(self):
        # type: () -> np.ndarray
        return self.controls[:, self.control_names.index(heating_control(self.config.heater))]

    @property
    def total_cost(self):
        # type: () -> float
        return self.electricity_cost + self.penalty_cost


def segment_loads(appliances, scenario, start, commit_len):
    # type: (Sequence[ApplianceSpec], Scenario, int, int) -> Tuple[UninterruptibleLoad, ...]
    """Appliance cycles whose window opens inside the committed periods.

    Windows are clipped to the committed periods and indexed from start.
    """
    ppd = scenario.periods_per_day
    stop = start + commit_len
    day_start = start - scenario.day_offset(start)
    day_starts = list(range(day_start, stop, ppd))
    loads = []
    for d in day_starts:
        for appliance in appliances:
            periods = [d + p for p in parse_clock_window(appliance.window, scenario.dt)]
            if not start <= periods[0] < stop:
                continue
            name = appliance.name if len(day_starts) == 1 else "%s@%d" % (appliance.name, d)
            window = frozenset(p - start for p in periods if p < stop)
            loads.append(UninterruptibleLoad(name, tuple(appliance.phases_kw), window).validate())
    return tuple(loads)


def check_segment_windows(appliances, scenario, commit_len):
    # type: (Sequence[ApplianceSpec], Scenario, int) -> None
    """Reject a commit_len that cuts an otherwise schedulable appliance window.

    A window too short for its own cycle is left for the solve to report.
    """
    for start in range(0, scenario.n_periods, commit_len):
        for load in segment_loads(appliances, scenario, start, commit_len):
            if feasible_starts(load, commit_len):
                continue
            appliance = next(a for a in appliances if load.name.split("@")[0] == a.name)
            if feasible_starts(appliance.for_day(0, scenario.dt), scenario.periods_per_day):
                raise ConfigError(
                    "commit_len %d cuts the %s window %s at period %d; the cycle of %d "
                    "periods no longer fits" % (commit_len, appliance.name, appliance.window,
                                                start + commit_len, load.cycle_len))


def run_receding_horizon(scenario, building, config, comfort=None, appliances=DEFAULT_APPLIANCES):
    # type: (Scenario, BuildingSpec, SimulationConfig, Optional[ComfortProfile], Sequence[ApplianceSpec]) -> SimulationResult
    """Simulate the scenario segment by segment and concatenate the committed parts."""
    config.validate()
    comfort = (comfort or config.comfort()).validate()
    n = scenario.n_periods
    commit = config.commit_len
    if n % commit:
        raise ConfigError("scenario length %d is not a multiple of commit_len %d" % (n, commit))
    check_segment_windows(appliances, scenario, commit)
    building = building.with_ua_factor(config.ua_ra_factor) if config.ua_ra_factor != 1.0 else building
    building.validate()
    variant = config.heater
    x = config.initial_state.for_variant(variant)
    x0 = x.to_array(variant)

    n_segments = n // commit
    plans = []  # type: List[DayPlan]
    load_starts = []  # type: List[Tuple[int, str, int]]
    iterations = []  # type: List[int]
    started = time.monotonic()
    for seg in range(n_segments):
        start = seg * commit
        stop = min(n, start + commit + config.lookahead_len)
        try:
            problem = HorizonProblem.create(
                building, variant, x,
                prices=scenario.prices[start:stop],
                disturbances=scenario.disturbances(start, stop, config.windowless),
                comfort=comfort,
                loads=segment_loads(appliances, scenario, start, commit),
                dt=scenario.dt,
                lighting_enabled=config.lighting_enabled,
                day_offset=scenario.day_offset(start),
            )
            plan = solve_horizon(problem).head(commit)
        except HouseholdMpcError as exc:
            raise DaySolveError(seg, exc) from exc
        plans.append(plan)
        iterations.append(plan.lp_iterations)
        load_starts.extend((seg, name, start + s) for name, s in sorted(plan.load_starts.items()))
        x = plan.state_vector(commit - 1)
        if (seg + 1) % PROGRESS_EVERY == 0 or seg + 1 == n_segments:
            log("%s: segment %d/%d done (%.1fs)"
                % (config.label, seg + 1, n_segments, time.monotonic() - started))

    def cat(attr):
        return np.concatenate([getattr(p, attr) for p in plans])

    return SimulationResult(
        config=config,
        comfort=comfort,
        state_names=plans[0].state_names,
        control_names=plans[0].control_names,
        timestamps=scenario.timestamps,
        x0=x0,
        states=cat("states"),
        controls=cat("controls"),
        slacks=cat("slacks").reshape(-1, len(SLACK_NAMES)),
        light=cat("light"),
        load_power=np.concatenate([p.load_power.sum(axis=0) for p in plans]),
        standby=cat("standby"),
        building_power=cat("building_power"),
        prices=cat("prices"),
        room_lower=cat("room_lower"),
        room_upper=cat("room_upper"),
        dt_hours=scenario.dt_hours,
        electricity_cost=sum(p.electricity_cost for p in plans),
        penalty_cost=sum(p.penalty_cost for p in plans),
        load_starts=load_starts,
        lp_iterations=iterations,
        solve_seconds=time.monotonic() - started,
    )


@dataclass
class GridRow:
    """One case of a grid: its metrics, or the error that stopped it."""

    index: int
    config: SimulationConfig
    metrics: Optional[Metrics] = None
    error: Optional[str] = None

    def to_record(self):
        # type: () -> Dict[str, object]
        record = {"case": self.index, "label": self.config.label}
        record.update(self.config.to_dict())
        if self.metrics is not None:
            record.update(self.metrics.to_dict())
        if self.error is not None:
            record["error"] = self.error
        return record


def _run_cell(scenario, building, config, comfort_overrides, appliances, low_price_threshold,
              setpoint_band):
    comfort = config.comfort(**comfort_overrides)
    result = run_receding_horizon(scenario, building, config, comfort, appliances)
    return compute_metrics(result, scenario, low_price_threshold, setpoint_band)


def run_case_grid(scenario, building, configs, comfort_overrides=None,
                  appliances=DEFAULT_APPLIANCES, threads=1, low_price_threshold=0.5,
                  setpoint_band=0.05):
    # type: (Scenario, BuildingSpec, Sequence[SimulationConfig], Optional[dict], Sequence[ApplianceSpec], int, float, float) -> List[GridRow]
    """Metrics for every config, in config order; failed cells carry their error."""
    configs = list(configs)
    if not configs:
        raise ConfigError("case grid is empty")
    overrides = dict(comfort_overrides or {})
    rows = [GridRow(i, c) for i, c in enumerate(configs)]
    with ThreadPoolExecutor(max_workers=max(1, min(threads, len(configs)))) as pool:
        futures = {
            pool.submit(_run_cell, scenario, building, row.config, overrides, appliances,
                        low_price_threshold, setpoint_band): row
            for row in rows
        }
        for future in as_completed(futures):
            row = futures[future]
            try:
                row.metrics = future.result()
            except Exception as exc:
                row.error = str(exc)
                log("Warning: case %d (%s) failed: %s" % (row.index, row.config.label, exc))
    return rows


def comfort_case_grid(base=None):
    # type: (Optional[SimulationConfig]) -> List[SimulationConfig]
    """Heater x bound strategy x flexibility: 12 cases."""
    base = base or SimulationConfig()
    return [
        dataclasses.replace(base, heater=h, bound_strategy=s, flexibility=f)
        for h in HeaterVariant
        for s in BoundStrategy
        for f in Flexibility
    ]


def ua_sweep_grid(base=None, factors=UA_FACTORS, flexibilities=(Flexibility.FLEX,)):
    # type: (Optional[SimulationConfig], Sequence[float], Sequence[Flexibility]) -> List[SimulationConfig]
    """Heater x UA^{r,a} factor x flexibility, windowless and without lighting."""
    base = base or SimulationConfig()
    return [
        dataclasses.replace(base, heater=h, flexibility=f, ua_ra_factor=float(k),
                            bound_strategy=BoundStrategy.PRICE_INDEPENDENT,
                            lighting_enabled=False, windowless=True)
        for h in HeaterVariant
        for f in flexibilities
        for k in factors
    ]


def lighting_grid(base=None):
    # type: (Optional[SimulationConfig]) -> List[SimulationConfig]
    """HVAC, price-independent bounds, each flexibility with and without lighting."""
    base = base or SimulationConfig()
    return [
        dataclasses.replace(base, heater=HeaterVariant.HVAC, flexibility=f, lighting_enabled=lit,
                            bound_strategy=BoundStrategy.PRICE_INDEPENDENT)
        for f in Flexibility
        for lit in (True, False)
    ]


GRID_PRESETS = {
    "comfort": comfort_case_grid,
    "ua-cost": ua_sweep_grid,
    "ua-share": lambda base=None: ua_sweep_grid(base, flexibilities=tuple(Flexibility)),
    "lighting": lighting_grid,
}


def build_grid(name, base=None):
    # type: (str, Optional[SimulationConfig]) -> List[SimulationConfig]
    try:
        factory = GRID_PRESETS[name]
    except KeyError:
        raise ConfigError("unknown grid preset %r (choose from %s)"
                          % (name, ", ".join(sorted(GRID_PRESETS))))
    return factory(base)
