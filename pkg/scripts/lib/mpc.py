"""One horizon of the household economic MPC.

The horizon problem splits into two independent parts. Appliance cycles
enter only the power balance and the objective, so each is scheduled exactly
by enumeration (lib.loads). The remaining continuous problem (device powers,
blind position, light level, comfort slacks) is a linear program over the
controls and the end-of-period states, tied together by one sparse equality
row per state and period:

    x_k+1 - A_k x_k - B_k u_k = E_k z_k

Comfort rows then bound each state directly, softened by penalized slacks.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Sequence, Tuple

import numpy as np

from lib import lp_solver
from lib.comfort import ComfortProfile, build_comfort_bounds
from lib.errors import (
    InfeasibleHorizonError, ModelError, NoFeasibleStartError, OracleLimitError, SolverError,
)
from lib.loads import (
    TIE_RTOL, LoadSchedule, UninterruptibleLoad, feasible_starts, power_profile,
    schedule_uninterruptible, start_cost,
)
from lib.lp_solver import LinearProgram, LpBuilder, LpStatus, make_row
from lib.model_core import (
    POWER_CONTROLS, BuildingSpec, ControlVector, DiscreteModel, DisturbanceSeries,
    HeaterVariant, StateVector, as_series, build_model, simulate_states,
)

ORACLE_CAP = 10 ** 6

SLACK_NAMES = ("room", "waterheater", "fridge", "light")


@dataclass(frozen=True)
class HorizonProblem:
    """Everything one horizon solve needs; all sequences are horizon_len long.

    occupied holds the period indices with occupancy > 0. day_offset is the
    position of period 0 within its calendar day, used by price-dependent
    comfort bounds.
    """

    building: BuildingSpec
    model: DiscreteModel
    x0: StateVector
    prices: np.ndarray
    disturbances: DisturbanceSeries
    comfort: ComfortProfile
    occupied: FrozenSet[int]
    loads: Tuple[UninterruptibleLoad, ...] = ()
    horizon_len: int = 0
    lighting_enabled: bool = True
    periods_per_day: int = 96
    day_offset: int = 0

    def __post_init__(self):
        prices = np.array(self.prices, dtype=float)
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "disturbances", as_series(self.disturbances))
        object.__setattr__(self, "occupied", frozenset(int(t) for t in self.occupied))
        object.__setattr__(self, "loads", tuple(self.loads))
        if not self.horizon_len:
            object.__setattr__(self, "horizon_len", len(prices))

    @classmethod
    def create(cls, building, variant, x0, prices, disturbances, comfort, loads=(),
               dt=900.0, lighting_enabled=True, day_offset=0):
        # type: (BuildingSpec, HeaterVariant, StateVector, Sequence[float], DisturbanceSeries, ComfortProfile, Sequence[UninterruptibleLoad], float, bool, int) -> HorizonProblem
        """Build the model for the horizon and derive the occupied periods."""
        variant = HeaterVariant.parse(variant)
        series = as_series(disturbances)
        model = build_model(building, variant, series, dt)
        occupied = frozenset(np.flatnonzero(series.occupancy > 0).tolist())
        return cls(
            building=building,
            model=model,
            x0=x0.for_variant(variant),
            prices=np.asarray(prices, dtype=float),
            disturbances=series,
            comfort=comfort,
            occupied=occupied,
            loads=tuple(loads),
            horizon_len=len(series),
            lighting_enabled=lighting_enabled,
            periods_per_day=int(round(86400.0 / dt)),
            day_offset=day_offset,
        ).validate()

    @property
    def dt_hours(self):
        # type: () -> float
        return self.model.dt / 3600.0

    def validate(self):
        # type: () -> HorizonProblem
        n = self.horizon_len
        if n < 1:
            raise ModelError("horizon_len must be >= 1")
        lengths = {"prices": len(self.prices), "disturbances": len(self.disturbances),
                   "model": self.model.n_steps}
        bad = {k: v for k, v in lengths.items() if v != n}
        if bad:
            raise ModelError("horizon_len is %d but %s" % (
                n, ", ".join("%s has %d periods" % kv for kv in sorted(bad.items()))))
        if not np.all(np.isfinite(self.prices)):
            raise ModelError("prices must be finite")
        if any(t < 0 or t >= n for t in self.occupied):
            raise ModelError("occupied periods must lie in [0, %d)" % n)
        self.comfort.validate()
        self.x0.to_array(self.model.variant)
        return self


@dataclass(frozen=True)
class VariableIndex:
    """Column of every LP variable; -1 marks a variable that does not exist."""

    controls: Tuple[str, ...]
    control: np.ndarray
    state: np.ndarray
    slack_room: np.ndarray
    slack_wh: np.ndarray
    slack_rf: np.ndarray
    light: np.ndarray
    slack_light: np.ndarray

    def control_values(self, y):
        # type: (np.ndarray) -> np.ndarray
        return np.asarray(y)[self.control]

    def state_values(self, y):
        # type: (np.ndarray) -> np.ndarray
        return np.asarray(y)[self.state]


@dataclass
class DayPlan:
    """Solved horizon: committed-ready trajectories and costs.

    states are end-of-period temperatures, shape (H, n_states); controls are
    the period inputs, shape (H, n_controls); slacks columns follow
    SLACK_NAMES; load_power has one row per load.
    """

    variant: HeaterVariant
    state_names: Tuple[str, ...]
    control_names: Tuple[str, ...]
    states: np.ndarray
    controls: np.ndarray
    slacks: np.ndarray
    light: np.ndarray
    load_names: Tuple[str, ...]
    load_starts: Dict[str, int]
    load_power: np.ndarray
    standby: np.ndarray
    building_power: np.ndarray
    prices: np.ndarray
    room_lower: np.ndarray
    room_upper: np.ndarray
    dt_hours: float
    rho_temp: float
    rho_light: float
    electricity_cost: float = field(init=False, default=0.0)
    penalty_cost: float = field(init=False, default=0.0)
    lp_iterations: int = 0
    bland_activated: bool = False

    def __post_init__(self):
        self.electricity_cost, self.penalty_cost = plan_costs(
            self.prices, self.building_power, self.slacks, self.dt_hours,
            self.rho_temp, self.rho_light)

    @property
    def total_cost(self):
        # type: () -> float
        return self.electricity_cost + self.penalty_cost

    @property
    def horizon_len(self):
        # type: () -> int
        return len(self.prices)

    def state_vector(self, t):
        # type: (int) -> StateVector
        return StateVector.from_array(self.variant, self.states[t])

    def control_vector(self, t):
        # type: (int) -> ControlVector
        return ControlVector.from_array(self.variant, self.controls[t])

    def head(self, n):
        # type: (int) -> DayPlan
        """The first n periods, with costs recomputed over them."""
        return replace(
            self,
            states=self.states[:n],
            controls=self.controls[:n],
            slacks=self.slacks[:n],
            light=self.light[:n],
            load_starts={k: s for k, s in self.load_starts.items() if s < n},
            load_power=self.load_power[:, :n],
            standby=self.standby[:n],
            building_power=self.building_power[:n],
            prices=self.prices[:n],
            room_lower=self.room_lower[:n],
            room_upper=self.room_upper[:n],
        )


def plan_costs(prices, building_power, slacks, dt_hours, rho_temp, rho_light):
    # type: (np.ndarray, np.ndarray, np.ndarray, float, float, float) -> Tuple[float, float]
    """(electricity cost, penalty cost) of a trajectory."""
    electricity = dt_hours * math.fsum(np.asarray(prices) * np.asarray(building_power))
    slacks = np.asarray(slacks).reshape(-1, len(SLACK_NAMES))
    penalty = (rho_temp * math.fsum(slacks[:, :3].ravel())
               + rho_light * math.fsum(slacks[:, 3]))
    return electricity, penalty


def building_power(controls, control_names, load_power, standby):
    # type: (np.ndarray, Sequence[str], np.ndarray, np.ndarray) -> np.ndarray
    """u^b_t: device powers, then appliance cycles, then standby, summed in that order."""
    controls = np.asarray(controls, dtype=float)
    total = np.zeros(controls.shape[0])
    for j, name in enumerate(control_names):
        if name in POWER_CONTROLS:
            total = total + controls[:, j]
    for row in np.atleast_2d(load_power):
        total = total + row
    return total + np.asarray(standby, dtype=float)


def replay_states(model, x0, controls, disturbances):
    # type: (DiscreteModel, StateVector, np.ndarray, DisturbanceSeries) -> np.ndarray
    """End-of-period states obtained by stepping the model from x0."""
    series = as_series(disturbances)
    return simulate_states(model, x0.to_array(model.variant), np.asarray(controls, dtype=float),
                           series.z_matrix())


def _control_bounds(problem):
    building, comfort = problem.building, problem.comfort
    names = problem.model.controls
    n, nu = problem.horizon_len, len(names)
    lower = np.zeros((n, nu))
    upper = np.tile([building.pmax(c) for c in names], (n, 1)).astype(float)
    if not problem.lighting_enabled:
        upper[:, names.index("al")] = 0.0
    occupied = sorted(problem.occupied)
    if occupied:
        lower[occupied, names.index("bl")] = comfort.blind_min
    return lower, upper


def assemble_lp(problem):
    # type: (HorizonProblem) -> Tuple[LinearProgram, VariableIndex]
    """Continuous subproblem of a horizon and its variable map.

    States are free variables; each period contributes ns dynamics rows and
    two comfort rows per bounded state.
    """
    problem.validate()
    model, comfort, building = problem.model, problem.comfort, problem.building
    n, names = problem.horizon_len, model.controls
    nu, ns = len(names), len(model.states)
    dt_h = problem.dt_hours
    series = problem.disturbances
    z = series.z_matrix()

    builder = LpBuilder()
    lower, upper = _control_bounds(problem)
    control = np.empty((n, nu), dtype=np.int64)
    for k in range(n):
        for c, name in enumerate(names):
            cost = problem.prices[k] * dt_h if name in POWER_CONTROLS else 0.0
            control[k, c] = builder.add_var("u_%s_%d" % (name, k), lower[k, c], upper[k, c], cost)
    state = np.empty((n, ns), dtype=np.int64)
    for k in range(n):
        for i, name in enumerate(model.states):
            state[k, i] = builder.add_var("x_%s_%d" % (name, k), -np.inf, np.inf)

    def slack_block(label, rho, periods):
        idx = np.full(n, -1, dtype=np.int64)
        for k in periods:
            idx[k] = builder.add_var("v_%s_%d" % (label, k), 0.0, np.inf, rho)
        return idx

    all_periods = range(n)
    slack_room = slack_block("r", comfort.rho_temp, all_periods)
    slack_wh = slack_block("wh", comfort.rho_temp, all_periods)
    slack_rf = slack_block("rf", comfort.rho_temp, all_periods)

    light = np.full(n, -1, dtype=np.int64)
    slack_light = np.full(n, -1, dtype=np.int64)
    lit = sorted(problem.occupied) if problem.lighting_enabled else []
    for k in lit:
        light[k] = builder.add_var("l_%d" % k, 0.0, np.inf, 0.0)
    slack_light[lit] = slack_block("l", comfort.rho_light, lit)[lit]

    room_lo, room_hi = build_comfort_bounds(
        comfort, problem.prices, n, problem.periods_per_day, problem.day_offset)
    bounded = (
        (model.state_index("room"), slack_room, room_lo, room_hi),
        (model.state_index("waterheater"), slack_wh,
         np.full(n, comfort.wh_bounds[0]), np.full(n, comfort.wh_bounds[1])),
        (model.state_index("fridge"), slack_rf,
         np.full(n, comfort.rf_bounds[0]), np.full(n, comfort.rf_bounds[1])),
    )

    x0 = problem.x0.to_array(model.variant)
    for k in range(n):
        a_k, b_k = model.a_mats[k], model.b_mats[k]
        rhs = model.e_mats[k] @ z[k]
        if k == 0:
            rhs = rhs + a_k @ x0
        for i in range(ns):
            coefficients = {int(state[k, i]): 1.0}
            for c in range(nu):
                coefficients[int(control[k, c])] = -b_k[i, c]
            if k:
                for j in range(ns):
                    coefficients[int(state[k - 1, j])] = -a_k[i, j]
            builder.add_eq(make_row(coefficients, rhs[i], "dyn_%s_%d" % (model.states[i], k)))
        for i, slack, lo, hi in bounded:
            x_ki, v_ki = int(state[k, i]), int(slack[k])
            builder.add_le(make_row({x_ki: 1.0, v_ki: -1.0}, hi[k], "%s_hi_%d" % (model.states[i], k)))
            builder.add_le(make_row({x_ki: -1.0, v_ki: -1.0}, -lo[k], "%s_lo_%d" % (model.states[i], k)))

    lux_lo, lux_hi = comfort.light_bounds_lux
    lm_lo, lm_hi = lux_lo * building.floor_area, lux_hi * building.floor_area
    al, bl = names.index("al"), names.index("bl")
    for k in lit:
        builder.add_eq(make_row({
            light[k]: 1.0,
            control[k, al]: -building.lum_efficacy_indoor,
            control[k, bl]: -float(series.solar_illuminance[k]),
        }, 0.0, "light_%d" % k))
        builder.add_le(make_row({light[k]: -1.0, slack_light[k]: -1.0}, -lm_lo, "light_lo_%d" % k))
        builder.add_le(make_row({light[k]: 1.0, slack_light[k]: -1.0}, lm_hi, "light_hi_%d" % k))

    builder.objective_constant = dt_h * math.fsum(problem.prices * series.standby)
    index = VariableIndex(names, control, state, slack_room, slack_wh, slack_rf, light, slack_light)
    return builder.build(), index


def _solve_continuous(problem):
    lp, index = assemble_lp(problem)
    solution = lp_solver.solve(lp)
    if solution.status in (LpStatus.INFEASIBLE, LpStatus.UNBOUNDED):
        raise InfeasibleHorizonError(solution.status.value)
    if not solution.optimal:
        raise SolverError(solution.status.value, "after %d iterations" % solution.iterations)
    return index, solution


def _compose_plan(problem, index, solution, schedules):
    # type: (HorizonProblem, VariableIndex, lp_solver.LpSolution, Sequence[LoadSchedule]) -> DayPlan
    model, comfort, building = problem.model, problem.comfort, problem.building
    n = problem.horizon_len
    series = problem.disturbances
    controls = index.control_values(solution.primal)
    states = replay_states(model, problem.x0, controls, series)

    room_lo, room_hi = build_comfort_bounds(
        comfort, problem.prices, n, problem.periods_per_day, problem.day_offset)
    slacks = np.zeros((n, len(SLACK_NAMES)))
    for col, (state, lo, hi) in enumerate((
            ("room", room_lo, room_hi),
            ("waterheater", comfort.wh_bounds[0], comfort.wh_bounds[1]),
            ("fridge", comfort.rf_bounds[0], comfort.rf_bounds[1]))):
        x = states[:, model.state_index(state)]
        slacks[:, col] = np.maximum(0.0, np.maximum(lo - x, x - hi))

    al, bl = model.control_index("al"), model.control_index("bl")
    light = building.lum_efficacy_indoor * controls[:, al] + series.solar_illuminance * controls[:, bl]
    if problem.lighting_enabled and problem.occupied:
        occ = sorted(problem.occupied)
        lux_lo, lux_hi = comfort.light_bounds_lux
        lm = light[occ]
        slacks[occ, 3] = np.maximum(0.0, np.maximum(lux_lo * building.floor_area - lm,
                                                    lm - lux_hi * building.floor_area))

    load_power = (np.vstack([s.power for s in schedules]) if schedules
                  else np.zeros((0, n)))
    return DayPlan(
        variant=model.variant,
        state_names=model.states,
        control_names=model.controls,
        states=states,
        controls=controls,
        slacks=slacks,
        light=light,
        load_names=tuple(s.name for s in schedules),
        load_starts={s.name: s.start for s in schedules},
        load_power=load_power,
        standby=np.array(series.standby),
        building_power=building_power(controls, model.controls, load_power, series.standby),
        prices=np.array(problem.prices),
        room_lower=room_lo,
        room_upper=room_hi,
        dt_hours=problem.dt_hours,
        rho_temp=comfort.rho_temp,
        rho_light=comfort.rho_light,
        lp_iterations=solution.iterations,
        bland_activated=solution.bland_activated,
    )


def solve_horizon(problem):
    # type: (HorizonProblem) -> DayPlan
    """LP for the continuous part, enumeration for each appliance cycle."""
    schedules = [schedule_uninterruptible(load, problem.prices, problem.dt_hours)
                 for load in problem.loads]
    index, solution = _solve_continuous(problem)
    return _compose_plan(problem, index, solution, schedules)


def joint_oracle(problem, cap=ORACLE_CAP):
    # type: (HorizonProblem, int) -> DayPlan
    """Exhaustive search over every joint combination of appliance starts.

    Used to check that scheduling each load on its own loses nothing.
    """
    starts = []  # type: List[List[int]]
    costs = []  # type: List[np.ndarray]
    for load in problem.loads:
        load.validate()
        options = feasible_starts(load, problem.horizon_len)
        if not options:
            raise NoFeasibleStartError(load.name, load.cycle_len)
        starts.append(options)
        costs.append(np.array([start_cost(load, problem.prices, s, problem.dt_hours) for s in options]))
    combos = math.prod(len(s) for s in starts) if starts else 1
    if combos > cap:
        raise OracleLimitError("joint oracle needs %d start combinations, cap is %d" % (combos, cap))

    index, solution = _solve_continuous(problem)
    if not starts:
        return _compose_plan(problem, index, solution, [])

    total = costs[0]
    for extra in costs[1:]:
        total = np.add.outer(total, extra)
    flat = np.ravel(total)
    best = flat.min()
    first = int(np.flatnonzero(flat <= best + TIE_RTOL * max(1.0, abs(best)))[0])
    choice = np.unravel_index(first, total.shape)
    schedules = []
    for load, options, pick in zip(problem.loads, starts, choice):
        s = options[int(pick)]
        schedules.append(LoadSchedule(load.name, s, power_profile(load, s, problem.horizon_len),
                                      start_cost(load, problem.prices, s, problem.dt_hours)))
    return _compose_plan(problem, index, solution, schedules)

