"""Tests for the horizon solve: LP assembly, decomposition and plan accounting."""

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "scripts"))

from lib import lp_solver
from lib.comfort import BoundStrategy, ComfortProfile, Flexibility
from lib.errors import (
    InfeasibleHorizonError, ModelError, NoFeasibleStartError, OracleLimitError, SolverError,
)
from lib.loads import UninterruptibleLoad
from lib.lp_solver import LpSolution, LpStatus, solve, verify
from lib.model_core import BuildingSpec, HeaterVariant, StateVector
from lib.mpc import (
    SLACK_NAMES,
    HorizonProblem,
    assemble_lp,
    building_power,
    joint_oracle,
    plan_costs,
    replay_states,
    solve_horizon,
)
from lib.scenario import generate_synthetic_scenario

PI = BoundStrategy.PRICE_INDEPENDENT
PD = BoundStrategy.PRICE_DEPENDENT


def _prices(n=24, seed=0):
    return np.round(np.random.default_rng(seed).uniform(0.05, 0.4, n), 3)


class TestAssembleLp:
    def test_variable_and_row_counts(self, make_problem):
        occupancy = np.zeros(24)
        occupancy[[6, 7, 18]] = 1.0
        problem = make_problem(_prices(), occupancy=occupancy)
        lp, index = assemble_lp(problem)
        nu, ns = len(problem.model.controls), len(problem.model.states)
        assert lp.n_vars == 24 * nu + 24 * ns + 3 * 24 + 2 * 3
        assert len(lp.eq_rows) == 24 * ns + 3
        assert len(lp.ineq_rows) == 6 * 24 + 2 * 3
        assert list(np.flatnonzero(index.light >= 0)) == [6, 7, 18]

    def test_lighting_disabled_drops_light_variables(self, make_problem):
        problem = make_problem(_prices(), occupancy=1.0, lighting=False)
        lp, index = assemble_lp(problem)
        assert np.all(index.light == -1)
        assert len(lp.eq_rows) == 24 * len(problem.model.states)
        al = index.control[:, problem.model.control_index("al")]
        assert np.all(lp.upper_bounds[al] == 0.0)

    def test_blind_minimum_in_occupied_periods(self, make_problem):
        occupancy = np.zeros(24)
        occupancy[5] = 2.0
        comfort = ComfortProfile.preset(Flexibility.FLEX, blind_min=0.3)
        problem = make_problem(_prices(), occupancy=occupancy, comfort=comfort)
        lp, index = assemble_lp(problem)
        bl = index.control[:, problem.model.control_index("bl")]
        assert lp.lower_bounds[bl[5]] == 0.3
        assert lp.lower_bounds[bl[4]] == 0.0

    def test_standby_is_the_objective_constant(self, make_problem):
        prices = _prices()
        problem = make_problem(prices, standby=0.2)
        lp, _ = assemble_lp(problem)
        assert lp.objective_constant == pytest.approx(0.2 * prices.sum())

    def test_power_controls_carry_price(self, make_problem):
        prices = _prices()
        problem = make_problem(prices)
        lp, index = assemble_lp(problem)
        heat = index.control[:, problem.model.control_index("heat")]
        bl = index.control[:, problem.model.control_index("bl")]
        assert lp.objective[heat] == pytest.approx(prices)
        assert np.all(lp.objective[bl] == 0.0)

    def test_solution_satisfies_every_row(self, make_problem):
        problem = make_problem(_prices(), occupancy=1.0)
        lp, _ = assemble_lp(problem)
        sol = solve(lp)
        assert sol.optimal
        assert verify(lp, sol.primal).max_violation <= 1e-7

    def test_mismatched_lengths(self, make_problem, make_series):
        with pytest.raises(ModelError, match="prices has 23 periods"):
            make_problem(_prices(23), series=make_series(24))

    def test_state_variables_follow_the_model(self, make_problem):
        problem = make_problem(_prices(), occupancy=1.0, draw=2.0, illuminance=3000.0)
        lp, index = assemble_lp(problem)
        sol = solve(lp)
        assert sol.optimal
        states = index.state_values(sol.primal)
        replayed = replay_states(problem.model, problem.x0, index.control_values(sol.primal),
                                 problem.disturbances)
        assert np.max(np.abs(states - replayed)) <= 1e-6

    def test_dynamics_rows_are_sparse(self, make_problem):
        problem = make_problem(_prices(), lighting=False)
        lp, _ = assemble_lp(problem)
        nu, ns = len(problem.model.controls), len(problem.model.states)
        assert max(len(row.indices) for row in lp.eq_rows) <= 1 + nu + ns
        assert all(row.name.startswith("dyn_") for row in lp.eq_rows)


class TestSolveHorizon:
    def test_replay_matches_plan(self, make_problem):
        problem = make_problem(_prices(), occupancy=1.0, draw=2.0)
        plan = solve_horizon(problem)
        replayed = replay_states(problem.model, problem.x0, plan.controls, problem.disturbances)
        assert np.max(np.abs(replayed - plan.states)) <= 1e-9

    def test_power_identity_and_costs(self, make_problem):
        load = UninterruptibleLoad("washer", (2.0, 0.5), frozenset(range(3, 10)))
        prices = _prices()
        plan = solve_horizon(make_problem(prices, loads=[load], standby=0.05))
        expected = building_power(plan.controls, plan.control_names, plan.load_power, plan.standby)
        assert np.array_equal(plan.building_power, expected)
        assert plan.electricity_cost == pytest.approx(float(np.sum(prices * plan.building_power)))
        assert plan.total_cost == pytest.approx(plan.electricity_cost + plan.penalty_cost)

    def test_flex_keeps_comfort(self, make_problem):
        plan = solve_horizon(make_problem(_prices(), occupancy=1.0))
        assert plan.penalty_cost <= 1e-3
        room = plan.states[:, plan.state_names.index("room")]
        assert np.all(room >= plan.room_lower - 1e-6)
        assert np.all(room <= plan.room_upper + 1e-6)

    def test_occupied_light_level(self, make_problem):
        occupancy = np.zeros(24)
        occupancy[[7, 8]] = 1.0
        plan = solve_horizon(make_problem(_prices(), occupancy=occupancy))
        lumen_floor = 100.0 * BuildingSpec().floor_area
        assert np.all(plan.light[[7, 8]] >= lumen_floor - 1e-6)
        assert np.all(plan.slacks[:, SLACK_NAMES.index("light")] <= 1e-6)

    def test_single_period_without_need_stays_off(self, make_problem):
        comfort = ComfortProfile.preset(Flexibility.EXTRAFLEX, alpha=10.0)
        plan = solve_horizon(make_problem([0.3], comfort=comfort, dt=900.0, lighting=False))
        assert np.allclose(plan.controls, 0.0, atol=1e-9)
        assert plan.electricity_cost == pytest.approx(0.0, abs=1e-9)

    def test_zero_prices(self, make_problem):
        load = UninterruptibleLoad("dryer", (2.5, 2.5), frozenset(range(4, 12)))
        plan = solve_horizon(make_problem(np.zeros(24), loads=[load]))
        assert plan.load_starts == {"dryer": 4}
        assert plan.electricity_cost == 0.0

    def test_infeasible_load_window(self, make_problem):
        load = UninterruptibleLoad("oven", (2.0, 1.2, 1.2), frozenset({1, 2}))
        with pytest.raises(NoFeasibleStartError):
            solve_horizon(make_problem(_prices(), loads=[load]))

    def test_floor_heating_quarter_hour(self, make_problem):
        problem = make_problem(_prices(8), heater=HeaterVariant.FLOOR_HEATING, dt=900.0)
        plan = solve_horizon(problem)
        assert plan.states.shape == (8, 5)
        assert plan.control_names == ("hp", "al", "bl", "rf", "wh")
        replayed = replay_states(problem.model, problem.x0, plan.controls, problem.disturbances)
        assert np.max(np.abs(replayed - plan.states)) <= 1e-9

    def test_head_recomputes_costs(self, make_problem):
        load = UninterruptibleLoad("late", (1.0,), frozenset({20}))
        prices = _prices()
        plan = solve_horizon(make_problem(prices, loads=[load]))
        head = plan.head(12)
        assert head.horizon_len == 12
        assert "late" not in head.load_starts
        assert head.electricity_cost == pytest.approx(float(np.sum(prices[:12] * plan.building_power[:12])))

    def test_state_vector_round_trip(self, make_problem):
        plan = solve_horizon(make_problem(_prices(4)))
        x = plan.state_vector(3)
        assert x.floor is None
        assert x.room == plan.states[3, 0]


class TestComfortCases:
    """Relaxed bands can only lower the optimum of one horizon."""

    def _plan(self, make_problem, flexibility, strategy, prices):
        occupancy = np.zeros(len(prices))
        occupancy[6:9] = 1.0
        problem = make_problem(prices, flexibility, strategy, occupancy=occupancy, ambient=2.0, draw=1.0)
        return solve_horizon(problem)

    def test_noflex_strategies_identical(self, make_problem):
        prices = _prices(seed=3)
        a = self._plan(make_problem, Flexibility.NOFLEX, PI, prices)
        b = self._plan(make_problem, Flexibility.NOFLEX, PD, prices)
        assert a.total_cost == b.total_cost
        assert np.array_equal(a.controls, b.controls)

    @pytest.mark.parametrize("strategy", [PI, PD])
    def test_extraflex_not_dearer(self, make_problem, strategy):
        prices = _prices(seed=5)
        noflex = self._plan(make_problem, Flexibility.NOFLEX, strategy, prices).total_cost
        flex = self._plan(make_problem, Flexibility.FLEX, strategy, prices).total_cost
        extra = self._plan(make_problem, Flexibility.EXTRAFLEX, strategy, prices).total_cost
        assert extra <= flex + 1e-6
        assert extra <= noflex + 1e-6

    @pytest.mark.parametrize("flexibility", [Flexibility.FLEX, Flexibility.EXTRAFLEX])
    def test_price_dependent_not_cheaper(self, make_problem, flexibility):
        prices = _prices(seed=7)
        pi = self._plan(make_problem, flexibility, PI, prices).total_cost
        pd = self._plan(make_problem, flexibility, PD, prices).total_cost
        assert pd >= pi - 1e-6

    def test_leakier_envelope_costs_more(self, make_problem):
        prices = _prices(seed=9)
        costs = []
        for factor in (0.5, 1.0, 2.0, 4.0):
            building = BuildingSpec().with_ua_factor(factor)
            plan = solve_horizon(make_problem(prices, building=building, lighting=False, ambient=0.0))
            costs.append(plan.total_cost)
        assert all(b >= a - 1e-6 for a, b in zip(costs, costs[1:]))


class TestJointOracle:
    def test_matches_decomposition(self, make_problem):
        loads = [
            UninterruptibleLoad("a", (1.0, 0.4), frozenset(range(2, 8))),
            UninterruptibleLoad("b", (2.0, 2.0, 0.5), frozenset(range(5, 12))),
        ]
        problem = make_problem(_prices(seed=2), loads=loads)
        decomposed = solve_horizon(problem)
        oracle = joint_oracle(problem)
        assert oracle.total_cost == pytest.approx(decomposed.total_cost, abs=1e-9)
        assert oracle.load_starts == decomposed.load_starts

    def test_no_loads_is_lp_alone(self, make_problem):
        problem = make_problem(_prices(seed=4))
        assert joint_oracle(problem).total_cost == pytest.approx(solve_horizon(problem).total_cost, abs=1e-12)

    def test_combination_cap(self, make_problem):
        loads = [UninterruptibleLoad("a", (1.0,), frozenset(range(10)))]
        with pytest.raises(OracleLimitError):
            joint_oracle(make_problem(_prices(), loads=loads), cap=5)


class TestAccounting:
    def test_building_power_sums_powers_only(self):
        controls = np.array([[0.5, 0.0, 0.01, 0.7, 0.1, 0.2]])
        names = ("heat", "cool", "al", "bl", "rf", "wh")
        total = building_power(controls, names, np.array([[1.0]]), np.array([0.05]))
        assert total == pytest.approx([0.5 + 0.01 + 0.1 + 0.2 + 1.0 + 0.05])

    def test_penalty_has_no_time_factor(self):
        slacks = np.array([[2.0, 0.0, 0.0, 0.0], [0.0, 0.5, 0.0, 3.0]])
        electricity, penalty = plan_costs(np.array([0.2, 0.2]), np.array([1.0, 1.0]), slacks,
                                          0.25, rho_temp=1000.0, rho_light=10.0)
        assert electricity == pytest.approx(0.1)
        assert penalty == pytest.approx(2500.0 + 30.0)

    def test_initial_state_for_variant(self, make_problem):
        problem = make_problem(_prices(4), x0=StateVector(room=19.0))
        assert problem.x0.floor is None
        assert problem.x0.room == 19.0


class TestSolverOutcome:
    def _stub(self, monkeypatch, status):
        def fake_solve(lp, max_iter=None):
            return LpSolution(status, float("nan"), np.zeros(lp.n_vars), 17)

        monkeypatch.setattr(lp_solver, "solve", fake_solve)

    @pytest.mark.parametrize("status", [LpStatus.NUMERICAL, LpStatus.ITERATION_LIMIT])
    def test_solver_failure_is_not_infeasibility(self, make_problem, monkeypatch, status):
        self._stub(monkeypatch, status)
        with pytest.raises(SolverError) as exc:
            solve_horizon(make_problem(_prices(4)))
        assert exc.value.status == status.value
        assert "17 iterations" in str(exc.value)

    def test_infeasible_status(self, make_problem, monkeypatch):
        self._stub(monkeypatch, LpStatus.INFEASIBLE)
        with pytest.raises(InfeasibleHorizonError):
            solve_horizon(make_problem(_prices(4)))

    def test_controls_are_not_clipped(self, make_problem, monkeypatch):
        problem = make_problem(_prices(4), lighting=False)
        lp, index = assemble_lp(problem)
        heat = problem.model.control_index("heat")
        primal = np.zeros(lp.n_vars)
        primal[index.control[0, heat]] = BuildingSpec().pmax("heat") + 1e-3

        def fake_solve(lp, max_iter=None):
            return LpSolution(LpStatus.OPTIMAL, 0.0, primal.copy(), 1)

        monkeypatch.setattr(lp_solver, "solve", fake_solve)
        plan = solve_horizon(problem)
        assert plan.controls[0, heat] == primal[index.control[0, heat]]


class TestQuarterHourHorizons:
    """One day committed plus one day of lookahead at dt=900."""

    @pytest.fixture(scope="class")
    def scenario(self):
        return generate_synthetic_scenario(days=3, dt=900.0, seed=0)

    def _problem(self, scenario, heater, flexibility, start=0, x0=None):
        stop = start + 192
        return HorizonProblem.create(
            BuildingSpec(), heater, x0 or StateVector(),
            prices=scenario.prices[start:stop],
            disturbances=scenario.disturbances(start, stop),
            comfort=ComfortProfile.preset(flexibility),
            dt=900.0,
            day_offset=scenario.day_offset(start),
        )

    @pytest.mark.parametrize("flexibility", list(Flexibility))
    @pytest.mark.parametrize("heater", [HeaterVariant.HVAC, HeaterVariant.FLOOR_HEATING])
    def test_optimal_point_is_feasible(self, scenario, heater, flexibility):
        lp, _ = assemble_lp(self._problem(scenario, heater, flexibility))
        sol = solve(lp)
        assert sol.optimal
        assert verify(lp, sol.primal).max_violation <= 1e-7

    def test_second_day_from_committed_state(self, scenario):
        first = solve_horizon(self._problem(scenario, HeaterVariant.HVAC, Flexibility.NOFLEX))
        problem = self._problem(scenario, HeaterVariant.HVAC, Flexibility.NOFLEX, start=96,
                                x0=first.state_vector(95))
        lp, _ = assemble_lp(problem)
        sol = solve(lp)
        assert sol.optimal
        assert verify(lp, sol.primal).max_violation <= 1e-7

    def test_horizon_solves_within_seconds(self, scenario):
        problem = self._problem(scenario, HeaterVariant.HVAC, Flexibility.NOFLEX)
        started = time.perf_counter()
        plan = solve_horizon(problem)
        elapsed = time.perf_counter() - started
        assert plan.horizon_len == 192
        assert elapsed < 10.0, "192-period horizon took %.1fs" % elapsed
