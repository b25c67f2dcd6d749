"""Seeded oracle suites behind the `validate` command.

- LP vertex oracle: small bounded random LPs solved by the simplex and by
  enumerating every basic solution.
- Appliance brute force: the cheapest-start search against a plain scan of
  every period.
- Joint decomposition oracle: per-load scheduling plus one LP against the
  exhaustive joint search.
"""

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from lib import lp_solver
from lib.comfort import ComfortProfile, Flexibility
from lib.errors import NoFeasibleStartError
from lib.loads import TIE_RTOL, UninterruptibleLoad, schedule_uninterruptible
from lib.log import log
from lib.lp_solver import LinearProgram, LpStatus, dense_row
from lib.model_core import BuildingSpec, DisturbanceSeries, HeaterVariant, StateVector
from lib.mpc import HorizonProblem, joint_oracle, solve_horizon

LP_TOL = 1e-6
JOINT_TOL = 1e-9


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    failures: List[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self):
        # type: () -> bool
        return not self.failures

    def summary(self):
        # type: () -> str
        return "%-10s %5d cases  %3d failures  %.1fs  %s" % (
            self.name, self.cases, len(self.failures), self.seconds,
            "ok" if self.passed else "FAILED")


def random_lp(rng, max_vars=5, max_eq=2, max_ineq=4):
    # type: (np.random.Generator, int, int, int) -> LinearProgram
    """Bounded LP that is feasible by construction around a random point.

    Every other instance uses small integer coefficients, which makes
    degenerate vertices common.
    """
    integer = bool(rng.integers(0, 2))
    while True:
        n = int(rng.integers(1, max_vars + 1))
        m_eq = int(rng.integers(0, min(max_eq, n) + 1))
        m_in = int(rng.integers(0, max_ineq + 1))

        def coefficients(shape):
            if integer:
                return rng.integers(-3, 4, size=shape).astype(float)
            return np.round(rng.normal(size=shape), 3)

        a_eq = coefficients((m_eq, n))
        if m_eq and np.linalg.matrix_rank(a_eq) < m_eq:
            continue
        lo = np.round(rng.uniform(-5.0, 0.0, n), 2)
        hi = lo + np.round(rng.uniform(0.5, 5.0, n), 2)
        point = rng.uniform(lo, hi)
        a_in = coefficients((m_in, n))
        b_eq = a_eq @ point
        b_in = a_in @ point + (0.0 if integer else rng.uniform(0.0, 2.0, m_in))
        return LinearProgram(
            n_vars=n,
            objective=coefficients(n),
            eq_rows=tuple(dense_row(a_eq[i], b_eq[i]) for i in range(m_eq)),
            ineq_rows=tuple(dense_row(a_in[i], b_in[i]) for i in range(m_in)),
            lower_bounds=lo,
            upper_bounds=hi,
        )


def vertex_optimum(lp, tol=1e-7):
    # type: (LinearProgram, float) -> Optional[float]
    """Best objective over every basic solution of a bounded LP; None if none is feasible."""
    n = lp.n_vars
    a_eq, b_eq = lp.matrix("eq")
    a_in, b_in = lp.matrix("ineq")
    eye = np.eye(n)
    candidates = ([(a_in[i], b_in[i]) for i in range(len(b_in))]
                  + [(eye[j], lp.lower_bounds[j]) for j in range(n)]
                  + [(eye[j], lp.upper_bounds[j]) for j in range(n)])
    k = n - len(b_eq)
    combos = list(itertools.combinations(range(len(candidates)), k))
    if not combos:
        return None
    mats = np.empty((len(combos), n, n))
    rhs = np.empty((len(combos), n))
    mats[:, :len(b_eq)] = a_eq
    rhs[:, :len(b_eq)] = b_eq
    for c, combo in enumerate(combos):
        for r, idx in enumerate(combo):
            mats[c, len(b_eq) + r], rhs[c, len(b_eq) + r] = candidates[idx]
    regular = np.abs(np.linalg.det(mats)) > 1e-9
    if not regular.any():
        return None
    points = np.linalg.solve(mats[regular], rhs[regular][..., None])[..., 0]
    ok = np.all(points >= lp.lower_bounds - tol, axis=1) & np.all(points <= lp.upper_bounds + tol, axis=1)
    if len(b_eq):
        ok &= np.all(np.abs(points @ a_eq.T - b_eq) <= tol, axis=1)
    if len(b_in):
        ok &= np.all(points @ a_in.T - b_in <= tol, axis=1)
    if not ok.any():
        return None
    return float(np.min(points[ok] @ lp.objective))


def lp_vertex_suite(seed, count=500):
    # type: (int, int) -> SuiteResult
    rng = np.random.default_rng(seed)
    result = SuiteResult("lp-vertex")
    for case in range(count):
        lp = random_lp(rng)
        expected = vertex_optimum(lp)
        solution = lp_solver.solve(lp)
        result.cases += 1
        if expected is None:
            if solution.status is not LpStatus.INFEASIBLE:
                result.failures.append("case %d: oracle found no vertex, solver says %s"
                                       % (case, solution.status.value))
            continue
        if not solution.optimal:
            result.failures.append("case %d: solver status %s, oracle optimum %.9g"
                                   % (case, solution.status.value, expected))
            continue
        report = lp_solver.verify(lp, solution.primal, tol=LP_TOL)
        if not report.feasible(LP_TOL):
            result.failures.append("case %d: solver point violates %r" % (case, report.violations[:1]))
        if abs(solution.objective_value - expected) > LP_TOL * max(1.0, abs(expected)):
            result.failures.append("case %d: solver %.12g, oracle %.12g"
                                   % (case, solution.objective_value, expected))
    return result


def brute_force_start(load, prices, dt_hours):
    # type: (UninterruptibleLoad, np.ndarray, float) -> Optional[Tuple[int, float]]
    """Scan every period as a start; None when no start fits."""
    costs = []
    for s in range(len(prices)):
        periods = range(s, s + load.cycle_len)
        if s + load.cycle_len > len(prices) or any(p not in load.window for p in periods):
            continue
        costs.append((s, dt_hours * math.fsum(prices[p] * load.cycle_phases[p - s] for p in periods)))
    if not costs:
        return None
    best = min(c for _, c in costs)
    return next((s, c) for s, c in costs if c <= best + TIE_RTOL * max(1.0, abs(best)))


def random_load(rng, horizon_len):
    # type: (np.random.Generator, int) -> UninterruptibleLoad
    n_phases = int(rng.integers(1, 5))
    phases = tuple(np.round(rng.uniform(0.0, 2.5, n_phases), 1))
    first = int(rng.integers(0, horizon_len))
    last = int(rng.integers(first, horizon_len + 2))
    window = {t for t in range(first, last) if rng.random() > 0.1}
    return UninterruptibleLoad("load", phases, frozenset(window))


def ul_bruteforce_suite(seed, count=1000):
    # type: (int, int) -> SuiteResult
    rng = np.random.default_rng(seed)
    result = SuiteResult("ul-brute")
    worked = UninterruptibleLoad("worked", (1.0, 0.5), frozenset(range(4)))
    instances = [(worked, np.array([0.1, 0.2, 0.05, 0.3]), 0.25)]
    for _ in range(count - 1):
        horizon = int(rng.integers(4, 25))
        prices = np.round(rng.uniform(0.0, 0.4, horizon), 2)
        instances.append((random_load(rng, horizon), prices, 0.25))
    for case, (load, prices, dt_h) in enumerate(instances):
        result.cases += 1
        expected = brute_force_start(load, prices, dt_h)
        try:
            schedule = schedule_uninterruptible(load, prices, dt_h)
            got = (schedule.start, schedule.cost)
        except NoFeasibleStartError:
            got = None
        if got != expected:
            result.failures.append("case %d: scheduler %r, brute force %r" % (case, got, expected))
    return result


def random_joint_problem(rng, horizon_len=24, n_loads=2, dt=900.0):
    # type: (np.random.Generator, int, int, float) -> HorizonProblem
    """Small HVAC horizon with random prices, weather and appliance windows."""
    prices = np.round(rng.uniform(0.05, 0.4, horizon_len), 3)
    series = DisturbanceSeries(
        ambient=rng.uniform(-5.0, 15.0, horizon_len),
        occupancy=np.where(rng.random(horizon_len) < 0.3, 1.0, 0.0),
        hot_water_draw=np.where(rng.random(horizon_len) < 0.1, 1.0, 0.0),
        solar_illuminance=rng.uniform(0.0, 20000.0, horizon_len),
        standby=np.zeros(horizon_len),
    )
    loads = []
    for i in range(n_loads):
        cycle = int(rng.integers(1, 4))
        start = int(rng.integers(0, horizon_len - cycle - 3))
        window = frozenset(range(start, start + cycle + 3))
        phases = tuple(np.round(rng.uniform(0.1, 2.0, cycle), 2))
        loads.append(UninterruptibleLoad("load%d" % i, phases, window))
    comfort = ComfortProfile.preset(Flexibility.FLEX)
    return HorizonProblem.create(BuildingSpec(), HeaterVariant.HVAC, StateVector(), prices, series,
                                 comfort, loads, dt=dt)


def joint_suite(seed, count=200):
    # type: (int, int) -> SuiteResult
    rng = np.random.default_rng(seed)
    result = SuiteResult("joint")
    for case in range(count):
        problem = random_joint_problem(rng)
        decomposed = solve_horizon(problem)
        oracle = joint_oracle(problem)
        result.cases += 1
        if abs(decomposed.total_cost - oracle.total_cost) > JOINT_TOL:
            result.failures.append("case %d: decomposed %.15g, joint %.15g"
                                   % (case, decomposed.total_cost, oracle.total_cost))
    return result


SUITES = (
    ("lp-vertex", lp_vertex_suite, 500),
    ("ul-brute", ul_bruteforce_suite, 1000),
    ("joint", joint_suite, 200),
)  # type: Tuple[Tuple[str, Callable[[int, int], SuiteResult], int], ...]


def run_all(seed, scale=1.0):
    # type: (int, float) -> List[SuiteResult]
    """Run every suite; scale < 1 shrinks the case counts."""
    results = []
    for name, suite, count in SUITES:
        started = time.monotonic()
        res = suite(seed, max(1, int(round(count * scale))))
        res.seconds = time.monotonic() - started
        log(res.summary())
        results.append(res)
    return results
