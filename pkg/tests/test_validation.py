"""Tests for the randomized oracle suites."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "scripts"))

from lib.loads import UninterruptibleLoad
from lib.lp_solver import LpStatus, solve
from lib.validation import (
    brute_force_start,
    joint_suite,
    lp_vertex_suite,
    random_lp,
    run_all,
    ul_bruteforce_suite,
    vertex_optimum,
)


class TestOracles:
    def test_brute_force_worked_example(self):
        load = UninterruptibleLoad("worked", (1.0, 0.5), frozenset(range(4)))
        start, cost = brute_force_start(load, np.array([0.1, 0.2, 0.05, 0.3]), 0.25)
        assert start == 0
        assert cost == pytest.approx(0.05)

    def test_brute_force_no_start(self):
        load = UninterruptibleLoad("long", (1.0, 1.0, 1.0), frozenset({0, 1}))
        assert brute_force_start(load, np.ones(4), 0.25) is None

    def test_random_lps_are_feasible(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            lp = random_lp(rng)
            assert solve(lp).status is LpStatus.OPTIMAL
            assert vertex_optimum(lp) is not None


class TestSuites:
    def test_lp_vertex(self):
        result = lp_vertex_suite(seed=3, count=30)
        assert result.cases == 30
        assert result.passed, result.failures[:3]

    def test_lp_vertex_full_count(self):
        result = lp_vertex_suite(seed=0, count=500)
        assert result.cases == 500
        assert result.passed, result.failures[:3]

    def test_ul_bruteforce(self):
        result = ul_bruteforce_suite(seed=3, count=200)
        assert result.passed, result.failures[:3]

    def test_joint(self):
        result = joint_suite(seed=3, count=3)
        assert result.passed, result.failures[:3]

    def test_run_all_scales_counts(self, capsys):
        results = run_all(seed=1, scale=0.004)
        assert [r.name for r in results] == ["lp-vertex", "ul-brute", "joint"]
        assert [r.cases for r in results] == [2, 4, 1]
        assert all(r.passed for r in results)
        assert "lp-vertex" in capsys.readouterr().err

    def test_summary(self):
        result = ul_bruteforce_suite(seed=0, count=1)
        assert result.summary().startswith("ul-brute")
        assert result.summary().endswith("ok")
