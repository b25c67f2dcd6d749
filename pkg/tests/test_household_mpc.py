"""End-to-end tests for the household_mpc command line."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

SCRIPT = str(Path(__file__).resolve().parent.parent / "scripts" / "household_mpc.py")


def _run(*args, cwd=None):
    return subprocess.run([sys.executable, SCRIPT] + list(args), capture_output=True, text=True,
                          cwd=cwd, timeout=600)


class TestArguments:
    def test_help(self):
        result = _run("--help")
        assert result.returncode == 0
        assert "simulate-year" in result.stdout

    def test_subcommand_required(self):
        result = _run()
        assert result.returncode == 2

    def test_unknown_flag(self):
        result = _run("validate", "--bogus")
        assert result.returncode == 2
        assert "usage" in result.stderr

    def test_missing_config(self, tmp_path):
        result = _run("simulate-day", "--config", str(tmp_path / "none.json"))
        assert result.returncode == 2
        assert result.stderr.startswith("Error: config file not found")

    def test_invalid_config(self, write_config):
        path = write_config({"simulation": {"dt": 7}})
        result = _run("simulate-day", "--config", str(path))
        assert result.returncode == 2
        assert "simulation.dt" in result.stderr

    def test_day_outside_scenario(self, write_config, small_config):
        result = _run("simulate-day", "--config", str(write_config(small_config)), "--day", "3")
        assert result.returncode == 2
        assert "outside" in result.stderr

    def test_commit_cutting_a_window(self, write_config, small_config):
        config = dict(small_config, simulation=dict(small_config["simulation"], commit_len=12, days=1))
        result = _run("simulate-year", "--config", str(write_config(config)))
        assert result.returncode == 2
        assert "oven" in result.stderr

    def test_failed_solve_exits_one(self, write_config, small_config, tmp_path):
        kiln = {"name": "kiln", "phases_kw": [1.0, 1.0, 1.0], "window": "10:00-12:00"}
        config = dict(small_config, loads=[kiln])
        result = _run("simulate-year", "--config", str(write_config(config)), "--out", str(tmp_path / "run"))
        assert result.returncode == 1
        assert result.stderr.splitlines()[-1].startswith("Error: day 0")
        assert "kiln" in result.stderr


class TestCommands:
    def test_validate(self):
        result = _run("validate", "--seed", "7", "--scale", "0.01")
        assert result.returncode == 0, result.stderr
        assert result.stdout.count(" ok") == 3

    def test_simulate_day(self, write_config, small_config):
        result = _run("simulate-day", "--config", str(write_config(small_config)))
        assert result.returncode == 0, result.stderr
        assert "electricity cost" in result.stdout
        assert "start washing_machine" in result.stdout

    def test_export_lp(self, write_config, small_config, tmp_path):
        out = tmp_path / "lp"
        result = _run("export-lp", "--config", str(write_config(small_config)), "--out", str(out))
        assert result.returncode == 0, result.stderr
        text = (out / "day000.lp").read_text(encoding="utf-8")
        assert text.startswith("\\ Problem: day0")
        assert "Subject To" in text
        assert "variables" in result.stdout

    def test_case_grid(self, write_config, small_config, tmp_path):
        out = tmp_path / "grid"
        result = _run("case-grid", "--config", str(write_config(small_config)), "--grid", "lighting",
                      "--threads", "2", "--out", str(out))
        assert result.returncode == 0, result.stderr
        lines = (out / "metrics.csv").read_text(encoding="utf-8").splitlines()
        assert len(lines) == 7
        records = [json.loads(l) for l in (out / "metrics.jsonl").read_text(encoding="utf-8").splitlines()]
        assert [r["case"] for r in records] == list(range(6))
        assert "SAVING %" in result.stdout

    def test_simulate_year_and_rerun_from_files(self, write_config, small_config, tmp_path):
        out = tmp_path / "run"
        config = dict(small_config, simulation=dict(small_config["simulation"], days=2, lookahead_len=24))
        result = _run("simulate-year", "--config", str(write_config(config)), "--out", str(out))
        assert result.returncode == 0, result.stderr
        assert "Solved 2 segments" in result.stdout
        first = json.loads((out / "metrics.jsonl").read_text(encoding="utf-8"))

        scenario_dir = out / "scenario"
        assert (scenario_dir / "price.csv").is_file()
        series = {p.stem: str(p) for p in scenario_dir.glob("*.csv")}
        rerun = dict(config, series=series)
        again = tmp_path / "again"
        result = _run("simulate-year", "--config", str(write_config(rerun, "rerun.json")),
                      "--out", str(again))
        assert result.returncode == 0, result.stderr
        second = json.loads((again / "metrics.jsonl").read_text(encoding="utf-8"))
        assert second["annual_cost"] == pytest.approx(first["annual_cost"], rel=1e-9)
        assert not (again / "scenario").exists()
