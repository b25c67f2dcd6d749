"""Tests for the result files of runs and grids."""

import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "scripts"))

from lib.comfort import Flexibility
from lib.metrics import compute_metrics
from lib.model_core import POWER_CONTROLS, BuildingSpec, HeaterVariant, build_model
from lib.mpc import replay_states
from lib.results_writer import (
    METRICS_RECORDS_FILE,
    METRICS_TABLE_FILE,
    TRAJECTORY_FILE,
    load_metrics_records,
    max_replay_error,
    read_trajectory,
    table_header,
    write_grid_results,
    write_metrics_table,
    write_results,
)
from lib.scenario import generate_synthetic_scenario
from lib.sim import GridRow, SimulationConfig, run_receding_horizon

CONFIG = SimulationConfig(heater=HeaterVariant.HVAC, flexibility=Flexibility.FLEX,
                          commit_len=24, lookahead_len=0)


@pytest.fixture(scope="module")
def run():
    scenario = generate_synthetic_scenario(days=1, dt=3600.0, seed=5)
    result = run_receding_horizon(scenario, BuildingSpec(), CONFIG)
    return scenario, result, compute_metrics(result, scenario)


class TestWriteResults:
    def test_files(self, run, tmp_path):
        _, result, metrics = run
        paths = write_results(result, metrics, tmp_path)
        assert sorted(p.name for p in paths.values()) == sorted(
            [TRAJECTORY_FILE, METRICS_TABLE_FILE, METRICS_RECORDS_FILE])
        records = load_metrics_records(tmp_path / METRICS_RECORDS_FILE)
        assert len(records) == 1
        assert records[0]["label"] == CONFIG.label
        assert records[0]["annual_cost"] == metrics.annual_cost

    def test_trajectory_replays(self, run, tmp_path):
        scenario, result, metrics = run
        write_results(result, metrics, tmp_path)
        frame = read_trajectory(tmp_path / TRAJECTORY_FILE)
        assert len(frame) == 24
        assert frame.index[0] == scenario.timestamps[0]
        controls = frame[["u_%s" % n for n in result.control_names]].to_numpy()
        model = build_model(BuildingSpec(), HeaterVariant.HVAC, scenario.disturbances(0, 24), scenario.dt)
        x0 = CONFIG.initial_state.for_variant(HeaterVariant.HVAC)
        replayed = replay_states(model, x0, controls, scenario.disturbances(0, 24))
        assert max_replay_error(frame, replayed) < 1e-9

    def test_trajectory_power_identity(self, run, tmp_path):
        _, result, metrics = run
        write_results(result, metrics, tmp_path)
        frame = read_trajectory(tmp_path / TRAJECTORY_FILE)
        power_cols = ["u_%s" % n for n in result.control_names if n in POWER_CONTROLS]
        total = frame[power_cols].sum(axis=1) + frame["load_kw"] + frame["standby_kw"]
        assert np.allclose(total.to_numpy(), frame["building_kw"].to_numpy(), atol=1e-12)

    def test_overwrites_records(self, run, tmp_path):
        _, result, metrics = run
        write_results(result, metrics, tmp_path)
        write_results(result, metrics, tmp_path)
        assert len(load_metrics_records(tmp_path / METRICS_RECORDS_FILE)) == 1


class TestMetricsTable:
    def test_empty_table_is_header_only(self, tmp_path):
        path = write_metrics_table([], tmp_path / "m.csv")
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 1
        assert lines[0].split(",") == table_header()

    def test_delimiter(self, tmp_path):
        path = write_metrics_table([{"label": "a", "annual_cost": 1.5}], tmp_path / "m.tsv", delimiter="\t")
        frame = pd.read_csv(path, sep="\t")
        assert frame["Annual cost [EUR]"].tolist() == [1.5]
        assert frame["Case"].tolist() == ["a"]

    def test_grid_rows_in_case_order(self, run, tmp_path):
        _, _, metrics = run
        rows = [GridRow(0, CONFIG, metrics=metrics), GridRow(1, CONFIG, error="day 0: boom")]
        write_grid_results(rows, tmp_path)
        frame = pd.read_csv(tmp_path / METRICS_TABLE_FILE)
        assert len(frame) == 2
        assert frame["Error"].isna().tolist() == [True, False]
        records = [json.loads(line) for line in
                   (tmp_path / METRICS_RECORDS_FILE).read_text(encoding="utf-8").splitlines()]
        assert [r["case"] for r in records] == [0, 1]
        assert "annual_cost" not in records[1]


def test_missing_records_file(tmp_path):
    assert load_metrics_records(tmp_path / "none.jsonl") == []
