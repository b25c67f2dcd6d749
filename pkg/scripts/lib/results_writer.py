"""Result files: per-period trajectory CSV, metrics table CSV and metrics JSONL."""

import json
from pathlib import Path
from typing import Dict, Iterable, List

import numpy as np
import pandas as pd

from lib.mpc import SLACK_NAMES

FLOAT_FORMAT = "%.15g"
TRAJECTORY_FILE = "trajectory.csv"
METRICS_TABLE_FILE = "metrics.csv"
METRICS_RECORDS_FILE = "metrics.jsonl"

# record key -> table header, in table order
TABLE_COLUMNS = (
    ("label", "Case"),
    ("heater", "Heater"),
    ("bound_strategy", "Bounds"),
    ("flexibility", "Flexibility"),
    ("ua_ra_factor", "UA factor"),
    ("lighting_enabled", "Lighting"),
    ("annual_cost", "Annual cost [EUR]"),
    ("violations_degree_hours", "Violations [degC h]"),
    ("freq_at_setpoint_pct", "Freq. at 20 degC [%]"),
    ("freq_near_band_pct", "Freq. in 18-22 degC [%]"),
    ("freq_far_band_pct", "Freq. in 15-25 degC [%]"),
    ("building_consumption_kwh", "Building cons. [kWh]"),
    ("share_building_lowprice_pct", "Building low-price share [%]"),
    ("share_heating_lowprice_pct", "Heating low-price share [%]"),
    ("penalty_cost", "Penalty cost [EUR]"),
    ("error", "Error"),
)


def trajectory_frame(result):
    # type: (object) -> pd.DataFrame
    """Committed trajectory as a table indexed by timestamp, fixed column order."""
    data = {}
    for j, name in enumerate(result.state_names):
        data["x_%s" % name] = result.states[:, j]
    for j, name in enumerate(result.control_names):
        data["u_%s" % name] = result.controls[:, j]
    data["light_lm"] = result.light
    data["load_kw"] = result.load_power
    data["standby_kw"] = result.standby
    data["building_kw"] = result.building_power
    for j, name in enumerate(SLACK_NAMES):
        data["v_%s" % name] = result.slacks[:, j]
    data["room_lower"] = result.room_lower
    data["room_upper"] = result.room_upper
    data["price"] = result.prices
    return pd.DataFrame(data, index=pd.DatetimeIndex(result.timestamps, name="timestamp"))


def write_trajectory(result, path):
    # type: (object, Path) -> Path
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    trajectory_frame(result).to_csv(path, float_format=FLOAT_FORMAT, date_format="%Y-%m-%dT%H:%M:%S")
    return path


def read_trajectory(path):
    # type: (Path) -> pd.DataFrame
    """Trajectory written by write_trajectory, indexed by timestamp."""
    frame = pd.read_csv(path, index_col="timestamp", parse_dates=["timestamp"])
    return frame.astype(float)


def write_metrics_table(records, path, delimiter=","):
    # type: (Iterable[dict], Path, str) -> Path
    """Delimiter-separated metrics table; header only when there are no records."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    keys = [k for k, _ in TABLE_COLUMNS]
    frame = pd.DataFrame(list(records), columns=keys)
    frame = frame.rename(columns=dict(TABLE_COLUMNS))
    frame.to_csv(path, sep=delimiter, index=False, float_format=FLOAT_FORMAT)
    return path


def write_metrics_records(records, path):
    # type: (Iterable[dict], Path) -> Path
    """Overwrite the metrics records file with the given records."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True) + "\n")
    return path


def load_metrics_records(path):
    # type: (Path) -> List[dict]
    """Read all lines from a metrics JSONL file, skipping blank lines."""
    path = Path(path)
    if not path.exists():
        return []
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            stripped = line.strip()
            if stripped:
                records.append(json.loads(stripped))
    return records


def _metrics_record(result, metrics):
    record = {"label": result.config.label}
    record.update(result.config.to_dict())
    record.update(metrics.to_dict())
    record["solve_seconds"] = result.solve_seconds
    return record


def write_results(result, metrics, out_dir):
    # type: (object, object, Path) -> Dict[str, Path]
    """Trajectory, metrics table and metrics record of one run."""
    out_dir = Path(out_dir)
    record = _metrics_record(result, metrics)
    return {
        "trajectory": write_trajectory(result, out_dir / TRAJECTORY_FILE),
        "metrics_table": write_metrics_table([record], out_dir / METRICS_TABLE_FILE),
        "metrics_records": write_metrics_records([record], out_dir / METRICS_RECORDS_FILE),
    }


def write_grid_results(rows, out_dir):
    # type: (Iterable[object], Path) -> Dict[str, Path]
    """Metrics of a case grid, one row per case in case order."""
    out_dir = Path(out_dir)
    records = [row.to_record() for row in rows]
    return {
        "metrics_table": write_metrics_table(records, out_dir / METRICS_TABLE_FILE),
        "metrics_records": write_metrics_records(records, out_dir / METRICS_RECORDS_FILE),
    }


def table_header():
    # type: () -> List[str]
    return [h for _, h in TABLE_COLUMNS]


def max_replay_error(frame, replayed):
    # type: (pd.DataFrame, np.ndarray) -> float
    """Largest |stored - replayed| over the x_* columns of a trajectory."""
    cols = [c for c in frame.columns if c.startswith("x_")]
    return float(np.max(np.abs(frame[cols].to_numpy() - replayed))) if len(frame) else 0.0
