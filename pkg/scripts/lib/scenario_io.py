"""Time-series file ingestion: one CSV per signal with timestamp,value rows."""

from pathlib import Path
from typing import Dict, Mapping, Optional

import numpy as np
import pandas as pd

from lib import signal_names
from lib.errors import ScenarioFormatError
from lib.model_core import BuildingSpec
from lib.scenario import Scenario

HEADER = ("timestamp", "value")
FLOAT_FORMAT = "%.15g"

_NON_NEGATIVE = (signal_names.IRRADIANCE, signal_names.OCCUPANCY, signal_names.HOT_WATER,
                 signal_names.STANDBY)


def read_series(path, dt, delimiter=","):
    # type: (Path, float, str) -> pd.Series
    """Read one signal file into a float Series indexed by timestamp.

    Line numbers in errors are 1-based file lines (the header is line 1).
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, sep=delimiter, dtype=str, keep_default_na=False,
                            skip_blank_lines=False)
    except FileNotFoundError:
        raise ScenarioFormatError(path, None, None, "file not found")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise ScenarioFormatError(path, None, None, "unreadable: %s" % exc)
    columns = tuple(c.strip() for c in frame.columns)
    if columns != HEADER:
        raise ScenarioFormatError(path, 1, None, "header must be %s, got %s"
                                  % (delimiter.join(HEADER), delimiter.join(columns)))
    frame.columns = list(HEADER)
    if frame.empty:
        raise ScenarioFormatError(path, None, None, "no data rows")

    stamps = pd.to_datetime(frame["timestamp"].str.strip(), errors="coerce")
    bad = np.flatnonzero(stamps.isna().to_numpy())
    if bad.size:
        i = int(bad[0])
        raise ScenarioFormatError(path, i + 2, "timestamp",
                                  "not an ISO-8601 timestamp: %r" % frame["timestamp"].iloc[i])
    values = pd.to_numeric(frame["value"].str.strip(), errors="coerce")
    bad = np.flatnonzero(~np.isfinite(values.to_numpy(dtype=float)))
    if bad.size:
        i = int(bad[0])
        raise ScenarioFormatError(path, i + 2, "value",
                                  "not a finite number: %r" % frame["value"].iloc[i])

    steps = np.diff(stamps.to_numpy()) / np.timedelta64(1, "s")
    bad = np.flatnonzero(steps <= 0)
    if bad.size:
        i = int(bad[0]) + 1
        raise ScenarioFormatError(path, i + 2, "timestamp",
                                  "timestamp %s does not increase (duplicate or out of order)"
                                  % stamps.iloc[i])
    bad = np.flatnonzero(steps != dt)
    if bad.size:
        i = int(bad[0]) + 1
        raise ScenarioFormatError(path, i + 2, "timestamp", "gap of %gs, expected dt=%gs"
                                  % (steps[i - 1], dt))
    return pd.Series(values.to_numpy(dtype=float), index=pd.DatetimeIndex(stamps), name=path.stem)


def load_scenario(paths, dt, building=None, delimiter=","):
    # type: (Mapping[str, Path], float, Optional[BuildingSpec], str) -> Scenario
    """Read, validate and align the signal files into a Scenario.

    Irradiance is turned into window illuminance with the building's daylight
    efficacy and window area. A missing standby file means zero standby.
    """
    unknown = sorted(set(paths) - set(signal_names.ALL_SIGNALS))
    if unknown:
        raise ScenarioFormatError(paths[unknown[0]], None, None, "unknown signal %r" % unknown[0])
    missing = [s for s in signal_names.ALL_SIGNALS
               if s not in paths and s not in signal_names.OPTIONAL_SIGNALS]
    if missing:
        raise ScenarioFormatError("-", None, None, "missing series for signal %r" % missing[0])

    series = {}  # type: Dict[str, pd.Series]
    reference = None
    for signal in signal_names.ALL_SIGNALS:
        if signal not in paths:
            continue
        path = Path(paths[signal])
        s = read_series(path, dt, delimiter)
        if signal in _NON_NEGATIVE and (s < 0).any():
            i = int(np.flatnonzero(s.to_numpy() < 0)[0])
            raise ScenarioFormatError(path, i + 2, "value", "%s must be >= 0" % signal)
        if reference is None:
            reference = (path, s.index)
        else:
            ref_path, ref_index = reference
            if len(s) != len(ref_index):
                line = min(len(s), len(ref_index)) + 2
                raise ScenarioFormatError(path, line, "timestamp", "has %d rows but %s has %d"
                                          % (len(s), ref_path.name, len(ref_index)))
            mismatch = np.flatnonzero(s.index != ref_index)
            if mismatch.size:
                i = int(mismatch[0])
                raise ScenarioFormatError(path, i + 2, "timestamp", "%s does not match %s (%s)"
                                          % (s.index[i], ref_path.name, ref_index[i]))
        series[signal] = s

    index = reference[1]
    standby = series.get(signal_names.STANDBY)
    return Scenario.from_signals(
        dt=dt,
        timestamps=index,
        prices=series[signal_names.PRICE].to_numpy(),
        ambient=series[signal_names.AMBIENT].to_numpy(),
        irradiance=series[signal_names.IRRADIANCE].to_numpy(),
        occupancy=series[signal_names.OCCUPANCY].to_numpy(),
        hot_water=series[signal_names.HOT_WATER].to_numpy(),
        standby=None if standby is None else standby.to_numpy(),
        building=building,
    )


def write_scenario(scenario, out_dir, delimiter=","):
    # type: (Scenario, Path, str) -> Dict[str, Path]
    """Write the six signal files of a scenario; returns signal -> path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    frame = scenario.to_frame()
    stamps = [ts.isoformat() for ts in scenario.timestamps]
    written = {}
    for signal in signal_names.ALL_SIGNALS:
        path = out_dir / signal_names.series_filename(signal)
        out = pd.DataFrame({"timestamp": stamps, "value": frame[signal].to_numpy()})
        out.to_csv(path, sep=delimiter, index=False, float_format=FLOAT_FORMAT)
        written[signal] = path
    return written
