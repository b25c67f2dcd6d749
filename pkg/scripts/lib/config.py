"""JSON configuration document: building, comfort, appliances, simulation, series.

Every section is optional and falls back to the shipped defaults. Unknown keys
are rejected with their dotted path. to_dict() writes every field explicitly,
so parse(to_dict(doc)) == doc.
"""

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple

from lib import signal_names
from lib.comfort import BoundStrategy, ComfortProfile, Flexibility
from lib.errors import ConfigError, ModelError
from lib.loads import DEFAULT_APPLIANCES, ApplianceSpec, parse_clock_window
from lib.model_core import STATE_NAMES, BuildingSpec, HeaterVariant, StateVector
from lib.sim import SimulationConfig

SECTIONS = ("building", "comfort", "loads", "simulation", "series")

COMFORT_OVERRIDES = ("room_setpoint", "alpha", "bound_strategy", "wh_bounds", "rf_bounds",
                     "light_bounds_lux", "blind_min", "rho_temp", "rho_light")
_PAIR_KEYS = ("wh_bounds", "rf_bounds", "light_bounds_lux")


@dataclass(frozen=True)
class SimulationSettings:
    dt: float = 900.0
    commit_len: int = 96
    lookahead_len: int = 96
    ua_ra_factor: float = 1.0
    lighting_enabled: bool = True
    windowless: bool = False
    days: int = 7
    initial_state: StateVector = field(default_factory=StateVector)
    setpoint_band: float = 0.05
    low_price_threshold: float = 0.5
    threads: int = 1
    seed: int = 0
    grid: str = "comfort"

    def to_dict(self):
        data = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        data["initial_state"] = dataclasses.asdict(self.initial_state)
        return data


@dataclass(frozen=True)
class ConfigDocument:
    heater: HeaterVariant = HeaterVariant.FLOOR_HEATING
    building: BuildingSpec = field(default_factory=BuildingSpec)
    comfort_preset: Flexibility = Flexibility.NOFLEX
    comfort_overrides: Tuple[Tuple[str, object], ...] = ()
    appliances: Tuple[ApplianceSpec, ...] = DEFAULT_APPLIANCES
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    series: Tuple[Tuple[str, str], ...] = ()

    @property
    def series_paths(self):
        # type: () -> Dict[str, Path]
        return {k: Path(v) for k, v in self.series}

    def comfort(self, flexibility=None, strategy=None):
        # type: (Optional[Flexibility], Optional[BoundStrategy]) -> ComfortProfile
        overrides = dict(self.comfort_overrides)
        if strategy is not None:
            overrides["bound_strategy"] = strategy
        base = overrides.pop("bound_strategy", BoundStrategy.PRICE_INDEPENDENT)
        return ComfortProfile.preset(flexibility or self.comfort_preset, base, **overrides)

    def comfort_field_overrides(self):
        # type: () -> Dict[str, object]
        """Overrides applied on top of every grid case's preset (strategy excluded)."""
        return {k: v for k, v in self.comfort_overrides if k != "bound_strategy"}

    def simulation_config(self):
        # type: () -> SimulationConfig
        sim = self.simulation
        return SimulationConfig(
            heater=self.heater,
            flexibility=self.comfort_preset,
            bound_strategy=self.comfort().bound_strategy,
            commit_len=sim.commit_len,
            lookahead_len=sim.lookahead_len,
            ua_ra_factor=sim.ua_ra_factor,
            lighting_enabled=sim.lighting_enabled,
            windowless=sim.windowless,
            initial_state=sim.initial_state,
        ).validate()

    def to_dict(self):
        # type: () -> dict
        building = self.building.to_dict()
        building["heater"] = self.heater.value
        comfort = {"preset": self.comfort_preset.value}
        for key, value in self.comfort_overrides:
            if isinstance(value, BoundStrategy):
                value = value.value
            elif isinstance(value, tuple):
                value = list(value)
            comfort[key] = value
        data = {
            "building": building,
            "comfort": comfort,
            "loads": [a.to_dict() for a in self.appliances],
            "simulation": self.simulation.to_dict(),
        }
        if self.series:
            data["series"] = dict(self.series)
        return data


def _check_keys(data, allowed, path):
    if not isinstance(data, dict):
        raise ConfigError("%s must be an object, got %s" % (path, type(data).__name__))
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError("%s.%s: unknown key" % (path, unknown[0]) if path else "%s: unknown key" % unknown[0])


def _number(value, path, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("%s must be a number, got %r" % (path, value))
    if kind is int:
        if int(value) != value:
            raise ConfigError("%s must be an integer, got %r" % (path, value))
        return int(value)
    return float(value)


def _flag(value, path):
    if not isinstance(value, bool):
        raise ConfigError("%s must be true or false, got %r" % (path, value))
    return value


def _parse_building(data):
    _check_keys(data or {}, BuildingSpec.field_names() + ("heater",), "building")
    data = dict(data or {})
    values = {k: _number(v, "building." + k) for k, v in data.items() if k != "heater"}
    try:
        return HeaterVariant.parse(data.get("heater", "fh")), BuildingSpec(**values).validate()
    except ModelError as exc:
        raise ConfigError(str(exc))


def _parse_comfort(data):
    _check_keys(data or {}, ("preset",) + COMFORT_OVERRIDES, "comfort")
    data = dict(data or {})
    preset = Flexibility.parse(data.pop("preset", "noflex"))
    overrides = []
    for key in sorted(data):
        value = data[key]
        path = "comfort." + key
        if key == "bound_strategy":
            value = BoundStrategy.parse(value)
        elif key in _PAIR_KEYS:
            if not isinstance(value, (list, tuple)) or len(value) != 2:
                raise ConfigError("%s must be a [lower, upper] pair" % path)
            value = (_number(value[0], path), _number(value[1], path))
        else:
            value = _number(value, path)
        overrides.append((key, value))
    doc_overrides = tuple(overrides)
    fields_only = {k: v for k, v in doc_overrides if k != "bound_strategy"}
    strategy = dict(doc_overrides).get("bound_strategy", BoundStrategy.PRICE_INDEPENDENT)
    dataclasses.replace(ComfortProfile.preset(preset, strategy), **fields_only).validate()
    return preset, doc_overrides


def _parse_loads(data, dt):
    if data is None:
        return DEFAULT_APPLIANCES
    if not isinstance(data, list):
        raise ConfigError("loads must be a list")
    appliances = []
    for i, entry in enumerate(data):
        path = "loads[%d]" % i
        _check_keys(entry, ("name", "phases_kw", "window"), path)
        for key in ("name", "phases_kw", "window"):
            if key not in entry:
                raise ConfigError("%s.%s is required" % (path, key))
        phases = entry["phases_kw"]
        if not isinstance(phases, list) or not phases:
            raise ConfigError("%s.phases_kw must be a non-empty list" % path)
        phases = tuple(_number(p, "%s.phases_kw" % path) for p in phases)
        if any(p < 0 for p in phases):
            raise ConfigError("%s.phases_kw must be >= 0" % path)
        window = str(entry["window"])
        parse_clock_window(window, dt)
        appliances.append(ApplianceSpec(str(entry["name"]), phases, window))
    names = [a.name for a in appliances]
    if len(set(names)) != len(names):
        raise ConfigError("loads: appliance names must be unique")
    return tuple(appliances)


def _parse_simulation(data):
    names = [f.name for f in dataclasses.fields(SimulationSettings)]
    _check_keys(data or {}, names, "simulation")
    data = dict(data or {})
    values = {}
    for key, value in data.items():
        path = "simulation." + key
        if key in ("lighting_enabled", "windowless"):
            values[key] = _flag(value, path)
        elif key in ("commit_len", "lookahead_len", "days", "threads", "seed"):
            values[key] = _number(value, path, int)
        elif key == "grid":
            values[key] = str(value)
        elif key == "initial_state":
            _check_keys(value, STATE_NAMES, path)
            state = {k: (None if v is None else _number(v, "%s.%s" % (path, k)))
                     for k, v in value.items()}
            values[key] = dataclasses.replace(StateVector(), **state)
        else:
            values[key] = _number(value, path)
    settings = SimulationSettings(**values)
    if settings.dt <= 0 or 86400 % settings.dt:
        raise ConfigError("simulation.dt must divide 86400, got %r" % settings.dt)
    if settings.days < 1 or settings.threads < 1:
        raise ConfigError("simulation.days and simulation.threads must be >= 1")
    if not 0.0 <= settings.low_price_threshold <= 1.0:
        raise ConfigError("simulation.low_price_threshold must lie in [0, 1]")
    if settings.setpoint_band < 0:
        raise ConfigError("simulation.setpoint_band must be >= 0")
    return settings


def _parse_series(data, base_dir):
    if not data:
        return ()
    _check_keys(data, signal_names.ALL_SIGNALS, "series")
    out = []
    for signal in sorted(data):
        path = Path(str(data[signal]))
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        path = path.resolve()
        if not path.is_file():
            raise ConfigError("series.%s: file not found: %s" % (signal, path))
        out.append((signal, str(path)))
    missing = [s for s in signal_names.ALL_SIGNALS
               if s not in data and s not in signal_names.OPTIONAL_SIGNALS]
    if missing:
        raise ConfigError("series: missing signal %r" % missing[0])
    return tuple(out)


def parse_config(data, base_dir=None):
    # type: (dict, Optional[Path]) -> ConfigDocument
    """Validate a decoded JSON document into a ConfigDocument."""
    _check_keys(data, SECTIONS, "")
    heater, building = _parse_building(data.get("building"))
    preset, overrides = _parse_comfort(data.get("comfort"))
    simulation = _parse_simulation(data.get("simulation"))
    appliances = _parse_loads(data.get("loads"), simulation.dt)
    doc = ConfigDocument(
        heater=heater,
        building=building,
        comfort_preset=preset,
        comfort_overrides=overrides,
        appliances=appliances,
        simulation=simulation,
        series=_parse_series(data.get("series"), base_dir),
    )
    doc.simulation_config()
    return doc


def load_config(path):
    # type: (Path) -> ConfigDocument
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config file not found: %s" % path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError("%s:%d: invalid JSON: %s" % (path, exc.lineno, exc.msg))
    return parse_config(data, base_dir=path.parent)


def dump_config(doc, path):
    # type: (ConfigDocument, Path) -> Path
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    return path
