"""Thermal state-space model of the single-zone household.

The household carries up to five temperature states: room air, floor slab,
floor-heating pipe water, refrigerator chamber and the outdoor water heater.
Each state follows a first-order heat balance. The continuous rates are built
per period (the water-heater draw and the window solar gain vary in time) and
discretized with forward Euler into x_t = A_d,t x_t-1 + B_d,t u_t-1 + E_d,t z_t-1.

Internal units are SI (W, J/degC, s). Electrical controls arrive in kW and are
converted with the x1000 factor inside the coefficients.
"""

import dataclasses
import enum
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from lib.errors import ModelError
from lib.log import log

STATE_NAMES = ("room", "floor", "pipe_water", "fridge", "waterheater")
CONTROL_NAMES = ("hp", "heat", "cool", "al", "bl", "rf", "wh")
POWER_CONTROLS = ("hp", "heat", "cool", "al", "rf", "wh")
DISTURBANCE_NAMES = ("ambient", "occupancy", "hot_water_draw")

WATER_DENSITY = 1.0  # kg per litre


class HeaterVariant(enum.Enum):
    """Space-heating technology of the household."""

    FLOOR_HEATING = "fh"
    HVAC = "hvac"

    @classmethod
    def parse(cls, value):
        # type: (Union[str, HeaterVariant]) -> HeaterVariant
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ModelError("unknown heater variant %r (expected 'fh' or 'hvac')" % (value,))


_ACTIVE_STATES = {
    HeaterVariant.FLOOR_HEATING: ("room", "floor", "pipe_water", "fridge", "waterheater"),
    HeaterVariant.HVAC: ("room", "fridge", "waterheater"),
}

_ACTIVE_CONTROLS = {
    HeaterVariant.FLOOR_HEATING: ("hp", "al", "bl", "rf", "wh"),
    HeaterVariant.HVAC: ("heat", "cool", "al", "bl", "rf", "wh"),
}


def active_states(variant):
    # type: (HeaterVariant) -> Tuple[str, ...]
    """State names carried by the model of a heater variant, in model order."""
    return _ACTIVE_STATES[HeaterVariant.parse(variant)]


def active_controls(variant):
    # type: (HeaterVariant) -> Tuple[str, ...]
    """Control names available under a heater variant, in model order."""
    return _ACTIVE_CONTROLS[HeaterVariant.parse(variant)]


def heating_control(variant):
    # type: (HeaterVariant) -> str
    """Name of the space-heating power control (u^hp or u^heat)."""
    return "hp" if HeaterVariant.parse(variant) is HeaterVariant.FLOOR_HEATING else "heat"


@dataclass(frozen=True)
class BuildingSpec:
    """Physical parameters of the household.

    UA values in W/degC, capacities in J/degC, powers in kW. Device data
    (refrigerator, water heater, floor-heating water mass, COPs, ratings,
    lighting) describe a typical detached house; the room and floor envelope
    values are sized so a 1 kW thermal input holds 20 degC at 0 degC outdoors.
    """

    ua_room_ambient: float = 50.0
    ua_floor_room: float = 600.0
    ua_water_floor: float = 150.0
    ua_room_fridge: float = 0.678
    ua_waterheater_ambient: float = 0.5
    cap_room: float = 810.0e3
    cap_floor: float = 3315.0e3
    cap_pipewater: float = 400.0 * 4186.0
    cap_fridge: float = 6.65 * 3600.0
    cap_waterheater: float = 34.85 * 3600.0
    cop_hp: float = 3.0
    cop_heat: float = 1.67
    cop_cool: float = 3.67
    cop_fridge: float = 0.76
    cop_waterheater: float = 0.92
    pmax_hp: float = 1.0
    pmax_heat: float = 1.0
    pmax_cool: float = 1.0
    pmax_wh: float = 1.26
    pmax_rf: float = 0.35
    pmax_al: float = 0.06
    floor_area: float = 30.0
    window_area: float = 1.0
    solar_transmittance_split: float = 1.0
    internal_gain_per_occupancy: float = 0.1
    water_specific_heat: float = 4186.0
    inlet_water_temp: float = 10.0
    lum_efficacy_indoor: float = 90.0e3
    lum_efficacy_daylight: float = 105.0

    _CAPACITIES = ("cap_room", "cap_floor", "cap_pipewater", "cap_fridge", "cap_waterheater")
    _COPS = ("cop_hp", "cop_heat", "cop_cool", "cop_fridge", "cop_waterheater")
    _UAS = ("ua_room_ambient", "ua_floor_room", "ua_water_floor", "ua_room_fridge",
            "ua_waterheater_ambient")
    _PMAX = ("pmax_hp", "pmax_heat", "pmax_cool", "pmax_wh", "pmax_rf", "pmax_al")

    def validate(self):
        # type: () -> BuildingSpec
        """Check the physical invariants, raising ModelError on the first violation."""
        for name in dataclasses.asdict(self):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ModelError("building.%s must be finite, got %r" % (name, value))
        positive = self._CAPACITIES + self._COPS + (
            "floor_area", "window_area", "water_specific_heat",
            "lum_efficacy_indoor", "lum_efficacy_daylight")
        for name in positive:
            if getattr(self, name) <= 0:
                raise ModelError("building.%s must be > 0, got %r" % (name, getattr(self, name)))
        for name in self._UAS + self._PMAX + ("internal_gain_per_occupancy",):
            if getattr(self, name) < 0:
                raise ModelError("building.%s must be >= 0, got %r" % (name, getattr(self, name)))
        if not 0.0 <= self.solar_transmittance_split <= 1.0:
            raise ModelError("building.solar_transmittance_split must lie in [0, 1]")
        return self

    def pmax(self, control):
        # type: (str) -> float
        """Upper bound of a control (kW, or p.u. for the blind)."""
        if control == "bl":
            return 1.0
        return float(getattr(self, "pmax_" + control))

    def with_ua_factor(self, factor):
        # type: (float) -> BuildingSpec
        """Copy with UA^{r,a} multiplied by factor (insulation sensitivity)."""
        if factor <= 0:
            raise ModelError("ua_ra_factor must be > 0, got %r" % (factor,))
        return dataclasses.replace(self, ua_room_ambient=self.ua_room_ambient * factor)

    def to_dict(self):
        # type: () -> Dict[str, float]
        return dataclasses.asdict(self)

    @classmethod
    def field_names(cls):
        # type: () -> Tuple[str, ...]
        return tuple(f.name for f in dataclasses.fields(cls))


@dataclass(frozen=True)
class StateVector:
    """Temperatures in degC; None marks a state disabled under the variant."""

    room: Optional[float] = 20.0
    floor: Optional[float] = 20.0
    pipe_water: Optional[float] = 20.0
    fridge: Optional[float] = 5.0
    waterheater: Optional[float] = 55.0

    def value(self, name):
        # type: (str) -> float
        v = getattr(self, name)
        if v is None:
            raise ModelError("state %r is disabled" % name)
        return float(v)

    def for_variant(self, variant):
        # type: (HeaterVariant) -> StateVector
        """Copy with the states inactive under variant disabled."""
        active = active_states(variant)
        return StateVector(**{n: (getattr(self, n) if n in active else None) for n in STATE_NAMES})

    def to_array(self, variant):
        # type: (HeaterVariant) -> np.ndarray
        active = active_states(variant)
        for name in STATE_NAMES:
            if name not in active and getattr(self, name) is not None:
                raise ModelError(
                    "state %r is disabled under %s but carries a value"
                    % (name, HeaterVariant.parse(variant).value))
        values = [self.value(n) for n in active]
        if not np.all(np.isfinite(values)):
            raise ModelError("active states must be finite, got %r" % (values,))
        return np.array(values, dtype=float)

    @classmethod
    def from_array(cls, variant, values):
        # type: (HeaterVariant, Sequence[float]) -> StateVector
        active = active_states(variant)
        if len(values) != len(active):
            raise ModelError("expected %d states, got %d" % (len(active), len(values)))
        data = dict.fromkeys(STATE_NAMES)
        for name, v in zip(active, values):
            data[name] = float(v)
        return cls(**data)


@dataclass(frozen=True)
class ControlVector:
    """Electrical controls in kW; blind position in p.u."""

    hp: float = 0.0
    heat: float = 0.0
    cool: float = 0.0
    al: float = 0.0
    bl: float = 0.0
    rf: float = 0.0
    wh: float = 0.0

    def to_array(self, variant):
        # type: (HeaterVariant) -> np.ndarray
        active = active_controls(variant)
        for name in CONTROL_NAMES:
            if name not in active and getattr(self, name) != 0.0:
                raise ModelError(
                    "control %r is not available under %s"
                    % (name, HeaterVariant.parse(variant).value))
        return np.array([getattr(self, n) for n in active], dtype=float)

    @classmethod
    def from_array(cls, variant, values):
        # type: (HeaterVariant, Sequence[float]) -> ControlVector
        active = active_controls(variant)
        if len(values) != len(active):
            raise ModelError("expected %d controls, got %d" % (len(active), len(values)))
        return cls(**{n: float(v) for n, v in zip(active, values)})

    def check_bounds(self, spec, tol=1e-9):
        # type: (BuildingSpec, float) -> None
        """Raise ModelError unless 0 <= u <= pmax for every control."""
        for name in CONTROL_NAMES:
            v = getattr(self, name)
            if v < -tol or v > spec.pmax(name) + tol:
                raise ModelError("control %s=%r outside [0, %r]" % (name, v, spec.pmax(name)))


@dataclass(frozen=True)
class DisturbanceVector:
    """Exogenous inputs of one period.

    ambient degC, occupancy >= 0, hot_water_draw litres per period,
    solar_illuminance lumen at the window, standby kW.
    """

    ambient: float = 0.0
    occupancy: float = 0.0
    hot_water_draw: float = 0.0
    solar_illuminance: float = 0.0
    standby: float = 0.0

    def __post_init__(self):
        if self.hot_water_draw < 0 or self.occupancy < 0 or self.solar_illuminance < 0:
            raise ModelError("disturbance draw, occupancy and illuminance must be >= 0: %r" % (self,))


@dataclass(frozen=True)
class DisturbanceSeries:
    """Column-wise disturbances over a horizon (one array per field)."""

    ambient: np.ndarray
    occupancy: np.ndarray
    hot_water_draw: np.ndarray
    solar_illuminance: np.ndarray
    standby: np.ndarray

    def __post_init__(self):
        n = len(self.ambient)
        for f in dataclasses.fields(self):
            arr = np.asarray(getattr(self, f.name), dtype=float)
            if arr.ndim != 1 or len(arr) != n:
                raise ModelError("disturbance series %r must be 1-D of length %d" % (f.name, n))
            if not np.all(np.isfinite(arr)):
                raise ModelError("disturbance series %r holds non-finite values" % f.name)
            arr.setflags(write=False)
            object.__setattr__(self, f.name, arr)
        for name in ("occupancy", "hot_water_draw", "solar_illuminance"):
            if np.any(getattr(self, name) < 0):
                raise ModelError("disturbance series %r must be >= 0" % name)

    def __len__(self):
        return len(self.ambient)

    def at(self, t):
        # type: (int) -> DisturbanceVector
        return DisturbanceVector(**{f.name: float(getattr(self, f.name)[t])
                                    for f in dataclasses.fields(self)})

    def window(self, start, stop):
        # type: (int, int) -> DisturbanceSeries
        return DisturbanceSeries(**{f.name: getattr(self, f.name)[start:stop]
                                    for f in dataclasses.fields(self)})

    def z_matrix(self):
        # type: () -> np.ndarray
        """Disturbances entering E, shape (T, 3): ambient, occupancy, draw."""
        return np.column_stack([self.ambient, self.occupancy, self.hot_water_draw])

    @classmethod
    def from_vectors(cls, vectors):
        # type: (Iterable[DisturbanceVector]) -> DisturbanceSeries
        vectors = list(vectors)
        return cls(**{f.name: np.array([getattr(v, f.name) for v in vectors], dtype=float)
                      for f in dataclasses.fields(cls)})


def as_series(disturbances):
    # type: (Union[DisturbanceSeries, Sequence[DisturbanceVector]]) -> DisturbanceSeries
    if isinstance(disturbances, DisturbanceSeries):
        return disturbances
    return DisturbanceSeries.from_vectors(disturbances)


@dataclass(frozen=True)
class ContinuousModel:
    """Per-period continuous rates dx/dt = A_t x + B_t u + E_t z (per second)."""

    variant: HeaterVariant
    dt: float
    states: Tuple[str, ...]
    controls: Tuple[str, ...]
    a_mats: np.ndarray
    b_mats: np.ndarray
    e_mats: np.ndarray

    @property
    def n_steps(self):
        # type: () -> int
        return self.a_mats.shape[0]


@dataclass(frozen=True)
class DiscreteModel:
    """Euler-discretized per-period matrices A_d,t, B_d,t, E_d,t."""

    variant: HeaterVariant
    dt: float
    states: Tuple[str, ...]
    controls: Tuple[str, ...]
    a_mats: np.ndarray
    b_mats: np.ndarray
    e_mats: np.ndarray
    disturbances: Tuple[str, ...] = DISTURBANCE_NAMES

    def __post_init__(self):
        for name in ("a_mats", "b_mats", "e_mats"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        _check_dimensions(self.a_mats, self.b_mats, self.e_mats,
                          len(self.states), len(self.controls), len(self.disturbances))

    @property
    def n_steps(self):
        # type: () -> int
        return self.a_mats.shape[0]

    def state_index(self, name):
        # type: (str) -> int
        try:
            return self.states.index(name)
        except ValueError:
            raise ModelError("state %r is disabled under %s" % (name, self.variant.value))

    def control_index(self, name):
        # type: (str) -> int
        try:
            return self.controls.index(name)
        except ValueError:
            raise ModelError("control %r is not available under %s" % (name, self.variant.value))


def _check_dimensions(a, b, e, ns, nu, nz):
    if a.ndim != 3 or a.shape[1:] != (ns, ns):
        raise ModelError("A matrices must have shape (T, %d, %d), got %s" % (ns, ns, a.shape))
    t = a.shape[0]
    if b.shape != (t, ns, nu):
        raise ModelError("B matrices must have shape (%d, %d, %d), got %s" % (t, ns, nu, b.shape))
    if e.shape != (t, ns, nz):
        raise ModelError("E matrices must have shape (%d, %d, %d), got %s" % (t, ns, nz, e.shape))


def build_continuous_coefficients(spec, variant, disturbances, dt=900.0):
    # type: (BuildingSpec, HeaterVariant, Union[DisturbanceSeries, Sequence[DisturbanceVector]], float) -> ContinuousModel
    """Heat-balance rates for every period of the disturbance sequence.

    dt (s) converts the hot-water draw from litres per period to a mass flow.
    """
    if not isinstance(variant, HeaterVariant):
        raise ModelError("variant must be a HeaterVariant, got %r" % (variant,))
    spec.validate()
    if dt <= 0:
        raise ModelError("dt must be > 0, got %r" % (dt,))
    series = as_series(disturbances)
    n_t = len(series)
    if n_t == 0:
        raise ModelError("disturbance sequence must not be empty")

    states = active_states(variant)
    controls = active_controls(variant)
    si = {n: i for i, n in enumerate(states)}
    ci = {n: i for i, n in enumerate(controls)}
    zi = {n: i for i, n in enumerate(DISTURBANCE_NAMES)}
    fh = variant is HeaterVariant.FLOOR_HEATING

    a = np.zeros((len(states), len(states)))
    b = np.zeros((len(states), len(controls)))
    e = np.zeros((len(states), len(DISTURBANCE_NAMES)))

    r, rf, wh = si["room"], si["fridge"], si["waterheater"]
    c_r = spec.cap_room
    ua_fr = spec.ua_floor_room if fh else 0.0

    a[r, r] = -(spec.ua_room_ambient + ua_fr + spec.ua_room_fridge) / c_r
    a[r, rf] = spec.ua_room_fridge / c_r
    b[r, ci["al"]] = 1000.0 / c_r
    e[r, zi["ambient"]] = spec.ua_room_ambient / c_r
    e[r, zi["occupancy"]] = 1000.0 * spec.internal_gain_per_occupancy / c_r
    if fh:
        f, w = si["floor"], si["pipe_water"]
        a[r, f] = ua_fr / c_r
        a[f, f] = -(ua_fr + spec.ua_water_floor) / spec.cap_floor
        a[f, r] = ua_fr / spec.cap_floor
        a[f, w] = spec.ua_water_floor / spec.cap_floor
        a[w, w] = -spec.ua_water_floor / spec.cap_pipewater
        a[w, f] = spec.ua_water_floor / spec.cap_pipewater
        b[w, ci["hp"]] = spec.cop_hp * 1000.0 / spec.cap_pipewater
    else:
        b[r, ci["heat"]] = spec.cop_heat * 1000.0 / c_r
        b[r, ci["cool"]] = -spec.cop_cool * 1000.0 / c_r

    a[rf, rf] = -spec.ua_room_fridge / spec.cap_fridge
    a[rf, r] = spec.ua_room_fridge / spec.cap_fridge
    b[rf, ci["rf"]] = -spec.cop_fridge * 1000.0 / spec.cap_fridge

    c_wh = spec.cap_waterheater
    a[wh, wh] = -spec.ua_waterheater_ambient / c_wh
    b[wh, ci["wh"]] = spec.cop_waterheater * 1000.0 / c_wh
    e[wh, zi["ambient"]] = spec.ua_waterheater_ambient / c_wh
    # draw litres per period -> kg/s; inlet water enters through the draw column
    e[wh, zi["hot_water_draw"]] = spec.water_specific_heat * spec.inlet_water_temp / (dt * c_wh)

    a_mats = np.repeat(a[None, :, :], n_t, axis=0)
    mass_flow = series.hot_water_draw * WATER_DENSITY / dt
    a_mats[:, wh, wh] -= mass_flow * spec.water_specific_heat / c_wh

    b_mats = np.repeat(b[None, :, :], n_t, axis=0)
    solar_w = series.solar_illuminance / spec.lum_efficacy_daylight
    room_share = spec.solar_transmittance_split if fh else 1.0
    b_mats[:, r, ci["bl"]] = room_share * solar_w / c_r
    if fh:
        b_mats[:, si["floor"], ci["bl"]] = (1.0 - room_share) * solar_w / spec.cap_floor

    e_mats = np.repeat(e[None, :, :], n_t, axis=0)
    for arr in (a_mats, b_mats, e_mats):
        arr.setflags(write=False)
    return ContinuousModel(variant, float(dt), states, controls, a_mats, b_mats, e_mats)


def discretize(continuous, dt):
    # type: (ContinuousModel, float) -> DiscreteModel
    """Forward Euler: A_d = I + dt A, B_d = dt B, E_d = dt E."""
    if dt <= 0:
        raise ModelError("dt must be > 0, got %r" % (dt,))
    ns, nu = len(continuous.states), len(continuous.controls)
    _check_dimensions(continuous.a_mats, continuous.b_mats, continuous.e_mats,
                      ns, nu, len(DISTURBANCE_NAMES))
    a_d = np.eye(ns)[None, :, :] + dt * continuous.a_mats
    diag = np.diagonal(a_d, axis1=1, axis2=2)
    if np.any(diag < 0):
        t, i = np.argwhere(diag < 0)[0]
        log("discretize: A_d diagonal for state %s is %.4g at period %d; "
            "dt=%gs exceeds the Euler stability limit"
            % (continuous.states[i], diag[t, i], t, dt))
    return DiscreteModel(
        variant=continuous.variant,
        dt=float(dt),
        states=continuous.states,
        controls=continuous.controls,
        a_mats=a_d,
        b_mats=dt * continuous.b_mats,
        e_mats=dt * continuous.e_mats,
    )


def build_model(spec, variant, disturbances, dt=900.0):
    # type: (BuildingSpec, HeaterVariant, Union[DisturbanceSeries, Sequence[DisturbanceVector]], float) -> DiscreteModel
    """Continuous coefficients followed by Euler discretization."""
    return discretize(build_continuous_coefficients(spec, variant, disturbances, dt), dt)


def step(model, t, x_prev, u_prev, z_prev):
    # type: (DiscreteModel, int, StateVector, ControlVector, DisturbanceVector) -> StateVector
    """Propagate one period: x_t = A_d,t x_t-1 + B_d,t u_t-1 + E_d,t z_t-1."""
    if not 0 <= t < model.n_steps:
        raise ModelError("period index %d outside model horizon [0, %d)" % (t, model.n_steps))
    x = x_prev.to_array(model.variant)
    u = u_prev.to_array(model.variant)
    z = np.array([z_prev.ambient, z_prev.occupancy, z_prev.hot_water_draw], dtype=float)
    return StateVector.from_array(model.variant, step_array(model, t, x, u, z))


def step_array(model, t, x, u, z):
    # type: (DiscreteModel, int, np.ndarray, np.ndarray, np.ndarray) -> np.ndarray
    """Array form of step() over the active states/controls."""
    return model.a_mats[t] @ x + model.b_mats[t] @ u + model.e_mats[t] @ z


def simulate_states(model, x0, controls, z):
    # type: (DiscreteModel, np.ndarray, np.ndarray, np.ndarray) -> np.ndarray
    """Roll the model forward; returns end-of-period states, shape (T, ns)."""
    n_t = controls.shape[0]
    if n_t > model.n_steps:
        raise ModelError("%d control periods exceed model horizon %d" % (n_t, model.n_steps))
    out = np.empty((n_t, len(model.states)))
    x = np.asarray(x0, dtype=float)
    for t in range(n_t):
        x = step_array(model, t, x, controls[t], z[t])
        out[t] = x
    return out
