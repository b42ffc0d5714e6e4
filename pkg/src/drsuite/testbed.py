"""Synthetic multi-zone RC-network building: training-data generator and
closed-loop ground-truth oracle for the decision suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from .dataset import Column, TimeStampedDataset
from .errors import InvalidArgument
from .horizon import Strategy

CONTROL_NAMES = ("chw_setpoint", "zone_setpoint", "lighting")

# weekday internal gains (kW per zone) by hour of day
_DEFAULT_INTERNAL = tuple(
    2.0 if h < 7 or h >= 20 else 8.0 if 9 <= h < 18 else 5.0 for h in range(24)
)


@dataclass(frozen=True)
class RcBuildingConfig:
    zones: int = 3
    resistance: float = 2.0  # degC per kW, per zone envelope
    capacitance: float = 10.0  # kWh per degC, per zone
    hvac_gain: float = 18.0  # kW thermal extracted per degC above set-point
    hvac_electric: float = 0.35  # kW electric per kW thermal
    chw_nominal: float = 7.0  # degC; cooling strength scales around this
    chw_coeff: float = 0.08  # per degC of CHW set-point below nominal
    light_peak_kw: float = 45.0
    light_heat_fraction: float = 0.9
    solar_gain: float = 4.0  # kW per zone at unit solar flux
    base_load_kw: float = 40.0
    internal_schedule: tuple = _DEFAULT_INTERNAL
    weekend_factor: float = 0.3
    interval_minutes: int = 5
    seed: int = 0

    control_ranges: dict = field(default_factory=lambda: {
        "chw_setpoint": (5.0, 12.0),
        "zone_setpoint": (20.0, 28.0),
        "lighting": (0.0, 1.0),
    })

    def __post_init__(self):
        if self.zones < 1:
            raise InvalidArgument("need at least one zone")
        for name in ("resistance", "capacitance", "hvac_gain", "hvac_electric"):
            if getattr(self, name) <= 0:
                raise InvalidArgument(f"{name} must be positive")


@dataclass
class SimState:
    zone_temps: list[float]
    time_index: int = 0


def _internal_gain(config: RcBuildingConfig, when: datetime) -> float:
    gain = config.internal_schedule[when.hour]
    if when.isoweekday() >= 6:
        gain *= config.weekend_factor
    return gain


def _clamp_controls(config: RcBuildingConfig, controls: dict) -> tuple[dict, bool]:
    clamped = {}
    hit = False
    for name in CONTROL_NAMES:
        lo, hi = config.control_ranges[name]
        v = float(controls[name])
        cv = min(max(v, lo), hi)
        hit = hit or cv != v
        clamped[name] = cv
    return clamped, hit


def simulate_step(config: RcBuildingConfig, state: SimState, controls: dict,
                  weather: dict, when: datetime | None = None):
    """Advance one interval with explicit Euler.

    Per zone: T' = T + (dt/C) * [(T_out - T)/R + internal + solar + light - hvac]
    where hvac extraction is hvac_gain * max(0, T - zone_setpoint) scaled by
    a chilled-water factor that grows as the CHW set-point drops. Electric
    power = hvac_electric * total extraction + lighting + base load.
    Out-of-range controls are clamped, flagged, never rejected."""
    controls, clamped = _clamp_controls(config, controls)
    dt_h = config.interval_minutes / 60.0
    t_out = float(weather["oat"])
    solar = float(weather.get("solar", 0.0))
    internal = _internal_gain(config, when) if when is not None else 0.0

    chw_factor = max(0.1, 1.0 + config.chw_coeff * (config.chw_nominal - controls["chw_setpoint"]))
    light_heat = controls["lighting"] * config.light_peak_kw * config.light_heat_fraction / config.zones

    next_temps = []
    total_extraction = 0.0
    for t_zone in state.zone_temps:
        q_hvac = config.hvac_gain * max(0.0, t_zone - controls["zone_setpoint"]) * chw_factor
        total_extraction += q_hvac
        flow = (
            (t_out - t_zone) / config.resistance
            + internal
            + solar * config.solar_gain
            + light_heat
            - q_hvac
        )
        next_temps.append(t_zone + dt_h / config.capacitance * flow)

    power = (
        config.hvac_electric * total_extraction
        + controls["lighting"] * config.light_peak_kw
        + config.base_load_kw
    )
    next_state = SimState(zone_temps=next_temps, time_index=state.time_index + 1)
    return next_state, float(power), list(state.zone_temps), clamped


def _weather_trace(config: RcBuildingConfig, start: datetime, n_steps: int,
                   rng: np.random.Generator):
    """Sinusoidal summer day with slow seeded noise."""
    oat, solar = [], []
    drift = 0.0
    for i in range(n_steps):
        when = start + timedelta(minutes=i * config.interval_minutes)
        hour = when.hour + when.minute / 60.0
        drift = 0.98 * drift + rng.normal(0.0, 0.15)
        oat.append(29.0 + 6.0 * math.sin(2 * math.pi * (hour - 9.0) / 24.0) + drift)
        solar.append(max(0.0, math.sin(math.pi * (hour - 6.0) / 14.0)) + 0.05 * rng.normal())
    return oat, solar


def _nominal_controls(when: datetime) -> dict:
    occupied = 7 <= when.hour < 19 and when.isoweekday() <= 5
    return {
        "chw_setpoint": 7.0,
        "zone_setpoint": 23.0 if occupied else 26.0,
        "lighting": 0.9 if occupied else 0.15,
    }


def generate_dataset(config: RcBuildingConfig, days: int,
                     start: datetime = datetime(2013, 6, 1),
                     excitation: float = 1.0) -> TimeStampedDataset:
    """Run the building over `days` with seeded control excitation (uniform
    set-point perturbations on a 1-hour dwell) so downstream leaf
    regressions are identifiable. Deterministic per config.seed."""
    if days < 1:
        raise InvalidArgument("days must be >= 1")
    rng = np.random.default_rng(config.seed)
    steps_per_day = 24 * 60 // config.interval_minutes
    n = days * steps_per_day
    oat, solar = _weather_trace(config, start, n, rng)

    dwell = max(1, 60 // config.interval_minutes)
    state = SimState(zone_temps=[24.0] * config.zones)
    rows = {nm: [] for nm in CONTROL_NAMES}
    temps_log = [[] for _ in range(config.zones)]
    power_log = []
    timestamps = []
    perturb = {"chw_setpoint": 0.0, "zone_setpoint": 0.0, "lighting": 0.0}
    for i in range(n):
        when = start + timedelta(minutes=i * config.interval_minutes)
        if i % dwell == 0:
            perturb = {
                "chw_setpoint": excitation * rng.uniform(-2.0, 2.0),
                "zone_setpoint": excitation * rng.uniform(-2.0, 2.0),
                "lighting": excitation * rng.uniform(-0.3, 0.3),
            }
        controls = _nominal_controls(when)
        controls = {k: controls[k] + perturb[k] for k in CONTROL_NAMES}
        weather = {"oat": oat[i], "solar": solar[i]}
        state, power, temps, _ = simulate_step(config, state, controls, weather, when)
        timestamps.append(when)
        for k in CONTROL_NAMES:
            rows[k].append(min(max(controls[k], config.control_ranges[k][0]),
                               config.control_ranges[k][1]))
        for z in range(config.zones):
            temps_log[z].append(temps[z])
        power_log.append(power)

    columns = [
        Column("oat", "continuous", "disturbance", np.array(oat), "degC"),
        Column("solar", "continuous", "disturbance", np.array(solar), "frac"),
        Column("chw_setpoint", "continuous", "control", np.array(rows["chw_setpoint"]), "degC"),
        Column("zone_setpoint", "continuous", "control", np.array(rows["zone_setpoint"]), "degC"),
        Column("lighting", "continuous", "control", np.array(rows["lighting"]), "frac"),
    ]
    for z in range(config.zones):
        columns.append(Column(f"zone_temp_{z + 1}", "continuous", "response",
                              np.array(temps_log[z]), "degC"))
    columns.append(Column("power", "continuous", "response", np.array(power_log), "kW"))
    return TimeStampedDataset(tuple(timestamps), tuple(columns), config.interval_minutes)


def ground_truth_strategy_energy(config: RcBuildingConfig, initial: SimState,
                                 strategy: Strategy,
                                 weather_trace: list[dict],
                                 start: datetime | None = None):
    """Closed-loop rollout of a fixed strategy; returns (total kWh, power
    trajectory, zone temp trajectory)."""
    if len(weather_trace) != strategy.horizon:
        raise InvalidArgument(
            f"weather trace has {len(weather_trace)} steps, strategy {strategy.horizon}"
        )
    state = SimState(zone_temps=list(initial.zone_temps), time_index=initial.time_index)
    dt_h = config.interval_minutes / 60.0
    powers, temps = [], []
    for t in range(strategy.horizon):
        when = (start + timedelta(minutes=t * config.interval_minutes)) if start else None
        state, power, zone_temps, _ = simulate_step(
            config, state, strategy.steps[t], weather_trace[t], when
        )
        powers.append(power)
        temps.append(zone_temps)
    total_kwh = float(sum(powers) * dt_h)
    return total_kwh, powers, temps


def make_plant(config: RcBuildingConfig, initial: SimState,
               weather_trace: list[dict], start: datetime | None = None):
    """Closed-loop plant callback for run_dr_event: consumes one control
    dict per call, advances the building, returns (power, zone temps)."""
    state = SimState(zone_temps=list(initial.zone_temps), time_index=initial.time_index)
    step = {"i": 0}

    def plant(controls: dict):
        i = step["i"]
        when = (start + timedelta(minutes=i * config.interval_minutes)) if start else None
        nonlocal_state = plant.state
        new_state, power, zone_temps, _ = simulate_step(
            config, nonlocal_state, controls, weather_trace[i], when
        )
        plant.state = new_state
        step["i"] = i + 1
        return power, zone_temps

    plant.state = state
    return plant
