"""Scenario configuration: JSON schema, validation, and defaults.

Configs are JSON objects with `schema_version: 1` and a `plant` selector
("double_integrator" or "bicopter"). Controller gains default to the shipped
tuning below; geometry, horizons, and references come from the file. All
invariants (gamma strictly inside (0,1), horizons >= 1, duration >= 1) are
enforced at load time so scenario code never revalidates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .barrier import GAMMA_MESSAGE, PolytopicBarrier
from .plants import BicopterParams

SCHEMA_VERSION = 1

DOUBLE_INTEGRATOR = "double_integrator"
BICOPTER = "bicopter"

# Shipped controller tunings (the weights behind them are not recoverable, so
# the gains themselves are the configuration constants).
DI_GAIN = (0.152, 0.542, 0.016)
BICOPTER_GAIN_H = (0.397, 0.918, 0.032)
BICOPTER_GAIN_V = (10.705, 6.3849, 1.392)
BICOPTER_GAIN_ATT = (21.307, 4.182, 0.670)
DEFAULT_ANTI_WINDUP = 0.2
DEFAULT_RAMP_TIME = 5.0


class ConfigError(ValueError):
    """A configuration file failed to parse or validate."""


@dataclass(frozen=True)
class ReferenceProfile:
    """Piecewise-linear reference r(t); holds the end values outside the knots."""

    times: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        if len(self.times) != len(self.values) or not self.times:
            raise ConfigError("reference profile needs matching, nonempty times and values")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ConfigError("reference profile times must be strictly increasing")

    @classmethod
    def constant(cls, value: float) -> "ReferenceProfile":
        return cls((0.0,), (float(value),))

    @classmethod
    def ramp(cls, target: float, ramp_time: float) -> "ReferenceProfile":
        if not ramp_time > 0:
            raise ConfigError(f"reference.ramp_time must be positive, got {ramp_time!r}")
        return cls((0.0, float(ramp_time)), (0.0, float(target)))

    @classmethod
    def from_dict(cls, data: dict, where: str) -> "ReferenceProfile":
        kind = data.get("type")
        if kind == "constant":
            return cls.constant(_number(data, "value", where))
        if kind == "ramp":
            target = _number(data, "target", where)
            ramp_time = float(data.get("ramp_time", DEFAULT_RAMP_TIME))
            return cls.ramp(target, ramp_time)
        if kind == "piecewise":
            times = data.get("times")
            values = data.get("values")
            if not isinstance(times, list) or not isinstance(values, list):
                raise ConfigError(f"{where}: piecewise profile needs 'times' and 'values' lists")
            return cls(tuple(float(t) for t in times), tuple(float(v) for v in values))
        raise ConfigError(
            f"{where}.type must be one of 'constant', 'ramp', 'piecewise', got {kind!r}"
        )

    def at(self, t: float) -> float:
        return float(np.interp(t, self.times, self.values))


@dataclass(frozen=True)
class DoubleIntegratorScenario:
    ts: float
    duration: int
    delay_steps: int
    reference: ReferenceProfile
    barrier: PolytopicBarrier
    filter_enabled: bool
    gamma: Optional[float]
    horizon: Optional[int]
    gain: Tuple[float, ...]
    anti_windup: float


@dataclass(frozen=True)
class BicopterScenario:
    ts: float
    duration: int
    params: BicopterParams
    reference_h: ReferenceProfile
    reference_v: ReferenceProfile
    barrier_h: PolytopicBarrier
    barrier_v: PolytopicBarrier
    filter_enabled: bool
    gamma: Optional[float]
    horizon_h: Optional[int]
    horizon_v: Optional[int]
    gain_h: Tuple[float, ...]
    gain_v: Tuple[float, ...]
    gain_att: Tuple[float, ...]
    anti_windup: float
    substeps: int


@dataclass(frozen=True)
class ScenarioConfig:
    plant: str
    scenario: object
    seed: Optional[int] = None
    output_dir: Optional[str] = None
    trace_name: str = "trace.csv"
    raw: dict = field(default=None, repr=False, compare=False)


def _number(data: dict, key: str, where: str) -> float:
    if key not in data:
        raise ConfigError(f"{where}.{key} is required")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {value!r}")
    return float(value)


def _positive_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{where} must be an integer >= 1, got {value!r}")
    return value


def _gain(data: dict, key: str, default: Tuple[float, ...], where: str) -> Tuple[float, ...]:
    raw = data.get(key, list(default))
    if not isinstance(raw, list) or len(raw) != 3:
        raise ConfigError(f"{where}.{key} must be a list of 3 numbers")
    return tuple(float(v) for v in raw)


def _barrier_from(data: dict, keys: Tuple[str, str, str, str], where: str) -> PolytopicBarrier:
    """Either interval bounds (two per state) or explicit polytope rows."""
    if "rows" in data or "offsets" in data:
        rows = data.get("rows")
        offsets = data.get("offsets")
        if not isinstance(rows, list) or not isinstance(offsets, list):
            raise ConfigError(f"{where}: polytope constraints need 'rows' and 'offsets' lists")
        try:
            return PolytopicBarrier(np.array(rows, dtype=float),
                                    np.array(offsets, dtype=float).reshape(-1, 1))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    lo1, hi1, lo2, hi2 = (_number(data, k, where) for k in keys)
    try:
        return PolytopicBarrier.from_box([(lo1, hi1), (lo2, hi2)])
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _filter_block(data: dict) -> tuple[bool, Optional[float], dict]:
    block = data.get("filter", {"enabled": False})
    if not isinstance(block, dict):
        raise ConfigError("filter must be an object")
    enabled = bool(block.get("enabled", True))
    gamma = None
    if enabled:
        gamma = _number(block, "gamma", "filter")
        if not 0.0 < gamma < 1.0:
            raise ConfigError(f"filter.gamma: {GAMMA_MESSAGE}")
    return enabled, gamma, block


def from_dict(data: dict) -> ScenarioConfig:
    """Validate a parsed JSON object into a ScenarioConfig."""
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    plant = data.get("plant")
    if plant not in (DOUBLE_INTEGRATOR, BICOPTER):
        raise ConfigError(
            f"plant must be '{DOUBLE_INTEGRATOR}' or '{BICOPTER}', got {plant!r}"
        )
    duration = _positive_int(data.get("duration_steps"), "duration_steps")
    seed = data.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    output = data.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("output must be an object")
    output_dir = output.get("dir")
    trace_name = output.get("trace_name", "trace.csv")
    controller = data.get("controller", {})
    if not isinstance(controller, dict):
        raise ConfigError("controller must be an object")
    anti_windup = float(controller.get("anti_windup", DEFAULT_ANTI_WINDUP))
    if anti_windup < 0:
        raise ConfigError(f"controller.anti_windup must be nonnegative, got {anti_windup!r}")
    enabled, gamma, filter_block = _filter_block(data)

    if plant == DOUBLE_INTEGRATOR:
        ts = float(data.get("sample_time", 1.0))
        if not ts > 0:
            raise ConfigError(f"sample_time must be positive, got {ts!r}")
        delay = data.get("delay_steps", 0)
        if isinstance(delay, bool) or not isinstance(delay, int) or delay < 0:
            raise ConfigError(f"delay_steps must be an integer >= 0, got {delay!r}")
        if "reference" not in data:
            raise ConfigError("reference is required")
        reference = ReferenceProfile.from_dict(data["reference"], "reference")
        constraints = data.get("constraints")
        if not isinstance(constraints, dict):
            raise ConfigError("constraints must be an object")
        barrier = _barrier_from(
            constraints, ("x1_min", "x1_max", "x2_min", "x2_max"), "constraints"
        )
        horizon = None
        if enabled:
            horizon = _positive_int(filter_block.get("horizon"), "filter.horizon")
        scenario = DoubleIntegratorScenario(
            ts=ts,
            duration=duration,
            delay_steps=delay,
            reference=reference,
            barrier=barrier,
            filter_enabled=enabled,
            gamma=gamma,
            horizon=horizon,
            gain=_gain(controller, "gain", DI_GAIN, "controller"),
            anti_windup=anti_windup,
        )
    else:
        ts = float(data.get("sample_time", 0.005))
        if not ts > 0:
            raise ConfigError(f"sample_time must be positive, got {ts!r}")
        params_block = data.get("params", {})
        if not isinstance(params_block, dict):
            raise ConfigError("params must be an object")
        try:
            params = BicopterParams(
                mass=float(params_block.get("mass", 1.0)),
                inertia=float(params_block.get("inertia", 0.01)),
                arm=float(params_block.get("arm", 0.5)),
                gravity=float(params_block.get("gravity", 9.81)),
            )
        except ValueError as exc:
            raise ConfigError(f"params: {exc}") from exc
        ref_block = data.get("reference")
        if not isinstance(ref_block, dict) or "horizontal" not in ref_block or "vertical" not in ref_block:
            raise ConfigError("reference must contain 'horizontal' and 'vertical' profiles")
        reference_h = ReferenceProfile.from_dict(ref_block["horizontal"], "reference.horizontal")
        reference_v = ReferenceProfile.from_dict(ref_block["vertical"], "reference.vertical")
        constraints = data.get("constraints")
        if not isinstance(constraints, dict) or "horizontal" not in constraints or "vertical" not in constraints:
            raise ConfigError("constraints must contain 'horizontal' and 'vertical' objects")
        keys = ("p_min", "p_max", "v_min", "v_max")
        barrier_h = _barrier_from(constraints["horizontal"], keys, "constraints.horizontal")
        barrier_v = _barrier_from(constraints["vertical"], keys, "constraints.vertical")
        horizon_h = horizon_v = None
        if enabled:
            horizon_h = _positive_int(filter_block.get("horizon_h"), "filter.horizon_h")
            horizon_v = _positive_int(filter_block.get("horizon_v"), "filter.horizon_v")
        substeps = data.get("substeps", 10)
        scenario = BicopterScenario(
            ts=ts,
            duration=duration,
            params=params,
            reference_h=reference_h,
            reference_v=reference_v,
            barrier_h=barrier_h,
            barrier_v=barrier_v,
            filter_enabled=enabled,
            gamma=gamma,
            horizon_h=horizon_h,
            horizon_v=horizon_v,
            gain_h=_gain(controller, "gain_h", BICOPTER_GAIN_H, "controller"),
            gain_v=_gain(controller, "gain_v", BICOPTER_GAIN_V, "controller"),
            gain_att=_gain(controller, "gain_att", BICOPTER_GAIN_ATT, "controller"),
            anti_windup=anti_windup,
            substeps=_positive_int(substeps, "substeps"),
        )
    return ScenarioConfig(
        plant=plant,
        scenario=scenario,
        seed=seed,
        output_dir=output_dir,
        trace_name=str(trace_name),
        raw=data,
    )


def load_config(path) -> ScenarioConfig:
    """Parse and validate a JSON scenario file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"invalid JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return from_dict(data)
