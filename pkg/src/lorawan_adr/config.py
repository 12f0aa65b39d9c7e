"""Scenario configuration: JSON schema, preset defaults and builders."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import jsonschema

from . import core
from .core import ChannelModel, NetworkInputs, RadioLimits, TrafficProfile
from .planner import PowerPolicy, Rounding, make_targets, plan_geometry_first, plan_radius_first

SEED_ENV = "LORA_PLANNER_SEED"

# per-probe trial counts when the config leaves ``trials`` unset; the
# capacity bisection needs the larger budget to pin capacities to a few percent
DEFAULT_TRIALS = {"simulate": 200_000, "capacity-search": 1_000_000, "curves": 1_000_000}

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_prob = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "lorawan-adr scenario",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "preset": {"enum": sorted(core.PRESETS)},
        "carrier_frequency_hz": _pos,
        "bandwidth_hz": _pos,
        "noise_figure_db": _num,
        "noise_power_dbm": {"type": ["number", "null"]},
        "path_loss_exponent": {"type": "number", "exclusiveMinimum": 2},
        "sir_threshold_db": _num,
        "message_period_s": _pos,
        "duty_cycles": {
            "type": ["array", "null"],
            "items": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            "minItems": core.NUM_RINGS,
            "maxItems": core.NUM_RINGS,
        },
        "min_power_dbm": _num,
        "max_power_dbm": _num,
        "power_step_db": _pos,
        "t_c0": _prob,
        "t_h0": {"anyOf": [_prob, {"type": "null"}]},
        "radius_m": _pos,
        "policy": {"type": "string", "pattern": r"^(allocated|allocated-discrete|fixed-max|fixed:-?[0-9.]+)$"},
        "rounding": {"enum": [r.value for r in Rounding]},
        "trials": {"anyOf": [{"type": "integer", "minimum": 1}, {"type": "null"}]},
        "curve_trials": {"type": "integer", "minimum": 1},
        "seed": {"anyOf": [{"type": "integer", "minimum": 0, "maximum": 2**64 - 1}, {"type": "null"}]},
        "grid_points": {"type": "integer", "minimum": 2},
        "probe_distances_m": {"type": ["array", "null"], "items": _pos, "minItems": 1},
        "workers": {"type": "integer", "minimum": 1},
    },
}


@dataclass
class ScenarioConfig:
    preset: str = "eu868-suburban"
    carrier_frequency_hz: float = 868e6
    bandwidth_hz: float = 125e3
    noise_figure_db: float = 6.0
    noise_power_dbm: float | None = -117.0
    path_loss_exponent: float = 2.75
    sir_threshold_db: float = 6.0
    message_period_s: float = 900.0
    duty_cycles: list | None = None
    min_power_dbm: float = -1.0
    max_power_dbm: float = 14.0
    power_step_db: float = 1.0
    t_c0: float = 0.01
    t_h0: float | None = None
    radius_m: float = 1200.0
    policy: str = "allocated"
    rounding: str = "floor"
    trials: int | None = None
    curve_trials: int = 20_000
    seed: int | None = None
    grid_points: int = 500
    probe_distances_m: list | None = None
    workers: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        jsonschema.validate(data, SCHEMA)
        preset = core.PRESETS[data.get("preset", "eu868-suburban")]
        base = {k: v for k, v in preset.items() if k in {f.name for f in fields(cls)}}
        return cls(**{**base, **data})

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    def dump(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def validate(self):
        jsonschema.validate(self.to_dict(), SCHEMA)

    def trials_for(self, command: str) -> int:
        return int(self.trials) if self.trials is not None else DEFAULT_TRIALS.get(command, 200_000)

    def resolved_seed(self) -> int:
        if self.seed is not None:
            return int(self.seed)
        env = os.environ.get(SEED_ENV)
        if env:
            value = int(env)
            if not 0 <= value < 2**64:
                raise ValueError(f"{SEED_ENV} is not an unsigned 64-bit integer")
            return value
        return 0

    def network_inputs(self) -> NetworkInputs:
        channel = ChannelModel(
            carrier_frequency=self.carrier_frequency_hz,
            path_loss_exponent=self.path_loss_exponent,
            noise_figure=self.noise_figure_db,
            bandwidth=self.bandwidth_hz,
            noise_power_dbm=self.noise_power_dbm,
            sir_threshold_db=self.sir_threshold_db,
        )
        profiles = core.eu868_profiles()
        if self.duty_cycles is None:
            traffic = TrafficProfile.from_profiles(profiles, self.message_period_s)
        else:
            traffic = TrafficProfile(self.message_period_s, tuple(self.duty_cycles))
        limits = RadioLimits(self.min_power_dbm, self.max_power_dbm, self.power_step_db)
        return NetworkInputs(channel, profiles, traffic, limits)

    def power_policy(self, limits: RadioLimits | None = None) -> PowerPolicy:
        return PowerPolicy.parse(self.policy, limits)

    def build_plan(self, policy: PowerPolicy | None = None):
        inputs = self.network_inputs()
        rounding = Rounding(self.rounding)
        if policy is None:
            policy = self.power_policy(inputs.limits)
        if self.t_h0 is not None:
            targets = make_targets(self.t_c0, self.t_h0)
            return plan_geometry_first(targets, inputs, rounding, policy)
        return plan_radius_first(self.radius_m, self.t_c0, inputs, rounding, policy)
