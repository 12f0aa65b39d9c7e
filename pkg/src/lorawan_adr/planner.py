"""Cell planning: ring geometry, per-ring capacity and the power map."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .analytic import CellGeometry, OutageTargets, RingLoad
from .core import NetworkInputs, RadioLimits, dbm_to_watt, path_loss_gain, watt_to_dbm

# absorbs float noise when a required power sits exactly on a grid level
_GRID_TOL_DB = 1e-9


class PlanningError(ValueError):
    """Invalid or infeasible planning input. ``kind`` is a stable machine-readable tag."""

    kind = "invalid-input"


class InfeasibleRadiusError(PlanningError):
    kind = "infeasible-radius"


class InfeasiblePowerError(PlanningError):
    kind = "infeasible-power"


class OutOfCoverageError(PlanningError):
    kind = "out-of-coverage"


class InfeasibleTargetError(PlanningError):
    kind = "infeasible-target"


class PowerMode(enum.Enum):
    ALLOCATED_CONTINUOUS = "allocated"
    ALLOCATED_DISCRETE = "allocated-discrete"
    FIXED = "fixed"


class Rounding(enum.Enum):
    FLOOR = "floor"
    NEAREST = "nearest"
    CEIL = "ceil"

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if self is Rounding.FLOOR:
            out = np.floor(x + 1e-9)
        elif self is Rounding.CEIL:
            out = np.ceil(x - 1e-9)
        else:
            out = np.floor(x + 0.5)
        return out.astype(int)


@dataclass(frozen=True)
class PowerPolicy:
    mode: PowerMode = PowerMode.ALLOCATED_CONTINUOUS
    fixed_power: float | None = None  # dBm, Fixed mode only

    def __post_init__(self):
        if self.mode is PowerMode.FIXED and self.fixed_power is None:
            raise ValueError("fixed policy needs a power level")
        if self.mode is not PowerMode.FIXED and self.fixed_power is not None:
            raise ValueError("fixed_power only applies to the fixed policy")

    @classmethod
    def allocated(cls):
        return cls(PowerMode.ALLOCATED_CONTINUOUS)

    @classmethod
    def allocated_discrete(cls):
        return cls(PowerMode.ALLOCATED_DISCRETE)

    @classmethod
    def fixed(cls, dbm):
        return cls(PowerMode.FIXED, float(dbm))

    @classmethod
    def parse(cls, text: str, limits: RadioLimits | None = None):
        """Parse ``allocated``, ``allocated-discrete``, ``fixed-max`` or ``fixed:<dBm>``."""
        text = text.strip().lower()
        if text == "allocated":
            return cls.allocated()
        if text == "allocated-discrete":
            return cls.allocated_discrete()
        if text == "fixed-max":
            return cls.fixed((limits or RadioLimits()).max_power)
        if text.startswith("fixed:"):
            try:
                value = float(text.split(":", 1)[1])
            except ValueError:
                raise ValueError(f"bad fixed power in policy {text!r}") from None
            return cls.fixed(value)
        raise ValueError(f"unknown power policy {text!r}")

    def label(self) -> str:
        if self.mode is PowerMode.FIXED:
            return f"fixed:{self.fixed_power:g}"
        return self.mode.value

    def validate(self, limits: RadioLimits):
        if self.mode is PowerMode.FIXED and not (
            limits.min_power - _GRID_TOL_DB <= self.fixed_power <= limits.max_power + _GRID_TOL_DB
        ):
            raise InfeasiblePowerError(
                f"fixed power {self.fixed_power} dBm outside [{limits.min_power}, {limits.max_power}] dBm"
            )


@dataclass(frozen=True)
class CellPlan:
    geometry: CellGeometry
    targets: OutageTargets
    ring_loads: tuple[RingLoad, ...]
    capacities: tuple[int, ...]
    total_capacity: int
    average_power: float  # dBm
    inputs: NetworkInputs = field(repr=False)
    policy: PowerPolicy = PowerPolicy()
    rounding: Rounding = Rounding.FLOOR

    @property
    def disconnection_target(self) -> float:
        return self.targets.disconnection_target

    @property
    def betas(self) -> np.ndarray:
        return np.array([rl.mean_active_interferers for rl in self.ring_loads])

    @property
    def unrounded_capacities(self) -> np.ndarray:
        return np.array([rl.node_count for rl in self.ring_loads])

    @property
    def unrounded_total(self) -> float:
        return float(self.unrounded_capacities.sum())

    def capacities_with(self, rounding: Rounding) -> np.ndarray:
        return rounding.apply(self.unrounded_capacities)

    @property
    def power_reduction(self) -> float:
        """Fractional average power saving relative to maximum power."""
        return 1.0 - 10 ** ((self.average_power - self.inputs.limits.max_power) / 10)

    def to_dict(self) -> dict:
        return {
            "edges_m": list(self.geometry.edges),
            "total_target": self.targets.total_target,
            "disconnection_target": self.targets.disconnection_target,
            "betas": self.betas.tolist(),
            "capacities": list(self.capacities),
            "total_capacity": self.total_capacity,
            "average_power_dbm": self.average_power,
            "policy": self.policy.label(),
            "rounding": self.rounding.value,
        }


def assign_ring(d, geometry: CellGeometry):
    """Ring index (1-based) serving distance ``d``; ring i covers (l_{i-1}, l_i]."""
    arr = np.asarray(d, dtype=float)
    if np.any(arr <= 0):
        raise PlanningError("distance must be positive")
    if np.any(arr > geometry.coverage_radius):
        raise OutOfCoverageError(
            f"distance {np.max(arr):g} m beyond coverage radius {geometry.coverage_radius:g} m"
        )
    idx = np.searchsorted(np.asarray(geometry.edges), arr, side="left")
    return int(idx) if idx.ndim == 0 else idx


def quantize_power(p, limits: RadioLimits):
    """Round a required power (watts) up to the transmit grid, in dBm."""
    req = np.asarray(watt_to_dbm(p), dtype=float)
    if np.any(req > limits.max_power + _GRID_TOL_DB):
        raise InfeasiblePowerError(
            f"required power {np.max(req):.4f} dBm exceeds maximum {limits.max_power} dBm"
        )
    steps = np.ceil((req - limits.min_power) / limits.step - _GRID_TOL_DB)
    out = limits.min_power + limits.step * np.maximum(steps, 0.0)
    out = np.minimum(out, limits.max_power)
    return float(out) if out.ndim == 0 else out


def make_targets(total_target: float, disconnection_target: float) -> OutageTargets:
    try:
        return OutageTargets(total_target, disconnection_target)
    except ValueError as exc:
        raise InfeasibleTargetError(str(exc)) from None


def _build_plan(geometry, targets, inputs: NetworkInputs, rounding, policy) -> CellPlan:
    policy.validate(inputs.limits)
    beta = analytic.max_ring_load(targets, inputs.channel)
    p = inputs.duty_cycles
    areas = geometry.ring_areas
    loads = tuple(RingLoad.from_beta(i + 1, beta, p[i], areas[i]) for i in range(geometry.n_rings))
    caps = rounding.apply([rl.node_count for rl in loads])
    p_avg = analytic.average_power(geometry, targets, inputs.profiles, inputs.channel)
    return CellPlan(
        geometry=geometry,
        targets=targets,
        ring_loads=loads,
        capacities=tuple(int(c) for c in caps),
        total_capacity=int(caps.sum()),
        average_power=watt_to_dbm(p_avg),
        inputs=inputs,
        policy=policy,
        rounding=rounding,
    )


def plan_geometry_first(targets: OutageTargets, inputs: NetworkInputs, rounding=Rounding.FLOOR,
                        policy: PowerPolicy | None = None) -> CellPlan:
    """Plan from a given disconnection target: edges first, then load."""
    edges = [0.0] + [
        analytic.ring_edge(sp, targets, inputs.limits, inputs.channel) for sp in inputs.profiles
    ]
    return _build_plan(CellGeometry(tuple(edges)), targets, inputs, rounding, policy or PowerPolicy())


def plan_radius_first(radius: float, total_target: float, inputs: NetworkInputs, rounding=Rounding.FLOOR,
                      policy: PowerPolicy | None = None) -> CellPlan:
    """Plan for a required coverage radius.

    The disconnection target is whatever the outermost ring sees at the radius
    with maximum power; the remaining outage budget goes to interference.
    """
    if not radius > 0:
        raise PlanningError("radius must be positive")
    if not 0 < total_target < 1:
        raise PlanningError("total target must lie in (0, 1)")
    outer = inputs.profiles[-1]
    h0 = analytic.disconnection_probability(radius, inputs.limits.max_power_watts, outer, inputs.channel)
    if h0 >= total_target:
        raise InfeasibleRadiusError(
            f"disconnection at {radius:g} m with maximum power is {h0:.5g} >= target {total_target:g}"
        )
    targets = make_targets(total_target, h0)
    eta = inputs.channel.path_loss_exponent
    psi = inputs.snr_thresholds
    # ratio law: l_i / l_6 = (psi_6 / psi_i) ** (1 / eta); l_6 = R exactly
    ratios = (psi[-1] / psi) ** (1.0 / eta)
    edges = [0.0] + [radius * r for r in ratios[:-1]] + [radius]
    return _build_plan(CellGeometry(tuple(edges)), targets, inputs, rounding, policy or PowerPolicy())


def required_power(plan: CellPlan, d):
    """Continuous minimum transmit power (watts) at distance ``d`` for its ring."""
    d = np.asarray(d, dtype=float)
    rings = np.asarray(assign_ring(d, plan.geometry))
    psi = plan.inputs.snr_thresholds[rings - 1]
    ch = plan.inputs.channel
    p = -ch.noise_watts * psi / (plan.targets.log_success * path_loss_gain(d, ch))
    return float(p) if np.ndim(p) == 0 else p


def power_map(plan: CellPlan, policy: PowerPolicy, d):
    """Transmit power in dBm used at distance ``d`` under ``policy``."""
    if policy.mode is PowerMode.FIXED:
        policy.validate(plan.inputs.limits)
        d = np.asarray(d, dtype=float)
        assign_ring(d, plan.geometry)
        out = np.full(d.shape, policy.fixed_power)
        return float(out) if out.ndim == 0 else out
    p = required_power(plan, d)
    if policy.mode is PowerMode.ALLOCATED_DISCRETE:
        return quantize_power(p, plan.inputs.limits)
    return watt_to_dbm(p)


def power_map_watts(plan: CellPlan, policy: PowerPolicy, d):
    """Same as :func:`power_map` but in watts (no dB round trip for the continuous map)."""
    if policy.mode is PowerMode.ALLOCATED_CONTINUOUS:
        return required_power(plan, d)
    return dbm_to_watt(power_map(plan, policy, d))


def ring_outage(plan: CellPlan, ring_index: int, node_count: float) -> float:
    """Analytic total outage for a ring holding ``node_count`` nodes under channel inversion."""
    beta = node_count * plan.inputs.duty_cycles[ring_index - 1]
    q0 = analytic.collision_probability(beta, plan.inputs.channel)
    return analytic.total_outage(plan.targets.disconnection_target, q0)


def check_capacity(plan: CellPlan) -> bool:
    """True if every ring, at its rounded capacity, meets the total target."""
    return all(
        ring_outage(plan, i + 1, n) <= plan.targets.total_target + 1e-9
        for i, n in enumerate(plan.capacities)
    )


__all__ = [
    "CellPlan",
    "InfeasiblePowerError",
    "InfeasibleRadiusError",
    "InfeasibleTargetError",
    "OutOfCoverageError",
    "PlanningError",
    "PowerMode",
    "PowerPolicy",
    "Rounding",
    "assign_ring",
    "check_capacity",
    "make_targets",
    "plan_geometry_first",
    "plan_radius_first",
    "power_map",
    "power_map_watts",
    "quantize_power",
    "required_power",
    "ring_outage",
]
