"""Planning and validation toolkit for single-cell ADR-enabled LoRaWAN."""

from .analytic import (
    CellGeometry,
    OutageTargets,
    RingLoad,
    average_power,
    collision_probability,
    disconnection_probability,
    max_ring_load,
    min_transmit_power,
    residual_disconnection_target,
    ring_edge,
    total_outage,
)
from .core import (
    ChannelModel,
    NetworkInputs,
    RadioLimits,
    SpreadingFactorProfile,
    TrafficProfile,
    db_to_linear,
    dbm_to_watt,
    duty_cycle,
    eu868_suburban,
    linear_to_db,
    noise_power,
    path_loss_gain,
    watt_to_dbm,
)
from .planner import (
    CellPlan,
    PlanningError,
    PowerMode,
    PowerPolicy,
    Rounding,
    assign_ring,
    plan_geometry_first,
    plan_radius_first,
    power_map,
    quantize_power,
)

__version__ = "0.1.0"
