"""Closed-form outage, power allocation and load expressions.

Probabilities near zero are evaluated through ``expm1``/``log1p`` so the
small targets used in planning (around 1e-2) keep full precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ChannelModel, RadioLimits, SpreadingFactorProfile, path_loss_gain


@dataclass(frozen=True)
class OutageTargets:
    total_target: float
    disconnection_target: float

    def __post_init__(self):
        if not 0 < self.disconnection_target <= self.total_target < 1:
            raise ValueError(
                "targets must satisfy 0 < disconnection_target <= total_target < 1, got "
                f"({self.disconnection_target}, {self.total_target})"
            )

    @property
    def log_success(self) -> float:
        """ln(1 - T_H0), always negative."""
        return np.log1p(-self.disconnection_target)


@dataclass(frozen=True)
class CellGeometry:
    """Ring edges ``[l_0 = 0, l_1, ..., l_6]`` in metres."""

    edges: tuple[float, ...]

    def __post_init__(self):
        e = tuple(float(x) for x in self.edges)
        object.__setattr__(self, "edges", e)
        if len(e) < 2 or e[0] != 0.0:
            raise ValueError("edges must start at 0 and contain at least one ring")
        if any(b <= a for a, b in zip(e, e[1:])):
            raise ValueError("ring edges must be strictly increasing")

    @property
    def coverage_radius(self) -> float:
        return self.edges[-1]

    @property
    def n_rings(self) -> int:
        return len(self.edges) - 1

    def ring_bounds(self, ring_index: int) -> tuple[float, float]:
        return self.edges[ring_index - 1], self.edges[ring_index]

    @property
    def ring_areas(self) -> np.ndarray:
        e = np.asarray(self.edges)
        return np.pi * (e[1:] ** 2 - e[:-1] ** 2)

    @property
    def area(self) -> float:
        return np.pi * self.coverage_radius**2


@dataclass(frozen=True)
class RingLoad:
    """Traffic in one ring: mean active interferers, node count, density and intensity."""

    ring_index: int
    mean_active_interferers: float
    node_count: float
    density: float
    intensity: float

    @classmethod
    def from_beta(cls, ring_index, beta, duty_cycle, area):
        if beta < 0:
            raise ValueError("beta must be non-negative")
        n = beta / duty_cycle
        rho = n / area
        return cls(ring_index, beta, n, rho, duty_cycle * rho)


def disconnection_probability(d, power, ring: SpreadingFactorProfile, channel: ChannelModel):
    """Probability that the Rayleigh-faded SNR at distance ``d`` with transmit
    power ``power`` (watts) falls below the ring's SNR threshold."""
    d = np.asarray(d, dtype=float)
    power = np.asarray(power, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    if np.any(power <= 0):
        raise ValueError("transmit power must be positive")
    x = ring.snr_threshold_linear * channel.noise_watts / (power * path_loss_gain(d, channel))
    out = -np.expm1(-x)
    return float(out) if out.ndim == 0 else out


def ring_edge(ring: SpreadingFactorProfile, targets: OutageTargets, limits: RadioLimits,
              channel: ChannelModel) -> float:
    """Distance at which a node at maximum power sees exactly the disconnection target."""
    arg = -limits.max_power_watts * targets.log_success / (channel.noise_watts * ring.snr_threshold_linear)
    return channel.wavelength / (4 * np.pi) * arg ** (1.0 / channel.path_loss_exponent)


def min_transmit_power(d, ring: SpreadingFactorProfile, targets: OutageTargets, channel: ChannelModel):
    """Smallest transmit power (watts) keeping disconnection at the target at distance ``d``."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    p = -channel.noise_watts * ring.snr_threshold_linear / (targets.log_success * path_loss_gain(d, channel))
    return float(p) if np.ndim(p) == 0 else p


def average_power(geometry: CellGeometry, targets: OutageTargets, profiles, channel: ChannelModel) -> float:
    """Area average of the minimum transmit power over the whole cell, in watts."""
    if len(profiles) != geometry.n_rings:
        raise ValueError("need one SF profile per ring")
    eta = channel.path_loss_exponent
    e = np.asarray(geometry.edges)
    psi = np.array([sp.snr_threshold_linear for sp in profiles])
    # factor l^eta out of l^(eta+2) terms: keeps magnitudes near 1
    scale = 4 * np.pi * geometry.coverage_radius / channel.wavelength
    u = e / geometry.coverage_radius
    terms = psi / (eta + 2) * (u[1:] ** (eta + 2) - u[:-1] ** (eta + 2))
    return float(
        -2 * np.pi * channel.noise_watts / (geometry.area * targets.log_success)
        * scale**eta * geometry.coverage_radius**2 * terms.sum()
    )


def collision_probability(beta, channel: ChannelModel):
    """Same-ring collision probability under channel inversion.

    Depends only on the mean number of active interferers and the capture
    threshold: ``1 - exp(-beta * delta / (delta + 1))``.
    """
    beta = np.asarray(beta, dtype=float)
    if np.any(beta < 0):
        raise ValueError("beta must be non-negative")
    delta = channel.sir_threshold
    q = -np.expm1(-beta * delta / (delta + 1.0))
    return float(q) if q.ndim == 0 else q


def _check_prob(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must lie in [0, 1]")
    return arr


def total_outage(h0, q0):
    """Outage from either disconnection or collision, treated as independent."""
    h0 = _check_prob(h0, "h0")
    q0 = _check_prob(q0, "q0")
    c = 1.0 - (1.0 - h0) * (1.0 - q0)
    return float(c) if np.ndim(c) == 0 else c


def max_ring_load(targets: OutageTargets, channel: ChannelModel) -> float:
    """Largest mean active-interferer count keeping total outage at the target."""
    if targets.disconnection_target > targets.total_target:
        raise ValueError("disconnection target exceeds total target: no interference budget")
    delta = channel.sir_threshold
    log_ratio = np.log1p(-targets.total_target) - np.log1p(-targets.disconnection_target)
    # equal targets give -0.0
    return float(max(0.0, -(delta + 1) / delta * log_ratio))


def residual_disconnection_target(total_target: float, q0: float) -> float:
    """Disconnection budget left once collisions consume ``q0``."""
    if not 0 <= total_target < 1:
        raise ValueError("total target must lie in [0, 1)")
    if not 0 <= q0 <= total_target:
        raise ValueError(f"collision probability {q0} exceeds total target {total_target}")
    return (total_target - q0) / (1.0 - q0)
