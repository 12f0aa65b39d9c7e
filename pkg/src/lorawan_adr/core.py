"""Units, PHY tables and radio-channel primitives.

Everything downstream works in linear units (watts, power ratios); dB and
dBm only appear at the edges, through the conversion helpers below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s
THERMAL_NOISE_DBM_HZ = -174.0

NUM_RINGS = 6


def _check_finite(x, name="value"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {x!r}")
    return arr


def _scalar_or_array(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def dbm_to_watt(p):
    """Convert dBm to watts. Accepts scalars or arrays."""
    arr = _check_finite(p, "power (dBm)")
    return _scalar_or_array(10.0 ** ((arr - 30.0) / 10.0))


def watt_to_dbm(w):
    arr = np.asarray(w, dtype=float)
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise ValueError(f"power in watts must be positive and finite, got {w!r}")
    return _scalar_or_array(10.0 * np.log10(arr) + 30.0)


def db_to_linear(x):
    arr = _check_finite(x, "ratio (dB)")
    return _scalar_or_array(10.0 ** (arr / 10.0))


def linear_to_db(x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise ValueError(f"linear ratio must be positive and finite, got {x!r}")
    return _scalar_or_array(10.0 * np.log10(arr))


def noise_power(nf, bandwidth):
    """Receiver noise floor in dBm: -174 dBm/Hz + noise figure + 10 log10(B)."""
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth!r}")
    return THERMAL_NOISE_DBM_HZ + nf + 10.0 * math.log10(bandwidth)


def duty_cycle(toa, period):
    """Per-period transmission probability of a packet with time-on-air ``toa``."""
    if not (toa > 0 and period > 0):
        raise ValueError("time-on-air and period must be positive")
    if toa > period:
        raise ValueError(f"time-on-air {toa} s exceeds message period {period} s")
    return toa / period


@dataclass(frozen=True)
class SpreadingFactorProfile:
    """One row of the LoRa uplink table (one SF ring)."""

    ring_index: int
    time_on_air: float  # s
    snr_threshold: float  # dB
    sensitivity: float  # dBm
    bitrate: float = float("nan")  # kbps, informational

    def __post_init__(self):
        if not 1 <= self.ring_index <= NUM_RINGS:
            raise ValueError(f"ring_index must be in 1..{NUM_RINGS}, got {self.ring_index}")
        if self.time_on_air <= 0:
            raise ValueError("time_on_air must be positive")

    @property
    def sf(self) -> int:
        return self.ring_index + 6

    @property
    def snr_threshold_linear(self) -> float:
        return db_to_linear(self.snr_threshold)


@dataclass(frozen=True)
class ChannelModel:
    """Large-scale channel and receiver parameters.

    ``noise_power_dbm`` may be given explicitly; when left as ``None`` it is
    derived from the noise figure and bandwidth.
    """

    carrier_frequency: float = 868e6  # Hz
    path_loss_exponent: float = 2.75
    noise_figure: float = 6.0  # dB
    bandwidth: float = 125e3  # Hz
    noise_power_dbm: float | None = None
    sir_threshold_db: float = 6.0

    def __post_init__(self):
        if not self.carrier_frequency > 0:
            raise ValueError("carrier_frequency must be positive")
        if not self.path_loss_exponent > 2:
            raise ValueError(f"path loss exponent must exceed 2, got {self.path_loss_exponent}")
        if self.noise_power_dbm is None:
            object.__setattr__(self, "noise_power_dbm", noise_power(self.noise_figure, self.bandwidth))
        _check_finite(self.sir_threshold_db, "sir_threshold_db")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def noise_watts(self) -> float:
        return dbm_to_watt(self.noise_power_dbm)

    @property
    def sir_threshold(self) -> float:
        """Capture threshold as a linear power ratio."""
        return db_to_linear(self.sir_threshold_db)


@dataclass(frozen=True)
class TrafficProfile:
    message_period: float  # s
    duty_cycles: tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(x) for x in self.duty_cycles)
        object.__setattr__(self, "duty_cycles", p)
        if len(p) != NUM_RINGS:
            raise ValueError(f"expected {NUM_RINGS} duty cycles, got {len(p)}")
        if not all(0 < x <= 1 for x in p):
            raise ValueError("duty cycles must lie in (0, 1]")
        if any(b <= a for a, b in zip(p, p[1:])):
            raise ValueError("duty cycles must strictly increase with ring index")

    @classmethod
    def from_profiles(cls, profiles, message_period):
        return cls(message_period, tuple(duty_cycle(sp.time_on_air, message_period) for sp in profiles))

    def as_array(self) -> np.ndarray:
        return np.array(self.duty_cycles)


@dataclass(frozen=True)
class RadioLimits:
    """Discrete transmit power grid ``min_power, min_power + step, ..., max_power`` (dBm)."""

    min_power: float = -1.0
    max_power: float = 14.0
    step: float = 1.0

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.min_power > self.max_power:
            raise ValueError("min_power exceeds max_power")
        n = (self.max_power - self.min_power) / self.step
        if abs(n - round(n)) > 1e-9:
            raise ValueError("power range is not an integer number of steps")

    @property
    def levels(self) -> np.ndarray:
        n = int(round((self.max_power - self.min_power) / self.step))
        return self.min_power + self.step * np.arange(n + 1)

    @property
    def max_power_watts(self) -> float:
        return dbm_to_watt(self.max_power)


def path_loss_gain(d, channel: ChannelModel):
    """Free-space-style power gain ``(lambda / (4 pi d)) ** eta``."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    g = (channel.wavelength / (4.0 * np.pi * d)) ** channel.path_loss_exponent
    return _scalar_or_array(g)


# SX1276, 19-byte packets (13-byte header, 6-byte payload), 125 kHz
_EU868_TABLE = (
    # ring, ToA (ms), bitrate (kbps), sensitivity (dBm), SNR threshold (dB)
    (1, 51.46, 5.46, -123.0, -6.0),
    (2, 102.91, 3.12, -126.0, -9.0),
    (3, 185.34, 1.75, -129.0, -12.0),
    (4, 329.73, 0.97, -132.0, -15.0),
    (5, 741.38, 0.53, -134.5, -17.5),
    (6, 1318.91, 0.29, -137.0, -20.0),
)


def eu868_profiles() -> tuple[SpreadingFactorProfile, ...]:
    return tuple(
        SpreadingFactorProfile(ring, toa * 1e-3, snr, sens, rb)
        for ring, toa, rb, sens, snr in _EU868_TABLE
    )


@dataclass(frozen=True)
class NetworkInputs:
    """Bundle of everything a plan needs besides the outage targets."""

    channel: ChannelModel = field(default_factory=ChannelModel)
    profiles: tuple[SpreadingFactorProfile, ...] = field(default_factory=eu868_profiles)
    traffic: TrafficProfile | None = None
    limits: RadioLimits = field(default_factory=RadioLimits)

    def __post_init__(self):
        if len(self.profiles) != NUM_RINGS:
            raise ValueError(f"expected {NUM_RINGS} SF profiles")
        if [sp.ring_index for sp in self.profiles] != list(range(1, NUM_RINGS + 1)):
            raise ValueError("profiles must be ordered by ring index 1..6")
        toas = [sp.time_on_air for sp in self.profiles]
        snrs = [sp.snr_threshold for sp in self.profiles]
        if any(b <= a for a, b in zip(toas, toas[1:])):
            raise ValueError("time-on-air must strictly increase with ring index")
        if any(b >= a for a, b in zip(snrs, snrs[1:])):
            raise ValueError("SNR thresholds must strictly decrease with ring index")
        if self.traffic is None:
            object.__setattr__(self, "traffic", TrafficProfile.from_profiles(self.profiles, 900.0))

    @property
    def snr_thresholds(self) -> np.ndarray:
        """Linear SNR thresholds, ring 1 first."""
        return db_to_linear(np.array([sp.snr_threshold for sp in self.profiles]))

    @property
    def duty_cycles(self) -> np.ndarray:
        return self.traffic.as_array()


EU868_SUBURBAN = {
    "carrier_frequency_hz": 868e6,
    "bandwidth_hz": 125e3,
    "noise_figure_db": 6.0,
    "noise_power_dbm": -117.0,
    "path_loss_exponent": 2.75,
    "sir_threshold_db": 6.0,
    "message_period_s": 900.0,
    "min_power_dbm": -1.0,
    "max_power_dbm": 14.0,
    "power_step_db": 1.0,
    "t_c0": 0.01,
    "radius_m": 1200.0,
}

PRESETS = {"eu868-suburban": EU868_SUBURBAN}


def eu868_suburban(**overrides) -> NetworkInputs:
    """Suburban single-cell EU868 deployment; keyword overrides replace preset keys."""
    unknown = set(overrides) - set(EU868_SUBURBAN)
    if unknown:
        raise KeyError(f"unknown preset keys: {sorted(unknown)}")
    cfg = {**EU868_SUBURBAN, **overrides}
    channel = ChannelModel(
        carrier_frequency=cfg["carrier_frequency_hz"],
        path_loss_exponent=cfg["path_loss_exponent"],
        noise_figure=cfg["noise_figure_db"],
        bandwidth=cfg["bandwidth_hz"],
        noise_power_dbm=cfg["noise_power_dbm"],
        sir_threshold_db=cfg["sir_threshold_db"],
    )
    profiles = eu868_profiles()
    return NetworkInputs(
        channel=channel,
        profiles=profiles,
        traffic=TrafficProfile.from_profiles(profiles, cfg["message_period_s"]),
        limits=RadioLimits(cfg["min_power_dbm"], cfg["max_power_dbm"], cfg["power_step_db"]),
    )
