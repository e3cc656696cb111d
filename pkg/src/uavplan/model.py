"""Physical-layer and geometric primitives shared by every planner module.

All quantities are linear: powers in watts, channel gains dimensionless,
rates in bits/s/Hz over unit bandwidth, coordinates and radii in meters.
dB/dBm forms are accepted only at the CLI/config boundary (see cli.py).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

Point = tuple[float, float]


class DeviceUncoverableError(Exception):
    """A device's QoS demand cannot be met even with the full UAV power budget."""

    def __init__(self, device_id: int, qos_rate: float):
        self.device_id = device_id
        self.qos_rate = qos_rate
        super().__init__(
            f"device {device_id} with demand {qos_rate} bits/s/Hz cannot be covered "
            f"at any position even with the full power budget"
        )


@dataclass(frozen=True)
class IotDevice:
    """A ground IoT device with a minimum-rate (QoS) demand."""

    id: int
    position: Point
    qos_rate: float  # bits/s/Hz, unit bandwidth

    def __post_init__(self):
        if self.qos_rate <= 0:
            raise ValueError(f"device {self.id}: qos_rate must be > 0, got {self.qos_rate}")

    @property
    def x(self) -> float:
        return self.position[0]

    @property
    def y(self) -> float:
        return self.position[1]


@dataclass(frozen=True)
class RadioParams:
    """Radio constants shared by all UAVs.

    altitude:     flight altitude H > 0 in meters (fixed for every UAV)
    ref_gain:     linear channel gain at 1 m reference distance
    noise_power:  noise power in watts
    total_power:  per-UAV transmit power budget in watts
    max_served:   maximum number of devices one UAV may serve
    """

    altitude: float
    ref_gain: float
    noise_power: float
    total_power: float
    max_served: int = 10

    def __post_init__(self):
        if self.altitude <= 0:
            raise ValueError("altitude must be > 0")
        if self.ref_gain <= 0:
            raise ValueError("ref_gain must be > 0")
        if self.noise_power <= 0:
            raise ValueError("noise_power must be > 0")
        if self.total_power <= 0:
            raise ValueError("total_power must be > 0")
        if self.max_served < 1:
            raise ValueError("max_served must be >= 1")

    @cached_property
    def gain_to_noise(self) -> float:
        """Reference gain over noise power (the eta constant)."""
        return self.ref_gain / self.noise_power


@dataclass(frozen=True)
class Scenario:
    """A ground-truth world: devices, radio constants, and area bounds."""

    devices: tuple[IotDevice, ...]
    radio: RadioParams
    area: tuple[float, float]  # width, height in meters
    seed: Optional[int] = None

    def __post_init__(self):
        if len(self.devices) < 1:
            raise ValueError("scenario needs at least one device")
        ids = [d.id for d in self.devices]
        if ids != list(range(len(ids))):
            raise ValueError("device ids must be distinct and contiguous from 0")
        w, h = self.area
        for d in self.devices:
            if not (0.0 <= d.x <= w and 0.0 <= d.y <= h):
                raise ValueError(f"device {d.id} at {d.position} outside area {self.area}")

    def device(self, device_id: int) -> IotDevice:
        return self.devices[device_id]

    @property
    def device_count(self) -> int:
        return len(self.devices)


@dataclass(frozen=True)
class UavPlacement:
    """One deployed UAV: horizontal position, served device ids, power split."""

    position: Point
    served: tuple[int, ...]
    allocation: "PowerAllocation"  # noqa: F821 - defined in power.py
    rate: float  # achieved sum data rate, bits/s/Hz


def channel_gain(uav_pos, dev_pos, radio: RadioParams) -> float:
    """Line-of-sight channel gain ref_gain / (|v - u|^2 + H^2).

    Strictly positive and strictly decreasing in horizontal distance; the
    denominator is bounded below by H^2 so no singularity exists.
    """
    dx = uav_pos[0] - dev_pos[0]
    dy = uav_pos[1] - dev_pos[1]
    return radio.ref_gain / (dx * dx + dy * dy + radio.altitude**2)


def device_rate(power: float, uav_pos, dev: IotDevice, radio: RadioParams) -> float:
    """Achievable rate log2(1 + power * gain / noise) in bits/s/Hz."""
    if power < 0:
        raise ValueError("power must be >= 0")
    snr = power * channel_gain(uav_pos, dev.position, radio) / radio.noise_power
    return math.log2(1.0 + snr)


def uav_rate(placement: UavPlacement, scenario: Scenario) -> float:
    """Sum data rate of the devices served by one UAV at its allocated powers."""
    total = 0.0
    for dev_id in placement.served:
        dev = scenario.device(dev_id)
        total += device_rate(placement.allocation.powers[dev_id], placement.position, dev, radio=scenario.radio)
    return total


def coverage_radius(power: float, qos_rate: float, radio: RadioParams) -> Optional[float]:
    """Largest ground-projected distance at which `power` still meets `qos_rate`.

    Returns sqrt(power * eta / (2^r - 1) - H^2), or None when even a directly
    overhead UAV cannot meet the demand (negative radicand). Callers must treat
    None as an empty feasible region.
    """
    if power < 0:
        raise ValueError("power must be >= 0")
    if qos_rate <= 0:
        raise ValueError("qos_rate must be > 0")
    radicand = power * radio.gain_to_noise / (2.0**qos_rate - 1.0) - radio.altitude**2
    if radicand < 0:
        return None
    return math.sqrt(radicand)


def snr_at(power: float, uav_pos, dev_pos, radio: RadioParams) -> float:
    """Linear SNR of one device for a given allocated power and UAV position."""
    return power * channel_gain(uav_pos, dev_pos, radio) / radio.noise_power


def horizontal_distances(uav_pos, positions: np.ndarray) -> np.ndarray:
    """Euclidean distances from one UAV position to an (m, 2) position array."""
    delta = np.asarray(positions, dtype=float) - np.asarray(uav_pos, dtype=float)
    return np.hypot(delta[:, 0], delta[:, 1])
