"""Per-device transmit power allocation for one UAV's served set.

Two schemes:
  qdpa - demand-proportional split P_k = P_T * (2^r_k - 1) / sum_j (2^r_j - 1),
         which equalizes every served device's coverage radius to one shared
         service radius.
  epa  - equal split P_k = P_T / m, the comparison baseline; radii come out
         unequal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .model import IotDevice, RadioParams, coverage_radius


@dataclass(frozen=True)
class PowerAllocation:
    """Powers and coverage radii for one UAV's served set.

    equalized_radius is the shared service radius (qdpa only, None for epa).
    Powers always sum to the full budget; every power is strictly positive.
    """

    powers: dict[int, float]
    radii: dict[int, float]
    equalized_radius: Optional[float]
    scheme_tag: str  # "qdpa" | "epa"

    @property
    def device_ids(self) -> list[int]:
        return sorted(self.powers)

    def radius_of(self, dev_id: int) -> float:
        return self.radii[dev_id]

    @property
    def service_radius(self) -> float:
        """The UAV's guaranteed service circle: the common radius within which
        every served device's demand is met. qdpa's split maximizes this over
        all splits (that is what equalizing buys); epa's circle is capped by
        its most demanding device."""
        if self.equalized_radius is not None:
            return self.equalized_radius
        return min(self.radii.values())

    @property
    def service_radii(self) -> dict[int, float]:
        """Per-device placement constraint radii: the service circle around
        every served device."""
        r = self.service_radius
        return {i: r for i in self.radii}


def demand_weight(qos_rate: float) -> float:
    """SNR needed to hit a rate demand: 2^r - 1."""
    return 2.0**qos_rate - 1.0


def qdpa(served: Iterable[IotDevice], radio: RadioParams) -> Optional[PowerAllocation]:
    """Demand-proportional power split with one shared coverage radius.

    Returns None when the combined demand exceeds what the budget supports at
    altitude H (negative radicand): this served set cannot all be covered by
    one UAV at any position.
    """
    devs = list(served)
    if not (1 <= len(devs) <= radio.max_served):
        raise ValueError(f"served set size {len(devs)} outside [1, {radio.max_served}]")

    weights = {d.id: demand_weight(d.qos_rate) for d in devs}
    total_weight = math.fsum(weights.values())
    radicand = radio.total_power * radio.gain_to_noise / total_weight - radio.altitude**2
    if radicand < 0:
        return None
    d_sv = math.sqrt(radicand)

    powers = {d.id: radio.total_power * weights[d.id] / total_weight for d in devs}
    return PowerAllocation(
        powers=powers,
        radii={d.id: d_sv for d in devs},
        equalized_radius=d_sv,
        scheme_tag="qdpa",
    )


def epa(served: Iterable[IotDevice], radio: RadioParams) -> Optional[PowerAllocation]:
    """Equal power split; radii computed per device and generally unequal.

    Returns None when any device's radius is infeasible at its share P_T / m.
    """
    devs = list(served)
    if not (1 <= len(devs) <= radio.max_served):
        raise ValueError(f"served set size {len(devs)} outside [1, {radio.max_served}]")

    share = radio.total_power / len(devs)
    radii = {}
    for d in devs:
        r = coverage_radius(share, d.qos_rate, radio)
        if r is None:
            return None
        radii[d.id] = r
    return PowerAllocation(
        powers={d.id: share for d in devs},
        radii=radii,
        equalized_radius=None,
        scheme_tag="epa",
    )


def allocate(served: Iterable[IotDevice], radio: RadioParams, scheme: str) -> Optional[PowerAllocation]:
    """Dispatch to qdpa or epa by scheme tag."""
    if scheme == "qdpa":
        return qdpa(served, radio)
    if scheme == "epa":
        return epa(served, radio)
    raise ValueError(f"unknown power scheme {scheme!r}")
