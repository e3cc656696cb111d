import numpy as np
import pytest

from uavplan import IotDevice, RadioParams


@pytest.fixture
def radio() -> RadioParams:
    """Simulation constants: 40 dBm budget, -90 dBm noise, -30 dB gain, 50 m."""
    return RadioParams(
        altitude=50.0,
        ref_gain=1e-3,
        noise_power=1e-12,
        total_power=10.0,
        max_served=10,
    )


def make_devices(points, rates) -> list[IotDevice]:
    return [
        IotDevice(id=i, position=(float(x), float(y)), qos_rate=float(r))
        for i, ((x, y), r) in enumerate(zip(points, rates))
    ]


def random_instance(rng: np.random.Generator, radio, m=None, patch=300.0, r_lo=15.0, r_hi=20.0):
    """Random served set drawn in a patch; None if the combined demand is
    infeasible (caller rejection-samples)."""
    from uavplan import qdpa
    from uavplan.placement import feasibility

    if m is None:
        m = int(rng.integers(2, 5))
    pts = rng.uniform(0.0, patch, size=(m, 2))
    rates = rng.uniform(r_lo, r_hi, size=m)
    devs = make_devices(pts, rates)
    alloc = qdpa(devs, radio)
    if alloc is None:
        return None
    regions = feasibility(devs, alloc, radio)
    if regions.full_empty:
        return None
    return devs, alloc, regions
