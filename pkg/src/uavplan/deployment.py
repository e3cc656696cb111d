"""Multi-UAV coverage schemes and the shared deployment-plan validator.

jpap is the primary greedy scheme: seed each UAV at the dense boundary device
of the uncovered set, then grow its served set nearest-first while the power
split stays feasible, repositioning with drmp after every accepted device.
kmeans_deploy and spiral_deploy are clearly-labeled reference approximations
of the two comparison schemes from the literature; they are held to the same
plan validator and share the power/placement machinery where it applies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import (
    DeviceUncoverableError,
    IotDevice,
    RadioParams,
    Scenario,
    UavPlacement,
    coverage_radius,
    device_rate,
)
from .placement import SolverConfig, drmp, feasibility
from .power import allocate

SCHEMES = ("jpap", "epa-jpap", "kmeans-qdpa", "kmeans-epa", "spiral-qdpa", "spiral-epa")


@dataclass(frozen=True)
class DeploymentPlan:
    """Ordered UAV placements covering a scenario, plus the objective value."""

    uavs: tuple[UavPlacement, ...]
    uncovered: tuple[int, ...]
    avg_rate: float  # sum of per-UAV rates over UAV count
    scheme_tag: str


@dataclass
class CoverageState:
    """Working state of one greedy UAV: who is left, who this UAV takes."""

    uncovered: list[int]
    covered: list[int] = field(default_factory=list)
    candidates: list[int] = field(default_factory=list)
    dense_boundary: Optional[int] = None
    next_candidate: Optional[int] = None


def full_power_radius(dev: IotDevice, radio: RadioParams) -> float:
    """Coverage radius when the whole budget goes to one device.

    Raises DeviceUncoverableError when even that cannot meet the demand.
    """
    radius = coverage_radius(radio.total_power, dev.qos_rate, radio)
    if radius is None:
        raise DeviceUncoverableError(dev.id, dev.qos_rate)
    return radius


def _dist(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def dense_boundary_id(uncovered: list[IotDevice], radio: RadioParams) -> tuple[int, list[int]]:
    """Pick the seed device for the next UAV.

    Among the four coordinate-extremal uncovered devices, returns the one with
    the most uncovered neighbors within twice its full-power radius (itself
    excluded), plus that neighbor id list. Ties break on smallest device id.
    """
    if not uncovered:
        raise ValueError("uncovered set is empty")
    extremal_ids = {
        max(uncovered, key=lambda d: (d.x, -d.id)).id,
        max(uncovered, key=lambda d: (d.y, -d.id)).id,
        min(uncovered, key=lambda d: (d.x, d.id)).id,
        min(uncovered, key=lambda d: (d.y, d.id)).id,
    }
    by_id = {d.id: d for d in uncovered}
    best: Optional[tuple[int, int, list[int]]] = None  # (-count, id, neighbors)
    for eid in sorted(extremal_ids):
        dev = by_id[eid]
        reach = 2.0 * full_power_radius(dev, radio)
        neighbors = [d.id for d in uncovered if d.id != eid and _dist(d.position, dev.position) <= reach]
        key = (-len(neighbors), eid)
        if best is None or key < best[:2]:
            best = (key[0], eid, neighbors)
    return best[1], sorted(best[2])


def plan_single_uav(
    state: CoverageState,
    scenario: Scenario,
    radio: RadioParams,
    cfg: SolverConfig,
    power_scheme: str = "qdpa",
) -> UavPlacement:
    """Grow one UAV's served set from its seed and position it.

    Starts overhead of the seed, then repeatedly pulls the candidate nearest
    to the current position, keeps it if the enlarged set still has a feasible
    power split and a non-empty placement region (repositioning via drmp), and
    otherwise drops it and stops (continue_scan keeps scanning instead, for
    ablation). The served set never exceeds radio.max_served.
    """
    k0 = state.dense_boundary
    assert k0 is not None
    seed_dev = scenario.device(k0)
    full_power_radius(seed_dev, radio)  # raises if the seed itself is uncoverable

    covered = [k0]
    allocation = allocate([seed_dev], radio, power_scheme)
    assert allocation is not None
    position = (float(seed_dev.x), float(seed_dev.y))
    rate = device_rate(radio.total_power, position, seed_dev, radio)

    candidates = list(state.candidates)
    while candidates and len(covered) < radio.max_served:
        k1 = min(candidates, key=lambda i: (_dist(scenario.device(i).position, position), i))
        candidates.remove(k1)
        state.next_candidate = k1
        trial_ids = covered + [k1]
        trial_devs = [scenario.device(i) for i in trial_ids]
        accepted = False
        trial_alloc = allocate(trial_devs, radio, power_scheme)
        if trial_alloc is not None:
            regions = feasibility(
                trial_devs, trial_alloc, radio,
                inner_delta=cfg.inner_delta, scan_step=cfg.grid_step,
            )
            if not regions.full_empty:
                solution = drmp(trial_devs, trial_alloc, position, radio, cfg, regions=regions)
                if solution is not None:
                    covered = trial_ids
                    allocation = trial_alloc
                    position = solution.position
                    rate = solution.true_rate
                    accepted = True
        if not accepted and not cfg.continue_scan:
            break

    state.covered = covered
    return UavPlacement(position=position, served=tuple(covered), allocation=allocation, rate=rate)


def jpap(
    scenario: Scenario,
    radio: Optional[RadioParams] = None,
    cfg: Optional[SolverConfig] = None,
    power_scheme: str = "qdpa",
) -> DeploymentPlan:
    """Greedy multi-UAV coverage: dense boundary seeds, nearest-first growth.

    Repeats dense_boundary_id + plan_single_uav on the shrinking uncovered set
    until every device is served. Deterministic for a fixed scenario and
    config. Raises DeviceUncoverableError if any device cannot be covered even
    with the full budget.
    """
    radio = radio or scenario.radio
    cfg = cfg or SolverConfig()
    for dev in scenario.devices:
        full_power_radius(dev, radio)

    uncovered = list(range(scenario.device_count))
    uavs: list[UavPlacement] = []
    while uncovered:
        k0, neighborhood = dense_boundary_id([scenario.device(i) for i in uncovered], radio)
        state = CoverageState(
            uncovered=list(uncovered),
            covered=[],
            candidates=neighborhood,
            dense_boundary=k0,
        )
        placement = plan_single_uav(state, scenario, radio, cfg, power_scheme)
        uavs.append(placement)
        served = set(placement.served)
        uncovered = [i for i in uncovered if i not in served]

    avg = math.fsum(p.rate for p in uavs) / len(uavs)
    tag = "jpap" if power_scheme == "qdpa" else "epa-jpap"
    return DeploymentPlan(uavs=tuple(uavs), uncovered=(), avg_rate=avg, scheme_tag=tag)


# ---------------------------------------------------------------------------
# reference approximations of the comparison schemes


def _lloyd(points: np.ndarray, n_clusters: int, seed: int, iters: int = 60) -> np.ndarray:
    """Plain seeded Lloyd iteration; returns a label per point.

    Initial centers are n distinct points chosen by the seeded generator;
    assignment ties break on the lowest cluster index, so the result is a pure
    function of (points, n_clusters, seed).
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, n_clusters])))
    centers = points[rng.choice(len(points), size=n_clusters, replace=False)]
    labels = np.zeros(len(points), dtype=int)
    for _ in range(iters):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        new_centers = centers.copy()
        for j in range(n_clusters):
            members = points[labels == j]
            if len(members):
                new_centers[j] = members.mean(axis=0)
        if np.allclose(new_centers, centers):
            break
        centers = new_centers
    return labels


def _cluster_placement(ids: list[int], scenario: Scenario, radio: RadioParams, power_scheme: str) -> Optional[UavPlacement]:
    """UAV at the cluster centroid; None when the cluster is infeasible there."""
    if len(ids) > radio.max_served:
        return None
    devs = [scenario.device(i) for i in ids]
    alloc = allocate(devs, radio, power_scheme)
    if alloc is None:
        return None
    centroid = (
        float(np.mean([d.x for d in devs])),
        float(np.mean([d.y for d in devs])),
    )
    service = alloc.service_radii
    for d in devs:
        if _dist(centroid, d.position) > service[d.id]:
            return None
    rate = math.fsum(device_rate(alloc.powers[d.id], centroid, d, radio) for d in devs)
    return UavPlacement(position=centroid, served=tuple(sorted(ids)), allocation=alloc, rate=rate)


def kmeans_deploy(
    scenario: Scenario,
    radio: Optional[RadioParams] = None,
    power_scheme: str = "qdpa",
    cfg: Optional[SolverConfig] = None,
) -> DeploymentPlan:
    """Cluster-then-place baseline: UAVs sit at k-means centroids.

    Starts at the smallest cluster count the capacity allows and re-clusters
    with one more UAV until every cluster is feasible with the UAV at its
    centroid. Falls back to one UAV per device if even K clusters fail.
    """
    radio = radio or scenario.radio
    for dev in scenario.devices:
        full_power_radius(dev, radio)
    points = np.array([[d.x, d.y] for d in scenario.devices])
    k = scenario.device_count
    seed = scenario.seed if scenario.seed is not None else 0
    tag = f"kmeans-{power_scheme}"

    for n in range(math.ceil(k / radio.max_served), k + 1):
        labels = _lloyd(points, n, seed)
        uavs = []
        for j in range(n):
            ids = [int(i) for i in np.nonzero(labels == j)[0]]
            if not ids:
                continue
            placement = _cluster_placement(ids, scenario, radio, power_scheme)
            if placement is None:
                uavs = None
                break
            uavs.append(placement)
        if uavs:
            avg = math.fsum(p.rate for p in uavs) / len(uavs)
            return DeploymentPlan(uavs=tuple(uavs), uncovered=(), avg_rate=avg, scheme_tag=tag)

    uavs = []
    for dev in scenario.devices:
        placement = _cluster_placement([dev.id], scenario, radio, power_scheme)
        assert placement is not None  # singletons are feasible for coverable devices
        uavs.append(placement)
    avg = math.fsum(p.rate for p in uavs) / len(uavs)
    return DeploymentPlan(uavs=tuple(uavs), uncovered=(), avg_rate=avg, scheme_tag=tag)


def _convex_hull_ids(devs: list[IotDevice]) -> list[int]:
    """Device ids on the convex hull (monotone chain, strict turns)."""
    pts = sorted(devs, key=lambda d: (d.x, d.y, d.id))
    if len(pts) <= 2:
        return [d.id for d in pts]

    def cross(o, a, b):
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)

    lower: list[IotDevice] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[IotDevice] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return [d.id for d in hull]


def spiral_deploy(
    scenario: Scenario,
    radio: Optional[RadioParams] = None,
    power_scheme: str = "qdpa",
    cfg: Optional[SolverConfig] = None,
) -> DeploymentPlan:
    """Perimeter-first baseline: seeds walk clockwise along the uncovered hull.

    The first seed is the maximum-x device; each later seed is the uncovered
    hull device with the smallest clockwise angular step from the previous
    seed, measured around the centroid of the current uncovered set. Each UAV
    covers its seed plus nearest uncovered devices inside the seed's
    full-power footprint, as long as the shared power split stays feasible,
    and parks at the geometric center of the coverage disks (the point
    minimizing the worst coverage-margin overshoot): this baseline minimizes
    UAV count, not data rate.
    """
    radio = radio or scenario.radio
    cfg = cfg or SolverConfig()
    for dev in scenario.devices:
        full_power_radius(dev, radio)

    uncovered = list(range(scenario.device_count))
    prev_seed_pos: Optional[tuple[float, float]] = None
    uavs: list[UavPlacement] = []
    tag = f"spiral-{power_scheme}"

    while uncovered:
        devs = [scenario.device(i) for i in uncovered]
        if prev_seed_pos is None:
            k0 = max(devs, key=lambda d: (d.x, -d.id)).id
        else:
            hull_ids = _convex_hull_ids(devs)
            cx = np.mean([d.x for d in devs])
            cy = np.mean([d.y for d in devs])
            theta_prev = math.atan2(prev_seed_pos[1] - cy, prev_seed_pos[0] - cx)

            def clockwise_step(i: int) -> float:
                d = scenario.device(i)
                theta = math.atan2(d.y - cy, d.x - cx)
                return (theta_prev - theta) % (2.0 * math.pi)

            k0 = min(hull_ids, key=lambda i: (clockwise_step(i), i))
        seed_dev = scenario.device(k0)
        reach = full_power_radius(seed_dev, radio)
        candidates = sorted(
            (i for i in uncovered
             if i != k0 and _dist(scenario.device(i).position, seed_dev.position) <= reach),
            key=lambda i: (_dist(scenario.device(i).position, seed_dev.position), i),
        )
        covered = [k0]
        allocation = allocate([seed_dev], radio, power_scheme)
        position = (float(seed_dev.x), float(seed_dev.y))
        for k1 in candidates:
            if len(covered) >= radio.max_served:
                break
            trial_devs = [scenario.device(i) for i in covered + [k1]]
            trial_alloc = allocate(trial_devs, radio, power_scheme)
            if trial_alloc is None:
                break
            regions = feasibility(trial_devs, trial_alloc, radio,
                                  inner_delta=cfg.inner_delta, scan_step=cfg.grid_step)
            if regions.full_empty:
                break
            covered.append(k1)
            allocation = trial_alloc
            position = (float(regions.full_witness[0]), float(regions.full_witness[1]))
        rate = math.fsum(
            device_rate(allocation.powers[i], position, scenario.device(i), radio) for i in covered
        )
        uavs.append(UavPlacement(position=position, served=tuple(covered), allocation=allocation, rate=rate))
        served = set(covered)
        uncovered = [i for i in uncovered if i not in served]
        prev_seed_pos = seed_dev.position

    avg = math.fsum(p.rate for p in uavs) / len(uavs)
    return DeploymentPlan(uavs=tuple(uavs), uncovered=(), avg_rate=avg, scheme_tag=tag)


def deploy(scenario: Scenario, scheme: str, cfg: Optional[SolverConfig] = None) -> DeploymentPlan:
    """Run a scheme by tag (see SCHEMES)."""
    cfg = cfg or SolverConfig()
    if scheme == "jpap":
        return jpap(scenario, cfg=cfg, power_scheme="qdpa")
    if scheme == "epa-jpap":
        return jpap(scenario, cfg=cfg, power_scheme="epa")
    if scheme in ("kmeans-qdpa", "kmeans-epa"):
        return kmeans_deploy(scenario, power_scheme=scheme.split("-")[1], cfg=cfg)
    if scheme in ("spiral-qdpa", "spiral-epa"):
        return spiral_deploy(scenario, power_scheme=scheme.split("-")[1], cfg=cfg)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


# ---------------------------------------------------------------------------
# shared validator


def validate_plan(
    plan: DeploymentPlan,
    scenario: Scenario,
    dist_slack: float = 1e-6,
    rate_tol: float = 1e-9,
) -> list[str]:
    """Check every plan invariant; returns human-readable violations (empty = valid).

    Checks: pairwise-disjoint served sets, full coverage, per-UAV capacity,
    power budget conservation, per-device coverage distance, and the per-device
    QoS rate actually achieved at the allocated power and position.
    """
    radio = scenario.radio
    violations: list[str] = []
    seen: dict[int, int] = {}
    for n, uav in enumerate(plan.uavs):
        for dev_id in uav.served:
            if dev_id in seen:
                violations.append(
                    f"disjointness: device {dev_id} served by UAV {seen[dev_id]} and UAV {n}"
                )
            seen[dev_id] = n

    all_ids = set(range(scenario.device_count))
    missing = sorted(all_ids - set(seen) - set(plan.uncovered))
    if set(plan.uncovered):
        violations.append(f"coverage-partition: plan leaves devices uncovered {sorted(plan.uncovered)}")
    if missing:
        violations.append(f"coverage-partition: devices {missing} appear in no served set")
    extra = sorted(set(seen) - all_ids)
    if extra:
        violations.append(f"coverage-partition: unknown device ids {extra}")

    for n, uav in enumerate(plan.uavs):
        if len(uav.served) == 0:
            violations.append(f"capacity: UAV {n} serves no devices")
            continue
        if len(uav.served) > radio.max_served:
            violations.append(
                f"capacity: UAV {n} serves {len(uav.served)} devices, limit {radio.max_served}"
            )
        total = math.fsum(uav.allocation.powers.get(i, 0.0) for i in uav.served)
        if not math.isclose(total, radio.total_power, rel_tol=1e-9):
            violations.append(
                f"power-budget: UAV {n} powers sum to {total!r}, budget {radio.total_power!r}"
            )
        for dev_id in uav.served:
            if dev_id not in uav.allocation.powers:
                violations.append(f"power-budget: UAV {n} has no power entry for device {dev_id}")
                continue
            power = uav.allocation.powers[dev_id]
            if power <= 0:
                violations.append(f"power-budget: UAV {n} allocates {power!r} W to device {dev_id}")
            dev = scenario.device(dev_id)
            radius = uav.allocation.radii.get(dev_id)
            dist = _dist(uav.position, dev.position)
            if radius is None or dist > radius + dist_slack:
                violations.append(
                    f"coverage-distance: UAV {n} is {dist:.6f} m from device {dev_id}, "
                    f"allowed {radius if radius is not None else 'undefined'}"
                )
            achieved = device_rate(power, uav.position, dev, radio)
            if achieved < dev.qos_rate - rate_tol:
                violations.append(
                    f"qos-rate: device {dev_id} gets {achieved:.9f} bits/s/Hz, demands {dev.qos_rate}"
                )
    return violations
