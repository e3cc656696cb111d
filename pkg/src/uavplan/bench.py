"""Scenario generation and multi-seed experiment sweeps.

Scenarios are reproducible: device positions and demands come from numpy's
PCG64 generator seeded with the scenario seed, drawing in a fixed order
(x coordinates, then y coordinates, then demands). Sweep output is a pure
function of the specs, schemes, and seed list; per-run failures are recorded
in the row instead of aborting the sweep.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .deployment import SCHEMES, deploy, validate_plan
from .model import IotDevice, RadioParams, Scenario
from .placement import SolverConfig

CSV_HEADER = ["device_count", "scheme", "seed", "uav_count", "avg_rate", "wall_time_s", "uav_rates", "error"]


@dataclass(frozen=True)
class ScenarioSpec:
    """Everything needed to generate one random scenario."""

    device_count: int
    area: tuple[float, float]
    qos_lo: float
    qos_hi: float
    radio: RadioParams
    seed: int

    def __post_init__(self):
        if self.device_count < 1:
            raise ValueError("device_count must be >= 1")
        if self.qos_lo > self.qos_hi:
            raise ValueError("qos_lo must be <= qos_hi")


@dataclass(frozen=True)
class ExperimentRecord:
    """One (scenario seed, scheme) run's metrics."""

    seed: int
    scheme_tag: str
    device_count: int
    uav_count: int
    avg_rate: float
    uav_rates: tuple[float, ...]
    wall_time_s: float
    error: Optional[str] = None


def generate(spec: ScenarioSpec) -> Scenario:
    """Materialize a scenario: uniform positions and uniform demands."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    width, height = spec.area
    xs = rng.uniform(0.0, width, spec.device_count)
    ys = rng.uniform(0.0, height, spec.device_count)
    demands = rng.uniform(spec.qos_lo, spec.qos_hi, spec.device_count)
    devices = tuple(
        IotDevice(id=i, position=(float(xs[i]), float(ys[i])), qos_rate=float(demands[i]))
        for i in range(spec.device_count)
    )
    return Scenario(devices=devices, radio=spec.radio, area=spec.area, seed=spec.seed)


def run_point(spec: ScenarioSpec, scheme: str, cfg: Optional[SolverConfig] = None) -> ExperimentRecord:
    """Generate, deploy, validate, and time one sweep point."""
    scenario = generate(spec)
    start = time.perf_counter()
    try:
        plan = deploy(scenario, scheme, cfg)
        violations = validate_plan(plan, scenario)
        if violations:
            raise RuntimeError(f"plan failed validation: {violations[0]}")
    except Exception as exc:  # recorded, never aborts the sweep
        return ExperimentRecord(
            seed=spec.seed, scheme_tag=scheme, device_count=spec.device_count,
            uav_count=0, avg_rate=math.nan, uav_rates=(),
            wall_time_s=time.perf_counter() - start, error=f"{type(exc).__name__}: {exc}",
        )
    elapsed = time.perf_counter() - start
    return ExperimentRecord(
        seed=spec.seed, scheme_tag=scheme, device_count=spec.device_count,
        uav_count=len(plan.uavs), avg_rate=plan.avg_rate,
        uav_rates=tuple(u.rate for u in plan.uavs), wall_time_s=elapsed,
    )


def _run_task(args) -> ExperimentRecord:
    spec, scheme, cfg = args
    return run_point(spec, scheme, cfg)


def sweep(
    specs: Sequence[ScenarioSpec],
    schemes: Sequence[str],
    seeds_per_point: int = 20,
    cfg: Optional[SolverConfig] = None,
    jobs: int = 1,
) -> list[ExperimentRecord]:
    """Run every (spec, scheme, seed offset) combination.

    Each spec's seed is the base; seed offsets 0..seeds_per_point-1 are added
    so points are independent but reproducible. Records are merged in
    (device_count, scheme, seed) order regardless of completion order.
    """
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
    tasks = [
        (replace(spec, seed=spec.seed + offset), scheme, cfg)
        for spec in specs
        for scheme in schemes
        for offset in range(seeds_per_point)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        records = [_run_task(t) for t in tasks]
    records.sort(key=lambda r: (r.device_count, r.scheme_tag, r.seed))
    return records


def aggregate(records: Sequence[ExperimentRecord]) -> dict:
    """Mean/stddev of UAV count and average rate per (device_count, scheme)."""
    groups: dict[tuple[int, str], list[ExperimentRecord]] = {}
    for rec in records:
        groups.setdefault((rec.device_count, rec.scheme_tag), []).append(rec)
    out: dict = {}
    for (k, scheme), recs in sorted(groups.items()):
        good = [r for r in recs if r.error is None]
        entry = {
            "runs": len(recs),
            "failures": len(recs) - len(good),
        }
        if good:
            n = np.array([r.uav_count for r in good], dtype=float)
            rate = np.array([r.avg_rate for r in good])
            entry.update(
                uav_count_mean=float(n.mean()),
                uav_count_std=float(n.std(ddof=1)) if len(n) > 1 else 0.0,
                avg_rate_mean=float(rate.mean()),
                avg_rate_std=float(rate.std(ddof=1)) if len(rate) > 1 else 0.0,
                wall_time_mean_s=float(np.mean([r.wall_time_s for r in good])),
            )
        out.setdefault(str(k), {})[scheme] = entry
    return out


def write_csv(records: Sequence[ExperimentRecord], path) -> None:
    """One record per row; uav_rates is a semicolon-joined float list."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow([
                r.device_count, r.scheme_tag, r.seed, r.uav_count,
                repr(r.avg_rate), repr(r.wall_time_s),
                ";".join(repr(x) for x in r.uav_rates),
                r.error or "",
            ])


def read_csv(path) -> list[ExperimentRecord]:
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rates = tuple(float(x) for x in row["uav_rates"].split(";") if x)
            records.append(ExperimentRecord(
                seed=int(row["seed"]), scheme_tag=row["scheme"],
                device_count=int(row["device_count"]), uav_count=int(row["uav_count"]),
                avg_rate=float(row["avg_rate"]), uav_rates=rates,
                wall_time_s=float(row["wall_time_s"]), error=row["error"] or None,
            ))
    return records


def write_json(records: Sequence[ExperimentRecord], path) -> None:
    """Nested aggregates plus the raw per-run records."""
    payload = {
        "aggregates": aggregate(records),
        "records": [
            {
                "device_count": r.device_count, "scheme": r.scheme_tag, "seed": r.seed,
                "uav_count": r.uav_count, "avg_rate": r.avg_rate,
                "uav_rates": list(r.uav_rates), "wall_time_s": r.wall_time_s,
                "error": r.error,
            }
            for r in records
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
