"""JSON file formats for scenarios and deployment plans.

All numeric fields are written with Python's shortest round-trip float
representation (>= 15 significant digits), so write/read is lossless and two
identical runs produce byte-identical files (keys are sorted).

Scenario file:
    {"seed": int|null, "area": {"width": m, "height": m},
     "radio": {"altitude": m, "ref_gain": lin, "noise_power": W,
               "total_power": W, "max_served": int},
     "devices": [{"id": int, "x": m, "y": m, "r": bits/s/Hz}, ...]}

Plan file:
    {"scheme": tag, "uav_count": int, "avg_rate": bits/s/Hz,
     "uavs": [{"x": m, "y": m, "served": [ids], "powers": {"id": W},
               "radii": {"id": m}, "d_sv": m|null, "rate": bits/s/Hz}, ...]}
"""

from __future__ import annotations

import json

from .deployment import DeploymentPlan
from .model import IotDevice, RadioParams, Scenario, UavPlacement
from .power import PowerAllocation


def _dump(obj: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "seed": scenario.seed,
        "area": {"width": scenario.area[0], "height": scenario.area[1]},
        "radio": {
            "altitude": scenario.radio.altitude,
            "ref_gain": scenario.radio.ref_gain,
            "noise_power": scenario.radio.noise_power,
            "total_power": scenario.radio.total_power,
            "max_served": scenario.radio.max_served,
        },
        "devices": [
            {"id": d.id, "x": d.x, "y": d.y, "r": d.qos_rate} for d in scenario.devices
        ],
    }


def scenario_from_dict(raw: dict) -> Scenario:
    radio = RadioParams(
        altitude=raw["radio"]["altitude"],
        ref_gain=raw["radio"]["ref_gain"],
        noise_power=raw["radio"]["noise_power"],
        total_power=raw["radio"]["total_power"],
        max_served=raw["radio"]["max_served"],
    )
    devices = tuple(
        IotDevice(id=d["id"], position=(d["x"], d["y"]), qos_rate=d["r"])
        for d in sorted(raw["devices"], key=lambda d: d["id"])
    )
    return Scenario(
        devices=devices,
        radio=radio,
        area=(raw["area"]["width"], raw["area"]["height"]),
        seed=raw.get("seed"),
    )


def write_scenario(scenario: Scenario, path) -> None:
    _dump(scenario_to_dict(scenario), path)


def read_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))


def plan_to_dict(plan: DeploymentPlan) -> dict:
    return {
        "scheme": plan.scheme_tag,
        "uav_count": len(plan.uavs),
        "avg_rate": plan.avg_rate,
        "uncovered": list(plan.uncovered),
        "uavs": [
            {
                "x": u.position[0],
                "y": u.position[1],
                "served": list(u.served),
                "powers": {str(i): p for i, p in sorted(u.allocation.powers.items())},
                "radii": {str(i): r for i, r in sorted(u.allocation.radii.items())},
                "d_sv": u.allocation.equalized_radius,
                "power_scheme": u.allocation.scheme_tag,
                "rate": u.rate,
            }
            for u in plan.uavs
        ],
    }


def plan_from_dict(raw: dict) -> DeploymentPlan:
    uavs = []
    for u in raw["uavs"]:
        alloc = PowerAllocation(
            powers={int(i): p for i, p in u["powers"].items()},
            radii={int(i): r for i, r in u["radii"].items()},
            equalized_radius=u["d_sv"],
            scheme_tag=u["power_scheme"],
        )
        uavs.append(UavPlacement(
            position=(u["x"], u["y"]),
            served=tuple(u["served"]),
            allocation=alloc,
            rate=u["rate"],
        ))
    return DeploymentPlan(
        uavs=tuple(uavs),
        uncovered=tuple(raw.get("uncovered", ())),
        avg_rate=raw["avg_rate"],
        scheme_tag=raw["scheme"],
    )


def write_plan(plan: DeploymentPlan, path) -> None:
    _dump(plan_to_dict(plan), path)


def read_plan(path) -> DeploymentPlan:
    with open(path) as fh:
        return plan_from_dict(json.load(fh))
