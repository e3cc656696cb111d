"""uavplan: multi-UAV base-station placement with QoS-aware power allocation."""

from .bench import ExperimentRecord, ScenarioSpec, aggregate, generate, run_point, sweep
from .deployment import (
    SCHEMES,
    CoverageState,
    DeploymentPlan,
    dense_boundary_id,
    deploy,
    full_power_radius,
    jpap,
    kmeans_deploy,
    plan_single_uav,
    spiral_deploy,
    validate_plan,
)
from .model import (
    DeviceUncoverableError,
    IotDevice,
    RadioParams,
    Scenario,
    UavPlacement,
    channel_gain,
    coverage_radius,
    device_rate,
    uav_rate,
)
from .placement import (
    DualState,
    FeasibleRegions,
    PlacementSolution,
    SolverConfig,
    SurrogateCoeffs,
    build_surrogate,
    convexity_check,
    drmp,
    feasibility,
    intersect_disks,
    solve_grid,
    solve_inner,
)
from .power import PowerAllocation, allocate, epa, qdpa

__version__ = "0.1.0"

__all__ = [
    "SCHEMES",
    "CoverageState",
    "DeploymentPlan",
    "DeviceUncoverableError",
    "DualState",
    "ExperimentRecord",
    "FeasibleRegions",
    "IotDevice",
    "PlacementSolution",
    "PowerAllocation",
    "RadioParams",
    "Scenario",
    "ScenarioSpec",
    "SolverConfig",
    "SurrogateCoeffs",
    "UavPlacement",
    "aggregate",
    "allocate",
    "build_surrogate",
    "channel_gain",
    "convexity_check",
    "coverage_radius",
    "dense_boundary_id",
    "deploy",
    "device_rate",
    "drmp",
    "epa",
    "feasibility",
    "full_power_radius",
    "generate",
    "intersect_disks",
    "jpap",
    "kmeans_deploy",
    "plan_single_uav",
    "qdpa",
    "run_point",
    "solve_grid",
    "solve_inner",
    "spiral_deploy",
    "sweep",
    "uav_rate",
    "validate_plan",
]
