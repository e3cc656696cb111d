"""Figure rendering for the report path.

Three figures: average UAV rate versus device count, UAV count versus device
count (one line per scheme, mean over seeds with stddev bars), and a
deployment map showing devices, UAV positions, and coverage circles.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bench import ExperimentRecord
from .deployment import DeploymentPlan
from .model import Scenario

_STYLE = {
    "jpap": dict(color="tab:red", marker="*", markersize=10),
    "epa-jpap": dict(color="tab:orange", marker="s"),
    "kmeans-qdpa": dict(color="tab:blue", marker="o"),
    "kmeans-epa": dict(color="tab:cyan", marker="d"),
    "spiral-qdpa": dict(color="tab:green", marker="^"),
    "spiral-epa": dict(color="tab:olive", marker="v"),
}


def _series(records: Sequence[ExperimentRecord], value):
    """Per-scheme (K values, means, stddevs) over the non-failed records."""
    by_scheme: dict[str, dict[int, list[float]]] = {}
    for r in records:
        if r.error is not None:
            continue
        by_scheme.setdefault(r.scheme_tag, {}).setdefault(r.device_count, []).append(value(r))
    out = {}
    for scheme, groups in by_scheme.items():
        ks = sorted(groups)
        means = [float(np.mean(groups[k])) for k in ks]
        stds = [float(np.std(groups[k], ddof=1)) if len(groups[k]) > 1 else 0.0 for k in ks]
        out[scheme] = (ks, means, stds)
    return out


def _plot_metric(records, value, ylabel, path) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for scheme, (ks, means, stds) in sorted(_series(records, value).items()):
        style = _STYLE.get(scheme, {})
        ax.errorbar(ks, means, yerr=stds, label=scheme, capsize=3, **style)
    ax.set_xlabel("Number of devices")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_rate_vs_devices(records: Sequence[ExperimentRecord], path) -> None:
    _plot_metric(records, lambda r: r.avg_rate, "Average UAV data rate (bits/s/Hz)", path)


def plot_uav_count_vs_devices(records: Sequence[ExperimentRecord], path) -> None:
    _plot_metric(records, lambda r: float(r.uav_count), "Number of UAVs", path)


def plot_deployment_map(plan: DeploymentPlan, scenario: Scenario, path) -> None:
    """Devices, UAV positions, and each UAV's coverage circles."""
    fig, ax = plt.subplots(figsize=(6.4, 6.4))
    xs = [d.x for d in scenario.devices]
    ys = [d.y for d in scenario.devices]
    ax.scatter(xs, ys, s=14, c="black", label="devices", zorder=3)
    for n, uav in enumerate(plan.uavs):
        ax.plot(*uav.position, marker="*", markersize=12, color="tab:red",
                linestyle="none", zorder=4, label="UAV" if n == 0 else None)
        radius = uav.allocation.equalized_radius
        if radius is not None:
            ax.add_patch(plt.Circle(uav.position, radius, fill=False,
                                    linestyle="--", color="tab:blue", alpha=0.7))
        else:
            for dev_id in uav.served:
                ax.add_patch(plt.Circle(uav.position, uav.allocation.radii[dev_id],
                                        fill=False, linestyle=":", color="tab:blue", alpha=0.4))
    w, h = scenario.area
    ax.set_xlim(-0.05 * w, 1.05 * w)
    ax.set_ylim(-0.05 * h, 1.05 * h)
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title(f"{plan.scheme_tag}: {len(plan.uavs)} UAVs, avg rate {plan.avg_rate:.2f} bits/s/Hz")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
