"""Command-line front end.

Subcommands:
  generate  write a random scenario file
  plan      deploy UAVs over a scenario with one scheme
  sweep     run a multi-seed experiment grid, emit CSV or JSON
  validate  check a plan file against a scenario file
  report    render figures (and an aggregate CSV) from sweep results / a plan

Radio parameters accept dBm/dB at this boundary only (defaults: total power
40 dBm, noise -90 dBm, reference gain -30 dB, altitude 50 m); every file and
library call downstream uses linear units. Exit codes: 0 success, 1
validation/feasibility failure, 2 usage error. The UAVPLAN_OUT_DIR
environment variable, when set, redirects relative output paths.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .bench import ScenarioSpec, aggregate, generate, read_csv, sweep, write_csv, write_json
from .deployment import SCHEMES, deploy, validate_plan
from .files import read_plan, read_scenario, write_plan, write_scenario
from .model import DeviceUncoverableError, RadioParams
from .placement import SolverConfig


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


DEFAULT_RADIO = RadioParams(
    altitude=50.0,
    ref_gain=db_to_linear(-30.0),
    noise_power=dbm_to_watts(-90.0),
    total_power=dbm_to_watts(40.0),
    max_served=10,
)


@dataclass
class RunConfig:
    """Parsed config file: radio constants, solver tunables, bench defaults."""

    radio: RadioParams = DEFAULT_RADIO
    solver: SolverConfig = field(default_factory=SolverConfig)
    bench: dict = field(default_factory=dict)


def radio_from_config(raw: dict) -> RadioParams:
    """Build RadioParams from a config section, accepting dBm/dB or linear keys."""
    known = {
        "altitude", "max_served",
        "total_power_w", "total_power_dbm",
        "noise_power_w", "noise_power_dbm",
        "ref_gain", "ref_gain_db",
    }
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown radio config keys: {sorted(unknown)}")
    total = raw.get("total_power_w", dbm_to_watts(raw.get("total_power_dbm", 40.0)))
    noise = raw.get("noise_power_w", dbm_to_watts(raw.get("noise_power_dbm", -90.0)))
    gain = raw.get("ref_gain", db_to_linear(raw.get("ref_gain_db", -30.0)))
    return RadioParams(
        altitude=raw.get("altitude", 50.0),
        ref_gain=gain,
        noise_power=noise,
        total_power=total,
        max_served=raw.get("max_served", 10),
    )


def load_config(path: Optional[str]) -> RunConfig:
    if path is None:
        return RunConfig()
    with open(path) as fh:
        raw = json.load(fh)
    unknown = set(raw) - {"radio", "solver", "bench"}
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    return RunConfig(
        radio=radio_from_config(raw.get("radio", {})),
        solver=SolverConfig.from_dict(raw.get("solver", {})),
        bench=raw.get("bench", {}),
    )


def _out_path(path: str) -> Path:
    """Apply the UAVPLAN_OUT_DIR override to relative output paths."""
    p = Path(path)
    base = os.environ.get("UAVPLAN_OUT_DIR")
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _parse_k_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad k-list {text!r}; expected comma-separated integers")
    if not values:
        raise argparse.ArgumentTypeError("k-list is empty")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uavplan", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="write a random scenario file")
    p_gen.add_argument("--k", type=int, required=True, help="number of devices")
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--r-lo", type=float, default=15.0, help="lowest QoS demand, bits/s/Hz")
    p_gen.add_argument("--r-hi", type=float, default=20.0, help="highest QoS demand, bits/s/Hz")
    p_gen.add_argument("--area", type=float, nargs=2, default=[1500.0, 1500.0], metavar=("W", "H"))
    p_gen.add_argument("--config", default=None)
    p_gen.add_argument("--out", default="scenario.json")

    p_plan = sub.add_parser("plan", help="deploy UAVs over a scenario")
    p_plan.add_argument("--scenario", required=True)
    p_plan.add_argument("--scheme", required=True, choices=SCHEMES)
    p_plan.add_argument("--config", default=None)
    p_plan.add_argument("--out", default="plan.json")

    p_sweep = sub.add_parser("sweep", help="multi-seed experiment grid")
    p_sweep.add_argument("--k-list", type=_parse_k_list, default=[20, 30, 40, 50, 60])
    p_sweep.add_argument("--schemes", default="all", help="comma list or 'all'")
    p_sweep.add_argument("--seeds", type=int, default=20, help="seeds per (K, scheme) point")
    p_sweep.add_argument("--seed-base", type=int, default=0)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--config", default=None)
    p_sweep.add_argument("--format", choices=["csv", "json"], default="csv")
    p_sweep.add_argument("--out", default="results.csv")

    p_val = sub.add_parser("validate", help="check a plan against its scenario")
    p_val.add_argument("--plan", required=True)
    p_val.add_argument("--scenario", required=True)

    p_rep = sub.add_parser("report", help="render figures from results and plans")
    p_rep.add_argument("--results", default=None, help="sweep CSV or JSON file")
    p_rep.add_argument("--plan", default=None)
    p_rep.add_argument("--scenario", default=None)
    p_rep.add_argument("--out-dir", default="report")
    return parser


def cmd_generate(args) -> int:
    cfg = load_config(args.config)
    spec = ScenarioSpec(
        device_count=args.k,
        area=(args.area[0], args.area[1]),
        qos_lo=args.r_lo,
        qos_hi=args.r_hi,
        radio=cfg.radio,
        seed=args.seed,
    )
    scenario = generate(spec)
    out = _out_path(args.out)
    write_scenario(scenario, out)
    print(f"wrote scenario with {scenario.device_count} devices to {out}")
    return 0


def cmd_plan(args) -> int:
    cfg = load_config(args.config)
    scenario = read_scenario(args.scenario)
    try:
        plan = deploy(scenario, args.scheme, cfg.solver)
    except DeviceUncoverableError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 1
    violations = validate_plan(plan, scenario)
    if violations:
        print(f"internal error, plan failed validation: {violations[0]}", file=sys.stderr)
        return 1
    out = _out_path(args.out)
    write_plan(plan, out)
    print(f"scheme={plan.scheme_tag} uavs={len(plan.uavs)} avg_rate={plan.avg_rate:.6f}")
    print(f"wrote plan to {out}")
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    schemes = list(SCHEMES) if args.schemes == "all" else [s.strip() for s in args.schemes.split(",")]
    for s in schemes:
        if s not in SCHEMES:
            print(f"unknown scheme {s!r}; choose from {', '.join(SCHEMES)}", file=sys.stderr)
            return 2
    bench_cfg = cfg.bench
    area = tuple(bench_cfg.get("area", (1500.0, 1500.0)))
    specs = [
        ScenarioSpec(
            device_count=k, area=area,
            qos_lo=bench_cfg.get("qos_lo", 15.0), qos_hi=bench_cfg.get("qos_hi", 20.0),
            radio=cfg.radio, seed=args.seed_base,
        )
        for k in args.k_list
    ]
    records = sweep(specs, schemes, seeds_per_point=args.seeds, cfg=cfg.solver, jobs=args.jobs)
    out = _out_path(args.out)
    if args.format == "csv":
        write_csv(records, out)
    else:
        write_json(records, out)
    failures = sum(1 for r in records if r.error is not None)
    print(f"wrote {len(records)} records to {out} ({failures} failures)")
    return 0 if failures < len(records) else 1


def cmd_validate(args) -> int:
    scenario = read_scenario(args.scenario)
    plan = read_plan(args.plan)
    violations = validate_plan(plan, scenario)
    if violations:
        print(f"INVALID: {violations[0]}")
        return 1
    print(f"OK: {len(plan.uavs)} UAVs, all constraints hold")
    return 0


def cmd_report(args) -> int:
    from . import plots  # matplotlib import deferred to the report path

    if args.results is None and args.plan is None:
        print("report needs --results and/or --plan with --scenario", file=sys.stderr)
        return 2
    out_dir = _out_path(str(Path(args.out_dir) / "x")).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    wrote = []
    if args.results:
        if args.results.endswith(".json"):
            with open(args.results) as fh:
                payload = json.load(fh)
            from .bench import ExperimentRecord
            records = [
                ExperimentRecord(
                    seed=r["seed"], scheme_tag=r["scheme"], device_count=r["device_count"],
                    uav_count=r["uav_count"], avg_rate=r["avg_rate"],
                    uav_rates=tuple(r["uav_rates"]), wall_time_s=r["wall_time_s"],
                    error=r["error"],
                )
                for r in payload["records"]
            ]
        else:
            records = read_csv(args.results)
        plots.plot_rate_vs_devices(records, out_dir / "rate_vs_devices.png")
        plots.plot_uav_count_vs_devices(records, out_dir / "uav_count_vs_devices.png")
        agg_path = out_dir / "aggregates.csv"
        _write_aggregates_csv(records, agg_path)
        wrote += ["rate_vs_devices.png", "uav_count_vs_devices.png", "aggregates.csv"]
    if args.plan:
        if args.scenario is None:
            print("--plan needs --scenario for the deployment map", file=sys.stderr)
            return 2
        plan = read_plan(args.plan)
        scenario = read_scenario(args.scenario)
        plots.plot_deployment_map(plan, scenario, out_dir / "deployment_map.png")
        wrote.append("deployment_map.png")
    print(f"wrote {', '.join(wrote)} to {out_dir}")
    return 0


def _write_aggregates_csv(records, path) -> None:
    import csv as _csv

    agg = aggregate(records)
    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow([
            "device_count", "scheme", "runs", "failures",
            "uav_count_mean", "uav_count_std", "avg_rate_mean", "avg_rate_std",
        ])
        for k, by_scheme in agg.items():
            for scheme, entry in by_scheme.items():
                writer.writerow([
                    k, scheme, entry["runs"], entry["failures"],
                    entry.get("uav_count_mean", ""), entry.get("uav_count_std", ""),
                    entry.get("avg_rate_mean", ""), entry.get("avg_rate_std", ""),
                ])


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "generate": cmd_generate,
        "plan": cmd_plan,
        "sweep": cmd_sweep,
        "validate": cmd_validate,
        "report": cmd_report,
    }
    try:
        return handlers[args.command](args)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
