import numpy as np
import pytest

from uavplan import ScenarioSpec, generate, run_point, sweep
from uavplan.bench import aggregate, read_csv, write_csv, write_json


def spec_of(radio, k=10, seed=0, lo=15.0, hi=20.0):
    return ScenarioSpec(device_count=k, area=(1500.0, 1500.0), qos_lo=lo, qos_hi=hi, radio=radio, seed=seed)


def test_generate_deterministic(radio):
    a = generate(spec_of(radio, seed=42))
    b = generate(spec_of(radio, seed=42))
    assert a == b
    c = generate(spec_of(radio, seed=43))
    assert c != a


def test_generate_bounds_and_mean(radio):
    sc = generate(spec_of(radio, k=1000, seed=1))
    xs = np.array([d.x for d in sc.devices])
    ys = np.array([d.y for d in sc.devices])
    assert xs.min() >= 0 and xs.max() <= 1500 and ys.min() >= 0 and ys.max() <= 1500
    # uniform mean 750, sigma = 1500/sqrt(12)/sqrt(1000) ~ 13.7; allow 3 sigma
    assert abs(xs.mean() - 750) < 3 * 1500 / np.sqrt(12 * 1000)
    assert abs(ys.mean() - 750) < 3 * 1500 / np.sqrt(12 * 1000)


def test_generate_degenerate_qos_range(radio):
    sc = generate(spec_of(radio, k=50, lo=15.0, hi=15.0))
    assert all(d.qos_rate == 15.0 for d in sc.devices)


def test_spec_validation(radio):
    with pytest.raises(ValueError):
        spec_of(radio, k=0)
    with pytest.raises(ValueError):
        spec_of(radio, lo=20.0, hi=15.0)


def test_run_point_records_metrics(radio):
    rec = run_point(spec_of(radio, k=5, seed=2), "jpap")
    assert rec.error is None
    assert rec.uav_count >= 1
    assert len(rec.uav_rates) == rec.uav_count
    assert rec.avg_rate == pytest.approx(sum(rec.uav_rates) / rec.uav_count, rel=1e-12)
    assert rec.wall_time_s > 0


def test_run_point_records_failure(radio):
    # qos 40 is uncoverable; the record carries the error instead of raising
    rec = run_point(spec_of(radio, k=3, seed=2, lo=40.0, hi=40.0), "jpap")
    assert rec.error is not None
    assert "DeviceUncoverable" in rec.error


def test_sweep_cardinality_and_order(radio):
    specs = [spec_of(radio, k=k, seed=100) for k in (5, 8)]
    records = sweep(specs, ["jpap", "kmeans-qdpa"], seeds_per_point=3)
    assert len(records) == 2 * 2 * 3
    keys = [(r.device_count, r.scheme_tag, r.seed) for r in records]
    assert keys == sorted(keys)
    assert {r.seed for r in records} == {100, 101, 102}


def test_sweep_is_pure_function_of_inputs(radio):
    specs = [spec_of(radio, k=6, seed=7)]
    a = sweep(specs, ["jpap"], seeds_per_point=2)
    b = sweep(specs, ["jpap"], seeds_per_point=2)
    assert [(r.seed, r.uav_count, r.avg_rate, r.uav_rates) for r in a] == [
        (r.seed, r.uav_count, r.avg_rate, r.uav_rates) for r in b
    ]


def test_sweep_parallel_matches_serial(radio):
    specs = [spec_of(radio, k=6, seed=7)]
    serial = sweep(specs, ["jpap", "spiral-qdpa"], seeds_per_point=2, jobs=1)
    parallel = sweep(specs, ["jpap", "spiral-qdpa"], seeds_per_point=2, jobs=2)
    assert [(r.seed, r.scheme_tag, r.uav_count, r.avg_rate) for r in serial] == [
        (r.seed, r.scheme_tag, r.uav_count, r.avg_rate) for r in parallel
    ]


def test_csv_roundtrip(tmp_path, radio):
    records = sweep([spec_of(radio, k=5, seed=3)], ["jpap"], seeds_per_point=2)
    path = tmp_path / "results.csv"
    write_csv(records, path)
    back = read_csv(path)
    assert back == records


def test_json_output_and_aggregates(tmp_path, radio):
    import json

    records = sweep([spec_of(radio, k=5, seed=3)], ["jpap", "epa-jpap"], seeds_per_point=2)
    path = tmp_path / "results.json"
    write_json(records, path)
    with open(path) as fh:
        payload = json.load(fh)
    assert len(payload["records"]) == 4
    agg = payload["aggregates"]["5"]
    assert set(agg) == {"jpap", "epa-jpap"}
    assert agg["jpap"]["runs"] == 2
    direct = aggregate(records)["5"]["jpap"]
    assert agg["jpap"]["avg_rate_mean"] == pytest.approx(direct["avg_rate_mean"], rel=1e-12)
