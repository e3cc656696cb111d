import math

import numpy as np
import pytest

from uavplan import build_surrogate, convexity_check, drmp, intersect_disks, qdpa, solve_grid, solve_inner
from uavplan.placement import (
    SolverConfig,
    SurrogateCoeffs,
    _GridCache,
    _Instance,
    feasibility,
    log_dist_hessian,
    log_dist_hessian_det,
)

from conftest import make_devices, random_instance

LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# surrogate bound


def test_surrogate_coefficients_at_unit_snr(radio):
    # place the device so its SNR at the anchor is exactly 1
    dist2 = radio.total_power * radio.gain_to_noise - radio.altitude**2
    devs = make_devices([(math.sqrt(dist2), 0.0)], [15.0])
    alloc = qdpa(devs, radio)
    coeffs = build_surrogate(devs, alloc, (0.0, 0.0), radio)
    assert coeffs.anchor_snr[0] == pytest.approx(1.0, rel=1e-12)
    assert coeffs.tau[0] == pytest.approx(0.5, rel=1e-12)
    assert coeffs.beta[0] == pytest.approx(1.0, rel=1e-12)


def test_surrogate_tight_at_anchor(radio):
    rng = np.random.default_rng(20)
    for _ in range(50):
        inst = random_instance(rng, radio)
        if inst is None:
            continue
        devs, alloc, regions = inst
        anchor = regions.full_witness
        coeffs = build_surrogate(devs, alloc, anchor, radio)
        helper = _Instance(devs, alloc, radio)
        assert helper.surrogate_rate(coeffs, anchor) == pytest.approx(
            helper.true_rate(anchor), abs=1e-12
        )


def test_surrogate_is_global_lower_bound(radio):
    rng = np.random.default_rng(21)
    done = 0
    while done < 20:
        inst = random_instance(rng, radio)
        if inst is None:
            continue
        devs, alloc, regions = inst
        coeffs = build_surrogate(devs, alloc, regions.full_witness, radio)
        helper = _Instance(devs, alloc, radio)
        for _ in range(1000):
            pos = rng.uniform(-200, 500, size=2)
            assert helper.surrogate_rate(coeffs, pos) <= helper.true_rate(pos) + 1e-9
        done += 1


# ---------------------------------------------------------------------------
# curvature formulas


def test_hessian_overhead_entry(radio):
    # 2 / (ln2 * H^2) with H = 50
    h = log_dist_hessian((0.0, 0.0), (0.0, 0.0), radio.altitude)
    assert h[0, 0] == pytest.approx(0.0011541560327111707, rel=1e-12)
    assert h[0, 1] == 0.0


def test_hessian_determinant_sign(radio):
    H = radio.altitude
    assert log_dist_hessian_det((H, 0.0), (0.0, 0.0), H) == pytest.approx(0.0, abs=1e-18)
    assert log_dist_hessian_det((H * 0.9, 0.0), (0.0, 0.0), H) > 0
    assert log_dist_hessian_det((H * 1.1, 0.0), (0.0, 0.0), H) < 0


def _fd_hessian(pos, dev, altitude, h=0.05):
    def j(x, y):
        return math.log2((x - dev[0]) ** 2 + (y - dev[1]) ** 2 + altitude**2)

    x, y = pos
    d2x = (j(x + h, y) - 2 * j(x, y) + j(x - h, y)) / h**2
    d2y = (j(x, y + h) - 2 * j(x, y) + j(x, y - h)) / h**2
    dxy = (j(x + h, y + h) - j(x + h, y - h) - j(x - h, y + h) + j(x - h, y - h)) / (4 * h**2)
    return np.array([[d2x, dxy], [dxy, d2y]])


def test_hessian_matches_finite_differences(radio):
    rng = np.random.default_rng(22)
    H = radio.altitude
    for _ in range(300):
        dev = rng.uniform(-100, 100, size=2)
        pos = dev + rng.uniform(-200, 200, size=2)
        dist = math.hypot(*(pos - dev))
        if abs(dist - H) < 5.0:  # keep away from the degenerate circle
            continue
        exact = log_dist_hessian(pos, dev, H)
        approx = _fd_hessian(pos, dev, H)
        scale = max(np.abs(exact).max(), 1e-12)
        assert np.abs(exact - approx).max() / scale < 1e-4
        det_closed = log_dist_hessian_det(pos, dev, H)
        det_from_entries = exact[0, 0] * exact[1, 1] - exact[0, 1] * exact[1, 0]
        assert det_closed == pytest.approx(det_from_entries, rel=1e-9)


def test_convexity_check_thresholds(radio):
    devs = make_devices([(0, 0), (20, 0), (0, 20), (20, 20), (10, 10)], [19.0] * 5)
    alloc = qdpa(devs, radio)
    regions = feasibility(devs, alloc, radio)
    assert alloc.equalized_radius < radio.altitude
    assert convexity_check(regions, radio)

    spread = make_devices([(0, 0), (100, 0)], [15.0, 15.0])
    alloc2 = qdpa(spread, radio)
    regions2 = feasibility(spread, alloc2, radio)
    assert alloc2.equalized_radius > radio.altitude
    assert not convexity_check(regions2, radio)


# ---------------------------------------------------------------------------
# disk intersection and regions


def test_intersect_single_disk():
    ok, pt = intersect_disks(np.array([[3.0, 4.0]]), np.array([10.0]))
    assert ok
    assert math.hypot(pt[0] - 3, pt[1] - 4) <= 10.0


def test_intersect_tangent_disks_unique_point():
    centers = np.array([[0.0, 0.0], [20.0, 0.0]])
    ok, pt = intersect_disks(centers, np.array([10.0, 10.0]))
    assert ok
    assert pt == pytest.approx([10.0, 0.0], abs=1e-9)


def test_intersect_equilateral_triangle_circumradius():
    s = 90.0
    centers = s * np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
    circumradius = s / math.sqrt(3.0)
    ok_small, _ = intersect_disks(centers, np.full(3, circumradius * 0.999))
    ok_big, pt = intersect_disks(centers, np.full(3, circumradius * 1.001))
    assert not ok_small
    assert ok_big
    assert pt == pytest.approx(centers.mean(axis=0), abs=1e-6)


def test_intersect_matches_grid_oracle():
    rng = np.random.default_rng(23)
    for _ in range(500):
        m = int(rng.integers(1, 6))
        centers = rng.uniform(0, 100, size=(m, 2))
        radii = rng.uniform(5, 60, size=m)
        ok, pt = intersect_disks(centers, radii)
        lo = (centers - radii[:, None]).max(axis=0) - 1
        hi = (centers + radii[:, None]).min(axis=0) + 1
        grid_ok = False
        if np.all(hi > lo):
            xs = np.linspace(lo[0], hi[0], 160)
            ys = np.linspace(lo[1], hi[1], 160)
            X, Y = np.meshgrid(xs, ys)
            inside = np.ones(X.shape, bool)
            for (ax, ay), r in zip(centers, radii):
                inside &= (X - ax) ** 2 + (Y - ay) ** 2 <= r * r
            grid_ok = bool(inside.any())
        if grid_ok:
            assert ok  # the exact test can only beat the lattice, never miss
        if ok:
            d = np.hypot(*(centers - pt).T)
            assert np.all(d <= radii + 1e-6)


def test_feasibility_single_device(radio):
    devs = make_devices([(100.0, 100.0)], [15.0])
    alloc = qdpa(devs, radio)
    regions = feasibility(devs, alloc, radio)
    assert not regions.full_empty
    assert not regions.inner_empty
    assert not regions.outer_empty  # ring H..550 m around the device


def test_feasibility_empty_triangle(radio):
    # equal demands -> equal radii; side chosen so circumradius exceeds d_sv
    devs = make_devices([(0, 0), (300, 0), (150, 260)], [18.0, 18.0, 18.0])
    alloc = qdpa(devs, radio)
    assert alloc.equalized_radius < 300 / math.sqrt(3)
    regions = feasibility(devs, alloc, radio)
    assert regions.full_empty
    assert regions.inner_empty
    assert regions.outer_empty


def test_feasibility_compact_set_outer_empty(radio):
    devs = make_devices([(0, 0), (10, 0), (0, 10), (10, 10), (5, 5), (3, 7)], [18.8] * 6)
    alloc = qdpa(devs, radio)
    assert alloc.equalized_radius < radio.altitude
    regions = feasibility(devs, alloc, radio)
    assert not regions.full_empty
    assert regions.outer_empty  # every radius below H leaves no outer band


# ---------------------------------------------------------------------------
# solvers


def test_solve_inner_single_device_overhead(radio):
    devs = make_devices([(50.0, 80.0)], [15.0])
    alloc = qdpa(devs, radio)
    regions = feasibility(devs, alloc, radio)
    coeffs = build_surrogate(devs, alloc, (0.0, 0.0), radio)
    sol = solve_inner(devs, alloc, coeffs, regions, radio, SolverConfig())
    assert sol.position == pytest.approx((50.0, 80.0), abs=1e-6)
    assert all(l == 0.0 for l in sol.dual.multipliers.values())
    assert sol.dual.converged


def test_solve_inner_symmetric_pair_midpoint(radio):
    devs = make_devices([(0.0, 0.0), (60.0, 0.0)], [19.5, 19.5])
    alloc = qdpa(devs, radio)
    regions = feasibility(devs, alloc, radio)
    coeffs = build_surrogate(devs, alloc, (30.0, 0.0), radio)
    sol = solve_inner(devs, alloc, coeffs, regions, radio, SolverConfig())
    assert sol.position == pytest.approx((30.0, 0.0), abs=1e-4)


def test_solve_inner_matches_fine_grid(radio):
    """Compact high-demand sets (service radius below H): dual ascent against
    a 0.1 m brute-force maximizer of the same surrogate objective."""
    rng = np.random.default_rng(24)
    cfg = SolverConfig()
    done = 0
    while done < 15:
        m = int(rng.integers(2, 5))
        pts = rng.uniform(0, 60, size=(m, 2))
        devs = make_devices(pts, rng.uniform(18.5, 20.0, size=m))
        alloc = qdpa(devs, radio)
        if alloc is None or alloc.equalized_radius >= radio.altitude:
            continue
        regions = feasibility(devs, alloc, radio)
        if regions.full_empty or regions.inner_empty:
            continue
        coeffs = build_surrogate(devs, alloc, pts.mean(axis=0), radio)
        sol = solve_inner(devs, alloc, coeffs, regions, radio, cfg)

        helper = _Instance(devs, alloc, radio)
        lo = (helper.centers - helper.radii[:, None]).max(axis=0)
        hi = (helper.centers + helper.radii[:, None]).min(axis=0)
        xs = np.arange(lo[0], hi[0] + 0.1, 0.1)
        ys = np.arange(lo[1], hi[1] + 0.1, 0.1)
        X, Y = xs[:, None], ys[None, :]
        mask = np.ones((len(xs), len(ys)), bool)
        score = np.zeros((len(xs), len(ys)))
        for k in range(m):
            d2 = (X - helper.centers[k, 0]) ** 2 + (Y - helper.centers[k, 1]) ** 2
            mask &= d2 <= helper.radii[k] ** 2
            score += coeffs.tau[k] * np.log2(d2 + helper.h2)
        score[~mask] = np.inf
        best = coeffs.const - float(score.min())
        assert sol.surrogate_rate >= best - 1e-3
        done += 1


def test_solve_grid_tangent_disks_forced_point(radio):
    devs = make_devices([(0.0, 0.0), (2 * 82.14479929478705, 0.0)], [15.0, 20.0])
    alloc = qdpa(devs, radio)
    regions = feasibility(devs, alloc, radio)
    coeffs = build_surrogate(devs, alloc, (82.0, 0.0), radio)
    sol = solve_grid(devs, alloc, coeffs, regions, radio, SolverConfig())
    assert sol is not None
    assert sol.position[0] == pytest.approx(82.14479929478705, abs=1.0)
    assert abs(sol.position[1]) <= 1.0


def test_solve_grid_tie_break_lexicographic(radio):
    # degenerate surrogate (zero slope) makes every feasible lattice point tie
    devs = make_devices([(100.0, 100.0)], [15.0])
    alloc = qdpa(devs, radio)
    regions = feasibility(devs, alloc, radio)
    coeffs = SurrogateCoeffs(
        ids=(0,), tau=np.zeros(1), beta=np.ones(1), anchor_snr=np.ones(1), power_term=np.zeros(1),
    )
    cache = _GridCache(regions, SolverConfig())
    sol = solve_grid(devs, alloc, coeffs, regions, radio, SolverConfig(), cache=cache)
    expected = cache.points[0]  # row-major first point = smallest x, then y
    assert sol.position == pytest.approx(tuple(expected), abs=1e-12)
    assert expected[0] == cache.points[:, 0].min()


def test_solve_grid_empty_region(radio):
    devs = make_devices([(0, 0), (300, 0), (150, 260)], [18.0, 18.0, 18.0])
    alloc = qdpa(devs, radio)
    regions = feasibility(devs, alloc, radio)
    sol = solve_grid(devs, alloc, build_surrogate(devs, alloc, (150.0, 90.0), radio), regions, radio, SolverConfig())
    assert sol is None


def test_drmp_single_device(radio):
    devs = make_devices([(700.0, 300.0)], [15.0])
    alloc = qdpa(devs, radio)
    sol = drmp(devs, alloc, (0.0, 0.0), radio, SolverConfig())
    assert sol.position == pytest.approx((700.0, 300.0), abs=1e-9)
    # log2(1 + P_T * eta / H^2), mpmath: 21.9315689299978892
    assert sol.true_rate == pytest.approx(21.931568929997889, rel=1e-12)


def test_drmp_coincident_pair(radio):
    devs = make_devices([(250.0, 250.0), (250.0, 250.0)], [16.0, 16.0])
    alloc = qdpa(devs, radio)
    assert alloc.powers[0] == pytest.approx(5.0, rel=1e-12)
    sol = drmp(devs, alloc, (300.0, 200.0), radio, SolverConfig())
    assert sol.position == pytest.approx((250.0, 250.0), abs=1e-3)


def test_drmp_infeasible_set(radio):
    devs = make_devices([(0, 0), (300, 0), (150, 260)], [18.0, 18.0, 18.0])
    alloc = qdpa(devs, radio)
    assert drmp(devs, alloc, (150.0, 90.0), radio, SolverConfig()) is None


def test_drmp_output_feasible_and_bounded(radio):
    rng = np.random.default_rng(25)
    done = 0
    while done < 30:
        inst = random_instance(rng, radio)
        if inst is None:
            continue
        devs, alloc, regions = inst
        init = rng.uniform(0, 300, size=2)
        sol = drmp(devs, alloc, init, radio, SolverConfig(), regions=regions)
        helper = _Instance(devs, alloc, radio)
        dists = np.sqrt(helper.dist2(sol.position))
        assert np.all(dists <= helper.radii + 1e-6)
        assert sol.true_rate >= sol.surrogate_rate - 1e-9
        assert sol.true_rate >= sum(d.qos_rate for d in devs) - 1e-9
        done += 1


def test_drmp_monotone_from_feasible_start(radio):
    rng = np.random.default_rng(26)
    done = 0
    while done < 20:
        inst = random_instance(rng, radio)
        if inst is None:
            continue
        devs, alloc, regions = inst
        start = regions.full_witness
        helper = _Instance(devs, alloc, radio)
        sol = drmp(devs, alloc, start, radio, SolverConfig(), regions=regions)
        assert sol.true_rate >= helper.true_rate(start) - 1e-9
        done += 1


def test_solver_config_rejects_unknown_keys():
    with pytest.raises(ValueError):
        SolverConfig.from_dict({"grid_step": 1.0, "bogus": 2})
