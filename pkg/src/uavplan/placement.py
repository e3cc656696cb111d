"""Single-UAV position optimization under coverage-disk constraints.

The UAV sum rate is not concave in position. Each device rate log2(1 + z) is
bounded below by its tangent in log-SNR space,

    tau * log2(z) + beta,   tau = z0 / (1 + z0),
                            beta = log2(1 + z0) - tau * log2(z0),

tight at the anchor SNR z0 and a global lower bound (log2(1 + 2^s) is convex
in s). Maximizing the bound over position is equivalent to minimizing
sum_k tau_k * J_k with J_k = log2(dist_k^2 + H^2), which is convex exactly
where every horizontal device distance stays below the altitude H. The solver
splits the feasible set accordingly:

  inner region (all distances < H): Lagrangian dual ascent with a damped
      Newton primal minimizer.
  remainder: lattice search over the constraint-disk intersection plus one
      polish step.

A successive-convex-approximation loop re-anchors the bound at the current
iterate until the true rate stops improving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .model import IotDevice, Point, RadioParams
from .power import PowerAllocation

LN2 = math.log(2.0)


@dataclass(frozen=True)
class SolverConfig:
    """Tunables for the placement solver; all CLI-config deserializable."""

    grid_step: float = 1.0          # lattice pitch, meters
    max_refinements: int = 3        # pitch halvings before trusting the exact test
    sca_tol: float = 1e-4           # stop SCA when true-rate gain drops below, bits
    max_sca_iters: int = 20
    dual_step: float = 1e-2         # c in the diminishing step c / sqrt(t)
    dual_step_auto: bool = True     # scale c by the dual's local curvature
    max_dual_iters: int = 500
    dual_tol: float = 1e-3          # exit when projected residual norm below, m^2
    kkt_tol: float = 1e-5           # complementary-slackness certificate bound
    newton_gtol: float = 1e-8
    max_newton_iters: int = 60
    inner_delta: float = 1e-3       # inner-region radius shrink, meters
    literal_outer_region: bool = False  # fidelity mode: grid searches O only
    continue_scan: bool = False     # ablation: keep scanning candidates after a reject
    local_refine_step: float = 0.1  # final polish lattice pitch, meters
    local_refine_window: float = 2.0  # half-width of the polish window, meters

    @classmethod
    def from_dict(cls, raw: dict) -> "SolverConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown solver config keys: {sorted(unknown)}")
        return cls(**raw)


@dataclass(frozen=True)
class SurrogateCoeffs:
    """Tangent-bound coefficients for one served set, anchored at one position."""

    ids: tuple[int, ...]
    tau: np.ndarray        # slope per device, z0/(1+z0)
    beta: np.ndarray       # intercept per device, bits
    anchor_snr: np.ndarray
    power_term: np.ndarray  # log2(P_k * eta) per device

    @property
    def const(self) -> float:
        """Position-independent part of the bound: sum tau*log2(P eta) + beta."""
        return float(np.dot(self.tau, self.power_term) + self.beta.sum())


@dataclass
class DualState:
    """Diagnostics of one Lagrangian dual-ascent run (KKT certificate)."""

    multipliers: dict[int, float]
    step_size: float
    iterations: int
    subgradient_norm: float
    stationarity: float            # |grad L| at exit
    max_violation: float           # max_k (dist_k^2 - radius_k^2), m^2
    complementary_slackness: float  # max_k |lambda_k * residual_k|
    converged: bool


@dataclass(frozen=True)
class PlacementSolution:
    """Optimized UAV position with both the bound value and the true rate."""

    position: Point
    surrogate_rate: float
    true_rate: float
    path: str  # "inner-lagrange" | "outer-grid" | "mixed-grid"
    sca_iterations: int = 0
    dual: Optional[DualState] = None
    converged: bool = True


@dataclass
class FeasibleRegions:
    """Constraint disks of one served set plus exact emptiness verdicts.

    The full feasible set is the intersection of disks (center u_k, radius
    radii[k]); the inner region shrinks each radius to min(radius, H - delta)
    so the convexity precondition holds uniformly. Emptiness of both is
    decided by the exact minimax test in intersect_disks. The outer region
    (every distance in [H, radius]) is an annulus intersection; its flag is
    decided analytically where possible, otherwise by lattice scan.
    """

    ids: tuple[int, ...]
    centers: np.ndarray      # (m, 2)
    radii: np.ndarray        # (m,)
    inner_radii: np.ndarray  # (m,)
    altitude: float
    full_empty: bool
    inner_empty: bool
    full_witness: Optional[np.ndarray]
    inner_witness: Optional[np.ndarray]
    scan_step: float = 1.0
    _outer_empty: Optional[bool] = field(default=None, repr=False)

    @property
    def outer_empty(self) -> bool:
        if self._outer_empty is None:
            self._outer_empty = self._decide_outer_empty()
        return self._outer_empty

    def _decide_outer_empty(self) -> bool:
        H = self.altitude
        if self.full_empty or bool(np.any(self.radii < H)):
            return True
        # Cheap probes first: the full-set witness, then each disk center.
        probes = [self.full_witness] if self.full_witness is not None else []
        probes.extend(self.centers)
        for p in probes:
            d2 = np.sum((self.centers - np.asarray(p)) ** 2, axis=1)
            if np.all(d2 >= H * H) and np.all(d2 <= self.radii**2):
                return False
        found, _ = _scan_region(
            self.centers, self.radii, H, mode="outer",
            step=self.scan_step, max_refinements=3,
        )
        return not found


# ---------------------------------------------------------------------------
# geometry helpers


def _as_matrix(served: Iterable[IotDevice]) -> tuple[tuple[int, ...], np.ndarray]:
    devs = sorted(served, key=lambda d: d.id)
    ids = tuple(d.id for d in devs)
    centers = np.array([[d.x, d.y] for d in devs], dtype=float)
    return ids, centers


def log_dist_hessian(uav_pos, dev_pos, altitude: float) -> np.ndarray:
    """2x2 Hessian of J = log2(|v - u|^2 + H^2) with respect to v."""
    dx = uav_pos[0] - dev_pos[0]
    dy = uav_pos[1] - dev_pos[1]
    d4 = (dx * dx + dy * dy + altitude * altitude) ** 2
    t11 = 2.0 * (-dx * dx + dy * dy + altitude * altitude) / (LN2 * d4)
    t22 = 2.0 * (dx * dx - dy * dy + altitude * altitude) / (LN2 * d4)
    t12 = -4.0 * dx * dy / (LN2 * d4)
    return np.array([[t11, t12], [t12, t22]])


def log_dist_hessian_det(uav_pos, dev_pos, altitude: float) -> float:
    """Closed-form Hessian determinant 4*(H^4 - q^2)/(ln2 * D^4)^2, q = |v-u|^2."""
    dx = uav_pos[0] - dev_pos[0]
    dy = uav_pos[1] - dev_pos[1]
    q = dx * dx + dy * dy
    d4 = (q + altitude * altitude) ** 2
    return 4.0 * (altitude**4 - q * q) / (LN2 * d4) ** 2


def convexity_check(regions: FeasibleRegions, radio: RadioParams) -> bool:
    """True iff every constraint radius is below H, making the restricted
    minimization of sum tau_k * J_k strictly convex on the feasible set."""
    return bool(np.all(regions.radii < radio.altitude))


def intersect_disks(
    centers: np.ndarray,
    radii: np.ndarray,
    tangent_tol: float = 1e-9,
) -> tuple[bool, np.ndarray]:
    """Exact emptiness test for an intersection of disks.

    Minimizes f(v) = max_k(|v - u_k|^2 - radius_k^2); the intersection is
    non-empty iff the minimum is <= 0. Every piece of the max shares the
    Hessian 2I, so f = |v|^2 + max of linear pieces and the minimizer has at
    most three active pieces with v* inside the convex hull of their centers.
    That leaves a closed-form enumeration: each center (one active piece),
    each pair's equal-power point on the center segment, and each triple's
    radical center when it falls inside the center triangle. Every candidate
    upper-bounds f*, and the true optimum's active set always generates the
    optimum itself, so the minimum over candidates is exact.

    Returns (non_empty, point); the point is a feasible witness when
    non-empty, else the minimizing point found.
    """
    centers = np.asarray(centers, dtype=float)
    radii = np.asarray(radii, dtype=float)
    r2 = radii**2
    m = len(centers)

    def f_at(v: np.ndarray) -> float:
        return float((np.sum((centers - v) ** 2, axis=1) - r2).max())

    best_f = math.inf
    best_v = centers[0]

    def consider(v: np.ndarray) -> None:
        nonlocal best_f, best_v
        val = f_at(v)
        if val < best_f:
            best_f, best_v = val, v

    for k in range(m):
        consider(centers[k])
    for i in range(m):
        for j in range(i + 1, m):
            seg = centers[j] - centers[i]
            L2 = float(np.dot(seg, seg))
            if L2 == 0.0:
                continue
            beta = (L2 + r2[i] - r2[j]) / (2.0 * L2)
            if 0.0 <= beta <= 1.0:
                consider(centers[i] + beta * seg)
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(j + 1, m):
                v = _radical_center(centers[i], centers[j], centers[k], r2[i], r2[j], r2[k])
                if v is not None and _in_triangle(v, centers[i], centers[j], centers[k]):
                    consider(v)
    return best_f <= tangent_tol, best_v


def _radical_center(ui, uj, uk, ri2, rj2, rk2) -> Optional[np.ndarray]:
    """Point where all three powers |v-u|^2 - r^2 coincide (two radical axes)."""
    a = 2.0 * np.array([uj - ui, uk - uj])
    b = np.array([
        np.dot(uj, uj) - np.dot(ui, ui) - rj2 + ri2,
        np.dot(uk, uk) - np.dot(uj, uj) - rk2 + rj2,
    ])
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if abs(det) < 1e-12 * (np.abs(a).max() ** 2 + 1.0):
        return None
    return np.array([
        (b[0] * a[1, 1] - a[0, 1] * b[1]) / det,
        (a[0, 0] * b[1] - b[0] * a[1, 0]) / det,
    ])


def _in_triangle(v, p0, p1, p2, tol: float = 1e-12) -> bool:
    d = np.array([p1 - p0, p2 - p0]).T
    det = d[0, 0] * d[1, 1] - d[0, 1] * d[1, 0]
    if abs(det) < tol:
        return False
    rhs = v - p0
    s = (d[1, 1] * rhs[0] - d[0, 1] * rhs[1]) / det
    t = (-d[1, 0] * rhs[0] + d[0, 0] * rhs[1]) / det
    return s >= -tol and t >= -tol and s + t <= 1.0 + tol


def _scan_region(
    centers: np.ndarray,
    radii: np.ndarray,
    altitude: float,
    mode: str,
    step: float,
    max_refinements: int,
) -> tuple[bool, Optional[np.ndarray]]:
    """Lattice probe for a non-convex sub-region of the feasible set.

    mode "outer": every distance in [H, radius]. mode "mixed": inside every
    disk and at least one distance >= H. Returns (found, point).
    """
    lo = np.max(centers - radii[:, None], axis=0)
    hi = np.min(centers + radii[:, None], axis=0)
    if np.any(hi < lo):
        return False, None
    pitch = step
    for _ in range(max_refinements + 1):
        xs = lo[0] + pitch * np.arange(int((hi[0] - lo[0]) / pitch) + 1)
        ys = lo[1] + pitch * np.arange(int((hi[1] - lo[1]) / pitch) + 1)
        mask = _region_mask(xs, ys, centers, radii, altitude, mode)
        if mask.any():
            i, j = np.unravel_index(int(mask.argmax()), mask.shape)
            return True, np.array([xs[i], ys[j]])
        pitch /= 2.0
    return False, None


def _region_mask(xs, ys, centers, radii, altitude, mode) -> np.ndarray:
    """Boolean (len(xs), len(ys)) mask of lattice points in the region."""
    H2 = altitude * altitude
    X = xs[:, None]
    Y = ys[None, :]
    inside_all = np.ones((len(xs), len(ys)), dtype=bool)
    beyond_any = np.zeros_like(inside_all)
    beyond_all = np.ones_like(inside_all)
    for (ax, ay), rad in zip(centers, radii):
        d2 = (X - ax) ** 2 + (Y - ay) ** 2
        inside_all &= d2 <= rad * rad
        beyond_any |= d2 >= H2
        beyond_all &= d2 >= H2
    if mode == "outer":
        return inside_all & beyond_all
    if mode == "mixed":
        return inside_all & beyond_any
    raise ValueError(mode)


# ---------------------------------------------------------------------------
# public operations


def build_surrogate(
    served: Iterable[IotDevice],
    allocation: PowerAllocation,
    anchor_pos,
    radio: RadioParams,
) -> SurrogateCoeffs:
    """Anchor the tangent bound at the SNRs achieved at anchor_pos.

    At the anchor the bound equals the true rate exactly; everywhere else it
    is a strict lower bound.
    """
    ids, centers = _as_matrix(served)
    powers = np.array([allocation.powers[i] for i in ids])
    d2 = np.sum((centers - np.asarray(anchor_pos, dtype=float)) ** 2, axis=1)
    z0 = powers * radio.gain_to_noise / (d2 + radio.altitude**2)
    tau = z0 / (1.0 + z0)
    beta = np.log2(1.0 + z0) - tau * np.log2(z0)
    return SurrogateCoeffs(
        ids=ids,
        tau=tau,
        beta=beta,
        anchor_snr=z0,
        power_term=np.log2(powers * radio.gain_to_noise),
    )


def feasibility(
    served: Iterable[IotDevice],
    allocation: PowerAllocation,
    radio: RadioParams,
    inner_delta: float = 1e-3,
    scan_step: float = 1.0,
) -> FeasibleRegions:
    """Build the constraint disks and decide emptiness of the regions."""
    ids, centers = _as_matrix(served)
    service = allocation.service_radii
    radii = np.array([service[i] for i in ids])
    inner_radii = np.minimum(radii, radio.altitude - inner_delta)

    full_nonempty, full_pt = intersect_disks(centers, radii)
    if np.any(inner_radii <= 0.0):
        inner_nonempty, inner_pt = False, None
    else:
        inner_nonempty, inner_pt = intersect_disks(centers, inner_radii)
    return FeasibleRegions(
        ids=ids,
        centers=centers,
        radii=radii,
        inner_radii=inner_radii,
        altitude=radio.altitude,
        full_empty=not full_nonempty,
        inner_empty=not inner_nonempty,
        full_witness=full_pt if full_nonempty else None,
        inner_witness=inner_pt if inner_nonempty else None,
        scan_step=scan_step,
    )


class _Instance:
    """Array view of one served set used by the solvers and rate evaluators."""

    def __init__(self, served: Iterable[IotDevice], allocation: PowerAllocation, radio: RadioParams):
        self.ids, self.centers = _as_matrix(served)
        self.powers = np.array([allocation.powers[i] for i in self.ids])
        service = allocation.service_radii
        self.radii = np.array([service[i] for i in self.ids])
        self.radio = radio
        self.h2 = radio.altitude**2
        self.snr_num = self.powers * radio.gain_to_noise  # P_k * eta

    def dist2(self, pos) -> np.ndarray:
        return np.sum((self.centers - np.asarray(pos, dtype=float)) ** 2, axis=1)

    def true_rate(self, pos) -> float:
        return float(np.sum(np.log2(1.0 + self.snr_num / (self.dist2(pos) + self.h2))))

    def surrogate_rate(self, coeffs: SurrogateCoeffs, pos) -> float:
        j = np.log2(self.dist2(pos) + self.h2)
        return coeffs.const - float(np.dot(coeffs.tau, j))

    def feasible(self, pos, slack: float = 0.0) -> bool:
        return bool(np.all(self.dist2(pos) <= (self.radii + slack) ** 2))


def _project_onto_disks(
    pos: np.ndarray,
    centers: np.ndarray,
    radii: np.ndarray,
    anchor: Optional[np.ndarray] = None,
    iters: int = 100,
) -> np.ndarray:
    """Move pos into the disk intersection (cyclic projection onto the most
    violated disk; if that stalls, bisect toward a known feasible anchor)."""
    v = np.array(pos, dtype=float)
    for _ in range(iters):
        delta = v - centers
        dist = np.hypot(delta[:, 0], delta[:, 1])
        viol = dist - radii
        k = int(np.argmax(viol))
        if viol[k] <= 0.0:
            return v
        v = centers[k] + delta[k] * (radii[k] / dist[k])
    if anchor is not None:
        lo, hi = 0.0, 1.0  # blend factor toward the strictly feasible anchor
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            cand = v + mid * (anchor - v)
            d = np.hypot(*(cand - centers).T)
            if np.all(d <= radii):
                hi = mid
            else:
                lo = mid
        v = v + hi * (anchor - v)
    return v


def _lagrangian_parts(v, centers, tau, lam, h2):
    """Value, gradient, Hessian of L = sum tau*J + sum lam*(q - rho^2) + const."""
    delta = v - centers
    q = np.sum(delta**2, axis=1)
    d2 = q + h2
    val = float(np.dot(tau, np.log2(d2)) + np.dot(lam, q))
    w = 2.0 * tau / (LN2 * d2) + 2.0 * lam
    grad = w @ delta
    hess = np.eye(2) * w.sum()
    c = -4.0 * tau / (LN2 * d2 * d2)
    hess += (delta * c[:, None]).T @ delta
    return val, grad, hess


def _newton_minimize(v0, centers, tau, lam, h2, gtol, max_iters):
    """Damped Newton with Armijo backtracking; gradient fallback off the
    convex region (Hessian made positive definite by a ridge)."""
    v = np.array(v0, dtype=float)
    val, grad, hess = _lagrangian_parts(v, centers, tau, lam, h2)
    for _ in range(max_iters):
        gnorm = float(np.hypot(grad[0], grad[1]))
        if gnorm <= gtol:
            break
        tr = hess[0, 0] + hess[1, 1]
        det = hess[0, 0] * hess[1, 1] - hess[0, 1] * hess[1, 0]
        if det <= 1e-18 or tr <= 0.0:
            ridge = abs(min(0.0, 0.5 * (tr - math.sqrt(max(tr * tr - 4 * det, 0.0))))) + 1e-9
            hess = hess + ridge * np.eye(2)
            det = hess[0, 0] * hess[1, 1] - hess[0, 1] * hess[1, 0]
        step = np.array([
            hess[1, 1] * grad[0] - hess[0, 1] * grad[1],
            -hess[1, 0] * grad[0] + hess[0, 0] * grad[1],
        ]) / det
        alpha = 1.0
        for _ in range(40):
            cand = v - alpha * step
            cval, cgrad, chess = _lagrangian_parts(cand, centers, tau, lam, h2)
            if cval <= val - 1e-4 * alpha * float(np.dot(grad, step)):
                v, val, grad, hess = cand, cval, cgrad, chess
                break
            alpha *= 0.5
        else:
            break
    return v, float(np.hypot(grad[0], grad[1]))


def _dual_curvature(v, centers, tau, lam, h2) -> float:
    """Local Lipschitz constant of the dual gradient at the current primal
    minimizer: lambda_max(G H^-1 G^T) with G the constraint gradients
    2(v - u_k) and H the primal Hessian (clamped positive definite)."""
    _, _, hess = _lagrangian_parts(v, centers, tau, lam, h2)
    tr = hess[0, 0] + hess[1, 1]
    det = hess[0, 0] * hess[1, 1] - hess[0, 1] * hess[1, 0]
    lmin = 0.5 * (tr - math.sqrt(max(tr * tr - 4.0 * det, 0.0)))
    if lmin <= 1e-15:
        hess = hess + (1e-15 - lmin) * np.eye(2)
        det = hess[0, 0] * hess[1, 1] - hess[0, 1] * hess[1, 0]
    hinv = np.array([[hess[1, 1], -hess[0, 1]], [-hess[1, 0], hess[0, 0]]]) / det
    grads = 2.0 * (v - centers)
    dual_hess = grads @ hinv @ grads.T
    return float(np.linalg.eigvalsh(dual_hess)[-1])


def solve_inner(
    served: Iterable[IotDevice],
    allocation: PowerAllocation,
    coeffs: SurrogateCoeffs,
    regions: FeasibleRegions,
    radio: RadioParams,
    cfg: SolverConfig,
) -> Optional[PlacementSolution]:
    """Dual subgradient ascent over the (convex) inner region.

    Alternates an exact primal minimization of the Lagrangian with the
    projected multiplier update lam_k <- max(0, lam_k + eps_t * residual_k),
    eps_t = c / sqrt(t), until the projected residual norm drops below
    dual_tol. By default c is rescaled each iteration by the dual's local
    curvature |G H^-1 G^T| (residuals are in m^2 while the multipliers sit
    near 1e-4, so any fixed c either overshoots or crawls); set
    dual_step_auto=False to use the raw configured constant. Returns None
    when the inner region is empty; a non-converged run returns the best
    feasible iterate flagged converged=False.
    """
    if regions.inner_empty:
        return None
    inst = _Instance(served, allocation, radio)
    rho2 = regions.inner_radii**2
    m = len(inst.ids)
    lam = np.zeros(m)

    v = np.array(regions.inner_witness, dtype=float)
    best_feasible: Optional[tuple[float, np.ndarray]] = None
    eps = cfg.dual_step
    subgrad_norm = math.inf
    converged = False
    iterations = 0
    stationarity = math.inf

    for t in range(1, cfg.max_dual_iters + 1):
        iterations = t
        v, stationarity = _newton_minimize(
            v, inst.centers, coeffs.tau, lam, inst.h2, cfg.newton_gtol, cfg.max_newton_iters
        )
        residual = inst.dist2(v) - rho2
        projected = np.where(lam > 0.0, residual, np.maximum(residual, 0.0))
        subgrad_norm = float(np.linalg.norm(projected))
        if np.all(residual <= 0.0):
            sval = inst.surrogate_rate(coeffs, v)
            if best_feasible is None or sval > best_feasible[0]:
                best_feasible = (sval, v.copy())
        if subgrad_norm < cfg.dual_tol:
            converged = True
            break
        if cfg.dual_step_auto:
            # dual_step in units of the safe 1/curvature step (default maps to
            # it exactly); no time decay is needed: with an exact primal solve
            # the dual is smooth, so constant 1/L projected ascent converges.
            curv = max(_dual_curvature(v, inst.centers, coeffs.tau, lam, inst.h2), 1e-12)
            eps = (cfg.dual_step / 1e-2) / curv
        else:
            eps = cfg.dual_step / math.sqrt(t)
        lam = np.maximum(0.0, lam + eps * residual)

    exit_v = v if converged or best_feasible is None else best_feasible[1]
    exit_v = _project_onto_disks(exit_v, regions.centers, regions.inner_radii,
                                 anchor=np.asarray(regions.inner_witness))
    residual = inst.dist2(exit_v) - rho2
    dual = DualState(
        multipliers={i: float(l) for i, l in zip(inst.ids, lam)},
        step_size=eps,
        iterations=iterations,
        subgradient_norm=subgrad_norm,
        stationarity=stationarity,
        max_violation=float(residual.max()),
        complementary_slackness=float(np.abs(lam * residual).max()),
        converged=converged,
    )
    return PlacementSolution(
        position=(float(exit_v[0]), float(exit_v[1])),
        surrogate_rate=inst.surrogate_rate(coeffs, exit_v),
        true_rate=inst.true_rate(exit_v),
        path="inner-lagrange",
        dual=dual,
        converged=converged,
    )


class _GridCache:
    """Feasible lattice points and per-device J values, reusable across the
    SCA iterations of one drmp call (the lattice depends only on the disks)."""

    def __init__(self, regions: FeasibleRegions, cfg: SolverConfig):
        self.regions = regions
        self.cfg = cfg
        mode = "outer" if cfg.literal_outer_region else "mixed"
        self.mode = mode
        self.points: Optional[np.ndarray] = None  # (n, 2)
        self.j_stack: Optional[np.ndarray] = None  # (n, m) float32
        self.region_empty = False
        self._build()

    def _build(self) -> None:
        reg = self.regions
        if np.all(reg.radii < reg.altitude):
            self.region_empty = True  # feasible set entirely inside the inner region
            return
        pitch = self.cfg.grid_step
        for _ in range(self.cfg.max_refinements + 1):
            pts = self._lattice(pitch)
            if pts is not None and len(pts):
                self.points = pts
                break
            pitch /= 2.0
        if self.points is None:
            # Lattice found nothing; fall back on the exact witness (thin or
            # single-point regions, e.g. tangent disks).
            if reg.full_witness is not None:
                w = np.asarray(reg.full_witness)
                d2 = np.sum((reg.centers - w) ** 2, axis=1)
                h2 = reg.altitude**2
                in_region = np.all(d2 >= h2) if self.mode == "outer" else np.any(d2 >= h2)
                if in_region:
                    self.points = w[None, :]
            if self.points is None:
                self.region_empty = True
                return
        d2 = self._dist2_stack(self.points)
        self.j_stack = np.log2(d2 + reg.altitude**2).astype(np.float32)

    def _lattice(self, pitch: float) -> Optional[np.ndarray]:
        reg = self.regions
        lo = np.max(reg.centers - reg.radii[:, None], axis=0)
        hi = np.min(reg.centers + reg.radii[:, None], axis=0)
        if np.any(hi < lo):
            return None
        xs = lo[0] + pitch * np.arange(int((hi[0] - lo[0]) / pitch) + 1)
        ys = lo[1] + pitch * np.arange(int((hi[1] - lo[1]) / pitch) + 1)
        mask = _region_mask(xs, ys, reg.centers, reg.radii, reg.altitude, self.mode)
        if not mask.any():
            return None
        ii, jj = np.nonzero(mask)  # row-major: ties break on smallest x then y
        return np.column_stack([xs[ii], ys[jj]])

    def _dist2_stack(self, pts: np.ndarray) -> np.ndarray:
        reg = self.regions
        out = np.empty((len(pts), len(reg.centers)))
        for k, (ax, ay) in enumerate(reg.centers):
            out[:, k] = (pts[:, 0] - ax) ** 2 + (pts[:, 1] - ay) ** 2
        return out

    def in_region(self, pos) -> bool:
        reg = self.regions
        d2 = np.sum((reg.centers - np.asarray(pos)) ** 2, axis=1)
        if np.any(d2 > reg.radii**2):
            return False
        h2 = reg.altitude**2
        return bool(np.all(d2 >= h2)) if self.mode == "outer" else bool(np.any(d2 >= h2))


def solve_grid(
    served: Iterable[IotDevice],
    allocation: PowerAllocation,
    coeffs: SurrogateCoeffs,
    regions: FeasibleRegions,
    radio: RadioParams,
    cfg: SolverConfig,
    cache: Optional[_GridCache] = None,
) -> Optional[PlacementSolution]:
    """Lattice search over the feasible set outside the inner region.

    Evaluates the surrogate objective at every feasible lattice point (pitch
    cfg.grid_step, halved up to cfg.max_refinements times when a thin region
    is missed), takes the best point (ties broken lexicographically by x then
    y), and applies one Newton polish step kept only if it stays feasible and
    improves. Returns None when the searched region is confirmed empty.
    """
    if cache is None:
        cache = _GridCache(regions, cfg)
    if cache.region_empty:
        return None
    inst = _Instance(served, allocation, radio)
    tau32 = coeffs.tau.astype(np.float32)
    scores = cache.j_stack @ tau32  # minimize sum tau_k * J_k
    best_idx = int(np.argmin(scores))
    v = cache.points[best_idx].astype(float)

    obj = float(np.dot(coeffs.tau, np.log2(inst.dist2(v) + inst.h2)))
    _, grad, hess = _lagrangian_parts(v, inst.centers, coeffs.tau, np.zeros(len(inst.ids)), inst.h2)
    det = hess[0, 0] * hess[1, 1] - hess[0, 1] * hess[1, 0]
    if det > 1e-18 and hess[0, 0] > 0.0:
        step = np.array([
            hess[1, 1] * grad[0] - hess[0, 1] * grad[1],
            -hess[1, 0] * grad[0] + hess[0, 0] * grad[1],
        ]) / det
        cand = _project_onto_disks(v - step, regions.centers, regions.radii,
                                   anchor=regions.full_witness)
        if cache.in_region(cand):
            cand_obj = float(np.dot(coeffs.tau, np.log2(inst.dist2(cand) + inst.h2)))
            if cand_obj < obj:
                v = cand
    return PlacementSolution(
        position=(float(v[0]), float(v[1])),
        surrogate_rate=inst.surrogate_rate(coeffs, v),
        true_rate=inst.true_rate(v),
        path="outer-grid" if cfg.literal_outer_region else "mixed-grid",
    )


def _local_refine(inst: _Instance, pos: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    """Fine lattice sweep of the true rate in a small window around pos,
    masked to the full feasible set. Recovers the sub-grid-step accuracy a
    boundary-constrained optimum loses to the coarse lattice."""
    w = cfg.local_refine_window
    step = cfg.local_refine_step
    n = int(w / step)
    offs = step * np.arange(-n, n + 1)
    X = pos[0] + offs[:, None]
    Y = pos[1] + offs[None, :]
    shape = (len(offs), len(offs))
    mask = np.ones(shape, dtype=bool)
    rate = np.zeros(shape)
    for k, (ax, ay) in enumerate(inst.centers):
        d2 = (X - ax) ** 2 + (Y - ay) ** 2
        mask &= d2 <= inst.radii[k] ** 2
        rate += np.log2(1.0 + inst.snr_num[k] / (d2 + inst.h2))
    rate[~mask] = -np.inf
    i, j = np.unravel_index(int(np.argmax(rate)), rate.shape)
    best = np.array([X[i, 0], Y[0, j]])
    if inst.true_rate(best) > inst.true_rate(pos) and inst.feasible(best, slack=0.0):
        return best
    return pos


def drmp(
    served: Iterable[IotDevice],
    allocation: PowerAllocation,
    init_pos,
    radio: RadioParams,
    cfg: Optional[SolverConfig] = None,
    regions: Optional[FeasibleRegions] = None,
) -> Optional[PlacementSolution]:
    """Position one UAV to maximize its sum rate over its served set.

    Successive convex approximation: anchor the tangent bound at the current
    position, solve the convex subproblem (inner Lagrange when every radius is
    below H, otherwise the better of the inner solution and the lattice search
    over the remainder), re-anchor, repeat until the true rate gain falls
    below sca_tol. Returns None when the feasible set is empty.
    """
    cfg = cfg or SolverConfig()
    devs = sorted(served, key=lambda d: d.id)
    inst = _Instance(devs, allocation, radio)

    if len(devs) == 1:
        u = devs[0].position
        rate = inst.true_rate(u)
        return PlacementSolution(
            position=(float(u[0]), float(u[1])),
            surrogate_rate=rate,
            true_rate=rate,
            path="inner-lagrange",
            sca_iterations=0,
        )

    if regions is None:
        regions = feasibility(devs, allocation, radio, inner_delta=cfg.inner_delta, scan_step=cfg.grid_step)
    if regions.full_empty:
        return None

    use_grid = bool(np.any(regions.radii >= radio.altitude))
    cache = _GridCache(regions, cfg) if use_grid else None

    anchor = np.asarray(init_pos, dtype=float)
    anchor_feasible = inst.feasible(anchor)
    best: Optional[PlacementSolution] = None
    prev_rate = -math.inf
    iters = 0
    for iters in range(1, cfg.max_sca_iters + 1):
        coeffs = build_surrogate(devs, allocation, anchor, radio)
        candidates: list[PlacementSolution] = []
        inner = solve_inner(devs, allocation, coeffs, regions, radio, cfg)
        if inner is not None:
            candidates.append(inner)
        if use_grid:
            grid = solve_grid(devs, allocation, coeffs, regions, radio, cfg, cache=cache)
            if grid is not None:
                candidates.append(grid)
        if anchor_feasible:
            candidates.append(PlacementSolution(
                position=(float(anchor[0]), float(anchor[1])),
                surrogate_rate=inst.surrogate_rate(coeffs, anchor),
                true_rate=inst.true_rate(anchor),
                path=best.path if best is not None else "inner-lagrange",
                dual=best.dual if best is not None else None,
                converged=best.converged if best is not None else True,
            ))
        if not candidates:
            return None
        chosen = max(candidates, key=lambda s: s.surrogate_rate)
        if best is None or chosen.true_rate >= best.true_rate:
            best = chosen
        gain = chosen.true_rate - prev_rate
        prev_rate = chosen.true_rate
        anchor = np.asarray(chosen.position, dtype=float)
        anchor_feasible = True
        if gain < cfg.sca_tol:
            break

    assert best is not None
    refined = _local_refine(inst, np.asarray(best.position, dtype=float), cfg)
    if not np.array_equal(refined, np.asarray(best.position)):
        coeffs = build_surrogate(devs, allocation, refined, radio)
        best = PlacementSolution(
            position=(float(refined[0]), float(refined[1])),
            surrogate_rate=inst.surrogate_rate(coeffs, refined),
            true_rate=inst.true_rate(refined),
            path=best.path,
            dual=best.dual,
            converged=best.converged,
        )
    return PlacementSolution(
        position=best.position,
        surrogate_rate=best.surrogate_rate,
        true_rate=best.true_rate,
        path=best.path,
        sca_iterations=iters,
        dual=best.dual,
        converged=best.converged,
    )
