"""Independent brute-force reference implementations.

Everything here validates the closed-form solvers and the optimizer by a
different route: object placements are recovered by numeric root-finding on
the raw contact constraints and angles are measured directly off the
recovered geometry. No solver code is shared with the main path beyond
primitive vector arithmetic. Single-threaded by design.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, getcontext

import numpy as np

from .geom import SphereFingertip
from .grasp import ANGLE_SLACK, GraspRequirements, is_valid_grasp
from .kinematics import HandModel, Trajectory
from .manip import WidthInterval, manipulation_range
from .optimizer import (
    OptimizationResult,
    SearchGrid,
    TopEntry,
    enumerate_grid,
)

_BISECT_ITERS = 80


def _clamp(v: float) -> float:
    return min(1.0, max(-1.0, v))


def _o_angle(u, v) -> float:
    """Angle between two vectors, plain arithmetic."""
    nu = math.sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2])
    nv = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    dot = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]) / (nu * nv)
    return math.acos(_clamp(dot))


# ---------------------------------------------------------------------------
# Two-finger contact placement
# ---------------------------------------------------------------------------

def oracle_contact_angle(tip_a: SphereFingertip, tip_b: SphereFingertip,
                         object_radius: float, samples: int = 2000) -> float | None:
    """Contact angle measured off a numerically recovered object placement.

    The object centre is parametrized in a plane through both tip centres
    and located by scanning `samples` candidate offsets for a sign change of
    the second contact residual, then bisecting. Returns None when no
    placement satisfies both contact constraints.
    """
    if samples < 10:
        raise ValueError("need at least 10 scan samples")
    pa = np.asarray(tip_a.center, dtype=float)
    pb = np.asarray(tip_b.center, dtype=float)
    d = math.sqrt(float(np.sum((pb - pa) ** 2)))
    if d <= 0:
        return None
    ua = object_radius + tip_a.radius
    ub = object_radius + tip_b.radius

    u_hat = (pb - pa) / d
    helper = np.array([1.0, 0.0, 0.0])
    if abs(float(np.dot(helper, u_hat))) > 0.9:
        helper = np.array([0.0, 1.0, 0.0])
    v_hat = np.cross(u_hat, helper)
    v_hat = v_hat / math.sqrt(float(np.sum(v_hat**2)))

    def residual(s: float) -> float:
        # candidate centre at in-plane offset (s, t(s)); residual of contact b
        t_sq = ua * ua - s * s
        t = math.sqrt(max(0.0, t_sq))
        return math.hypot(s - d, t) - ub

    s_grid = np.linspace(-ua, ua, samples)
    res = [residual(float(s)) for s in s_grid]
    bracket = None
    for k in range(samples - 1):
        if res[k] == 0.0:
            bracket = (float(s_grid[k]), float(s_grid[k]))
            break
        if res[k] > 0.0 > res[k + 1] or res[k] < 0.0 < res[k + 1]:
            bracket = (float(s_grid[k]), float(s_grid[k + 1]))
            break
    if bracket is None:
        if res[-1] == 0.0:
            bracket = (float(s_grid[-1]), float(s_grid[-1]))
        else:
            return None

    lo, hi = bracket
    f_lo = residual(lo)
    for _ in range(_BISECT_ITERS):
        mid = (lo + hi) / 2.0
        f_mid = residual(mid)
        if (f_lo <= 0.0) == (f_mid <= 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    s_root = (lo + hi) / 2.0
    t_root = math.sqrt(max(0.0, ua * ua - s_root * s_root))
    center = pa + s_root * u_hat + t_root * v_hat
    return _o_angle(pa - center, pb - center)


def oracle_r_max(d: float, r_a: float, r_b: float, theta_min: float,
                 radius_step: float = 0.5, cap: float = 500.0) -> float | None:
    """Largest theta-admissible radius by grid scan + bisection.

    Scans object radii on `radius_step`, measuring the contact angle off the
    recovered placement each time, and refines the theta(R) = theta_min
    crossing by bisection. The angle must decrease along the scan.
    """
    tip_a = SphereFingertip(np.zeros(3), r_a)
    tip_b = SphereFingertip(np.array([d, 0.0, 0.0]), r_b)

    def theta(radius: float) -> float | None:
        return oracle_contact_angle(tip_a, tip_b, radius, samples=200)

    last_ok = None
    first_bad = None
    prev_theta = None
    for r in np.arange(0.0, cap + radius_step, radius_step):
        th = theta(float(r))
        if th is None:
            continue
        if prev_theta is not None:
            assert th <= prev_theta + 1e-9, "contact angle must decrease with R"
        prev_theta = th
        if th >= theta_min - ANGLE_SLACK:
            last_ok = float(r)
        else:
            first_bad = float(r)
            break
    if last_ok is None:
        return None
    if first_bad is None:
        return float(cap)

    lo, hi = last_ok, first_bad
    for _ in range(_BISECT_ITERS):
        mid = (lo + hi) / 2.0
        th = theta(mid)
        if th is not None and th >= theta_min - ANGLE_SLACK:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


# ---------------------------------------------------------------------------
# Vectorized placement helpers (same independent arithmetic, many at once)
# ---------------------------------------------------------------------------

def _theta_batch(d: np.ndarray, r_a: float, r_b: float,
                 radius: np.ndarray) -> np.ndarray:
    """Contact angles for many (distance, radius) pairs; NaN = infeasible.

    Per pair, the object centre is recovered by bisection on its in-plane
    offset (tip a at the origin, tip b at (d, 0)) and the angle is measured
    off the recovered placement.
    """
    d = np.asarray(d, dtype=float)
    radius = np.broadcast_to(np.asarray(radius, dtype=float), d.shape).astype(float)
    ua = radius + r_a
    ub = radius + r_b
    feasible = (d > 0) & (ua + d >= ub) & (np.abs(ua - d) <= ub)

    lo = -ua.copy()
    hi = ua.copy()

    def residual(s):
        t_sq = np.maximum(0.0, ua * ua - s * s)
        return np.hypot(s - d, np.sqrt(t_sq)) - ub

    f_lo = residual(lo)
    for _ in range(_BISECT_ITERS):
        mid = (lo + hi) / 2.0
        f_mid = residual(mid)
        same = (f_lo <= 0.0) == (f_mid <= 0.0)
        lo = np.where(same, mid, lo)
        f_lo = np.where(same, f_mid, f_lo)
        hi = np.where(same, hi, mid)
    s = (lo + hi) / 2.0
    t = np.sqrt(np.maximum(0.0, ua * ua - s * s))

    ax, ay = -s, -t
    bx, by = d - s, -t
    dot = ax * bx + ay * by
    norms = np.hypot(ax, ay) * np.hypot(bx, by)
    with np.errstate(invalid="ignore", divide="ignore"):
        theta = np.arccos(np.clip(dot / norms, -1.0, 1.0))
    return np.where(feasible, theta, np.nan)


def _batch_r_max(d: np.ndarray, r_a: float, r_b: float, theta_min: float,
                 cap: float) -> np.ndarray:
    """Per-distance largest theta-admissible radius by nested bisection."""
    d = np.asarray(d, dtype=float)
    r_floor = np.maximum(0.0, (d - r_a - r_b) / 2.0)
    theta_floor = _theta_batch(d, r_a, r_b, r_floor)
    has_any = ~np.isnan(theta_floor) & (theta_floor >= theta_min - ANGLE_SLACK)

    theta_cap = _theta_batch(d, r_a, r_b, np.full_like(d, cap))
    at_cap = has_any & ~np.isnan(theta_cap) & (theta_cap >= theta_min - ANGLE_SLACK)

    lo = r_floor.copy()
    hi = np.full_like(d, cap)
    for _ in range(60):
        mid = (lo + hi) / 2.0
        theta_mid = _theta_batch(d, r_a, r_b, mid)
        ok = ~np.isnan(theta_mid) & (theta_mid >= theta_min - ANGLE_SLACK)
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    out = (lo + hi) / 2.0
    out = np.where(at_cap, cap, out)
    return np.where(has_any, out, np.nan)


def _batch_r_min(d: np.ndarray, r_a: float, r_b: float, cap: float) -> np.ndarray:
    """Per-distance smallest contactable radius by feasibility bisection.

    Placement feasibility at a radius needs only the two contact reach
    tests, so the bisection runs on those directly.
    """
    d = np.asarray(d, dtype=float)
    touching = d <= r_a + r_b

    def feasible(radius):
        ua = radius + r_a
        ub = radius + r_b
        return (d > 0) & (ua + d >= ub) & (np.abs(ua - d) <= ub)

    lo = np.zeros_like(d)
    hi = np.full_like(d, cap)
    for _ in range(60):
        mid = (lo + hi) / 2.0
        ok = feasible(mid)
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    return np.where(touching, 0.0, (lo + hi) / 2.0)


# ---------------------------------------------------------------------------
# Grasp validity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OracleVerdict:
    precision_ok: bool
    lateral_ok: bool
    tripod_ok: bool

    @property
    def valid(self) -> bool:
        return self.precision_ok and self.lateral_ok and self.tripod_ok


def _o_establishments(thumb: Trajectory, index: Trajectory,
                      req: GraspRequirements):
    """Scalar-loop establishment classification of every (i, j) pair.

    Returns (precision_pairs, lateral_pairs), each a list of (i, j, d).
    """
    precision_pairs = []
    lateral_pairs = []
    for i in range(len(index)):
        for j in range(len(thumb)):
            g = thumb.positions[j] - index.positions[i]
            d = math.sqrt(float(g[0] ** 2 + g[1] ** 2 + g[2] ** 2))
            if d <= 0:
                continue
            if (_o_angle(index.pad_normals[i], g) <= req.alpha_perm + ANGLE_SLACK
                    and _o_angle(index.tangents[i], g)
                    <= req.force_dir_limit + ANGLE_SLACK):
                precision_pairs.append((i, j, d))
            if (_o_angle(index.side_normals[i], g) <= req.alpha_perm + ANGLE_SLACK
                    and _o_angle(thumb.tangents[j], -g)
                    <= req.force_dir_limit + ANGLE_SLACK):
                lateral_pairs.append((i, j, d))
    return precision_pairs, lateral_pairs


def _o_two_finger_ok(pairs, radius_range, r_thumb, r_other, theta_min) -> bool:
    if not pairs:
        return False
    lo_req, hi_req = radius_range
    d = np.array([p[2] for p in pairs])
    cap = max(2.0 * hi_req + 100.0, float(d.max()))
    r_lo = _batch_r_min(d, r_thumb, r_other, cap)
    if not bool(np.any(r_lo <= lo_req + 1e-9)):
        return False
    r_hi = _batch_r_max(d, r_thumb, r_other, theta_min, cap)
    if np.all(np.isnan(r_hi)):
        return False
    return bool(np.nanmax(r_hi) >= hi_req - 1e-9)


def _o_tripod_ok(thumb: Trajectory, index: Trajectory, middle: Trajectory,
                 r_t: float, r_i: float, r_m: float,
                 radius_range, radius_step: float) -> bool:
    """Tripod coverage by radius scan + circle intersection per triple.

    Each triple is flattened into its own plane (thumb at the origin, index
    on the +x axis); for every scanned radius the circles about the thumb
    and index tips are intersected and the middle-tip contact residual is
    tracked for sign changes, which are refined by per-bracket bisection. A
    root counts only when the recovered centre lies inside the triangle.
    """
    t_pos, i_pos, m_pos = thumb.positions, index.positions, middle.positions
    n_t, n_i, n_m = len(t_pos), len(i_pos), len(m_pos)
    shape = (n_t, n_i, n_m)
    p1 = np.broadcast_to(t_pos[:, None, None, :], shape + (3,)).reshape(-1, 3)
    p2 = np.broadcast_to(i_pos[None, :, None, :], shape + (3,)).reshape(-1, 3)
    p3 = np.broadcast_to(m_pos[None, None, :, :], shape + (3,)).reshape(-1, 3)

    v12 = p2 - p1
    v13 = p3 - p1
    d12 = np.sqrt(np.sum(v12 * v12, axis=1))
    normal = np.cross(v12, v13)
    area2 = np.sqrt(np.sum(normal * normal, axis=1))
    ok_frame = (d12 > 1e-9) & (area2 > 1e-9)
    safe_d12 = np.where(ok_frame, d12, 1.0)
    safe_area = np.where(ok_frame, area2, 1.0)
    ex = v12 / safe_d12[:, None]
    ez = normal / safe_area[:, None]
    ey = np.cross(ez, ex)
    bx = d12
    cx = np.sum(v13 * ex, axis=1)
    cy = np.sum(v13 * ey, axis=1)

    def branch_residuals(radius, sel=slice(None)):
        """(x, y, upper residual, lower residual) at per-triple radii."""
        u1 = radius + r_t
        u2 = radius + r_i
        bxs, cxs, cys = bx[sel], cx[sel], cy[sel]
        x = (u1 * u1 - u2 * u2 + bxs * bxs) / (2.0 * bxs)
        y_sq = u1 * u1 - x * x
        feasible = ok_frame[sel] & (y_sq >= 0.0)
        y = np.sqrt(np.where(feasible, y_sq, np.nan))
        res_up = np.hypot(x - cxs, y - cys) - (radius + r_m)
        res_dn = np.hypot(x - cxs, -y - cys) - (radius + r_m)
        return x, y, res_up, res_dn

    def contained(x, y, sel):
        bxs, cxs, cys = bx[sel], cx[sel], cy[sel]
        s1 = bxs * y
        s2 = (cxs - bxs) * y - cys * (x - bxs)
        s3 = -cxs * (y - cys) + cys * (x - cxs)
        eps = 1e-9 * np.maximum(1.0, bxs * bxs)
        pos = (s1 >= -eps) & (s2 >= -eps) & (s3 >= -eps)
        neg = (s1 <= eps) & (s2 <= eps) & (s3 <= eps)
        return pos | neg

    cap = float(np.max(np.where(ok_frame, np.maximum(d12, np.sqrt(
        np.sum(v13 * v13, axis=1))), 0.0), initial=0.0))
    if cap <= 0:
        return False

    # scan: collect every bracketed sign change, refine them all at once
    bracket_sel: list[np.ndarray] = []
    bracket_lo: list[np.ndarray] = []
    bracket_hi: list[np.ndarray] = []
    bracket_upper: list[np.ndarray] = []
    prev_r = None
    prev_up = prev_dn = None
    for radius in np.arange(0.0, cap + radius_step, radius_step):
        _, _, res_up, res_dn = branch_residuals(float(radius))
        if prev_r is not None:
            for upper, f0, f1 in ((True, prev_up, res_up), (False, prev_dn, res_dn)):
                crossed = (np.isfinite(f0) & np.isfinite(f1)
                           & (np.sign(f0) != np.sign(f1)))
                sel = np.flatnonzero(crossed)
                if sel.size:
                    bracket_sel.append(sel)
                    bracket_lo.append(np.full(sel.shape, prev_r))
                    bracket_hi.append(np.full(sel.shape, float(radius)))
                    bracket_upper.append(np.full(sel.shape, upper, dtype=bool))
        prev_r = float(radius)
        prev_up, prev_dn = res_up, res_dn

    if not bracket_sel:
        return False
    sel = np.concatenate(bracket_sel)
    lo = np.concatenate(bracket_lo)
    hi = np.concatenate(bracket_hi)
    upper = np.concatenate(bracket_upper)

    def resid_at(radius):
        _, _, up, dn = branch_residuals(radius, sel)
        return np.where(upper, up, dn)

    f_lo = resid_at(lo)
    for _ in range(60):
        mid = (lo + hi) / 2.0
        f_mid = resid_at(mid)
        same = (f_lo <= 0.0) == (f_mid <= 0.0)
        lo = np.where(same, mid, lo)
        f_lo = np.where(same, f_mid, f_lo)
        hi = np.where(same, hi, mid)
    roots = (lo + hi) / 2.0
    x, y, _, _ = branch_residuals(roots, sel)
    y_signed = np.where(upper, y, -y)
    keep = np.isfinite(y_signed) & contained(x, y_signed, sel)
    if not bool(keep.any()):
        return False
    found_min = float(roots[keep].min())
    found_max = float(roots[keep].max())
    lo_req, hi_req = radius_range
    return found_min <= lo_req + 1e-9 and found_max >= hi_req - 1e-9


def oracle_validity(cfg, hand: HandModel, req: GraspRequirements,
                    radius_step: float = 0.5) -> OracleVerdict:
    """Exhaustive enumeration of the grasp conditions for one configuration.

    Same condition list as the main grasp checks by construction, evaluated
    through numeric placement recovery instead of closed forms.
    """
    thumb = hand.thumb_trajectory(cfg)
    precision_pairs, lateral_pairs = _o_establishments(thumb, hand.index, req)
    precision_ok = _o_two_finger_ok(
        precision_pairs, req.precision_radius, hand.radii.thumb,
        hand.radii.index, req.theta_min)
    lateral_ok = _o_two_finger_ok(
        lateral_pairs, req.lateral_radius, hand.radii.thumb,
        hand.radii.index, req.theta_min)
    tripod_ok = _o_tripod_ok(
        thumb, hand.index, hand.middle, hand.radii.thumb, hand.radii.index,
        hand.radii.middle, req.tripod_radius, radius_step)
    return OracleVerdict(precision_ok, lateral_ok, tripod_ok)


# ---------------------------------------------------------------------------
# Width sweep
# ---------------------------------------------------------------------------

def oracle_width_sweep(cfg, hand: HandModel, req: GraspRequirements,
                       deformation_mm: float,
                       width_step: float = 0.1) -> WidthInterval:
    """Manipulable width range by sweeping candidate widths.

    A width w is manipulable iff at every index sample i and every thumb
    step j inside that sample's transition range the fingertip gap
    d - (r_T + r_I) lies within [w - 2*delta_m, w]. Returns the maximal
    contiguous range of sweep widths passing, resolved to width_step.
    """
    if width_step > 0.1:
        raise ValueError("width step must be <= 0.1 mm")
    thumb = hand.thumb_trajectory(cfg)
    precision_pairs, lateral_pairs = _o_establishments(thumb, hand.index, req)
    prec_by_i: dict[int, list[int]] = {}
    lat_by_i: dict[int, list[int]] = {}
    for i, j, _ in precision_pairs:
        prec_by_i.setdefault(i, []).append(j)
    for i, j, _ in lateral_pairs:
        lat_by_i.setdefault(i, []).append(j)

    tip_sum = hand.radii.thumb + hand.radii.index
    gaps: list[float] = []
    for i in range(len(hand.index)):
        lat_js = lat_by_i.get(i)
        if not lat_js:
            return WidthInterval.empty_interval()
        j_lat = max(lat_js)
        prec_js = [j for j in prec_by_i.get(i, []) if j >= j_lat]
        if not prec_js:
            return WidthInterval.empty_interval()
        j_prec = min(prec_js)
        for j in range(j_lat, j_prec + 1):
            g = thumb.positions[j] - hand.index.positions[i]
            d = math.sqrt(float(g[0] ** 2 + g[1] ** 2 + g[2] ** 2))
            gaps.append(d - tip_sum)

    gaps_arr = np.array(gaps)
    w_cap = float(gaps_arr.max()) + 2.0 * deformation_mm + width_step
    widths = np.arange(0.0, max(w_cap, width_step), width_step)
    holds = np.array([
        bool(np.all(gaps_arr <= w) and np.all(gaps_arr >= w - 2.0 * deformation_mm))
        for w in widths
    ])
    passing = np.flatnonzero(holds)
    if passing.size == 0:
        return WidthInterval.empty_interval()
    return WidthInterval.from_bounds(float(widths[passing[0]]),
                                     float(widths[passing[-1]]))


# ---------------------------------------------------------------------------
# Sequential two-pass optimizer reference
# ---------------------------------------------------------------------------

def two_pass_reference(hand: HandModel, req: GraspRequirements,
                       grid: SearchGrid, deformation_mm: float,
                       top_k: int = 10) -> OptimizationResult:
    """Algorithm-as-written reference: validate everything first, then rank.

    Uses the production per-configuration functions (so floating-point
    results are comparable bit for bit) but the naive two-pass, single
    threaded, prune-free loop structure.
    """
    valid: list[tuple[int, object]] = []
    stage_counts = {"pruned": 0, "precision": 0, "lateral": 0, "tripod": 0,
                    "valid": 0}
    for idx, cfg in enumerate_grid(grid):
        verdict = is_valid_grasp(cfg, hand, req)
        if verdict.valid:
            stage_counts["valid"] += 1
            valid.append((idx, cfg))
        elif not verdict.precision.ok:
            stage_counts["precision"] += 1
        elif not verdict.lateral.ok:
            stage_counts["lateral"] += 1
        else:
            stage_counts["tripod"] += 1

    entries: list[TopEntry] = []
    for idx, cfg in valid:
        analysis = manipulation_range(cfg, hand, req, deformation_mm)
        entries.append(TopEntry(idx, cfg, analysis.overall))
    entries.sort(key=TopEntry.sort_key)
    top = tuple(entries[:top_k])
    best = top[0] if valid else None

    return OptimizationResult(
        omega_opt=best.config if best else None,
        w_max=best.interval.width if best else 0.0,
        w_interval=best.interval if best else None,
        valid_count=len(valid),
        evaluated_count=grid.total,
        top_k=top,
        stage_counts=stage_counts,
        metadata={"reference": "two-pass"},
        runtime={},
        completed=True,
    )


# ---------------------------------------------------------------------------
# Built-in verification fixtures
# ---------------------------------------------------------------------------

def high_precision_delta_m(force_n: str, youngs_pa: str, digits: int = 50) -> float:
    """delta_m via decimal arithmetic, in mm (independent of math.sqrt)."""
    getcontext().prec = digits
    pi = Decimal(
        "3.14159265358979323846264338327950288419716939937510582097494459"
    )
    val = (Decimal(force_n) / (pi * Decimal(youngs_pa))).sqrt()
    return float(val * 1000)


@dataclass(frozen=True)
class OracleReport:
    """One oracle-vs-main comparison row."""

    case_id: str
    inputs: str
    oracle_value: float
    main_value: float
    abs_dev: float
    rel_dev: float
    tolerance: float
    passed: bool

    @staticmethod
    def compare(case_id: str, inputs: str, oracle_value: float,
                main_value: float, tolerance: float) -> "OracleReport":
        abs_dev = abs(oracle_value - main_value)
        denom = max(abs(oracle_value), abs(main_value))
        rel_dev = abs_dev / denom if denom > 0 else 0.0
        return OracleReport(case_id, inputs, oracle_value, main_value,
                            abs_dev, rel_dev, tolerance, abs_dev <= tolerance)


def run_verification(perturb_mm: float = 0.0) -> list[OracleReport]:
    """Oracle-vs-main comparisons on built-in fixtures.

    perturb_mm injects a deliberate offset into the oracle's geometry inputs
    (negative control: any nonzero value must make cases fail).
    """
    from .geom import contact_angle, solve_R_max
    from .manip import delta_m as main_delta_m

    reports: list[OracleReport] = []

    # fingertip deformation against arbitrary-precision arithmetic
    reports.append(OracleReport.compare(
        "delta_m/table", "F=10 N, E=134.3 kPa",
        high_precision_delta_m("10", "134300"), main_delta_m(10.0, 134300.0),
        tolerance=1e-9,
    ))

    rng = np.random.default_rng(20260808)
    worst = 0.0
    n_angle = 60
    for k in range(n_angle):
        r_a = float(rng.uniform(3, 12))
        r_b = float(rng.uniform(3, 12))
        radius = float(rng.uniform(0, 60))
        # keep the case feasible: distance inside the contact reach
        d = float(rng.uniform(abs(r_a - r_b) + 1e-3, 2 * radius + r_a + r_b))
        tip_a = SphereFingertip(np.zeros(3), r_a)
        tip_b = SphereFingertip(np.array([d + perturb_mm, 0.0, 0.0]), r_b)
        theta_oracle = oracle_contact_angle(tip_a, tip_b, radius)
        theta_main = contact_angle(d, r_a, r_b, radius)
        if theta_oracle is None or theta_main is None:
            ok = (theta_oracle is None) == (theta_main is None)
            reports.append(OracleReport(
                f"contact_angle/{k}", f"d={d:.3f} r=({r_a:.2f},{r_b:.2f}) R={radius:.2f}",
                float("nan"), float("nan"), float("nan"), float("nan"),
                0.0, ok))
            continue
        worst = max(worst, abs(theta_oracle - theta_main))
        if k < 5 or abs(theta_oracle - theta_main) > 1e-5:
            reports.append(OracleReport.compare(
                f"contact_angle/{k}",
                f"d={d:.3f} r=({r_a:.2f},{r_b:.2f}) R={radius:.2f}",
                theta_oracle, theta_main, tolerance=1e-5))
    reports.append(OracleReport(
        "contact_angle/max_deviation", f"{n_angle} random feasible cases",
        worst, 0.0, worst, worst, 1e-5, worst <= 1e-5))

    # R_max round trip: theta(R_max) must land back on theta_min
    for k in range(10):
        r_a = float(rng.uniform(4, 10))
        r_b = float(rng.uniform(4, 10))
        d = float(rng.uniform(r_a + r_b + 5, 120))
        theta_min = float(rng.uniform(math.radians(95), math.radians(150)))
        r_main = solve_R_max(d + perturb_mm, r_a, r_b, theta_min)
        if r_main is None:
            continue
        theta_back = oracle_contact_angle(
            SphereFingertip(np.zeros(3), r_a),
            SphereFingertip(np.array([d, 0.0, 0.0]), r_b), r_main)
        reports.append(OracleReport.compare(
            f"r_max_roundtrip/{k}",
            f"d={d:.3f} r=({r_a:.2f},{r_b:.2f}) theta_min={math.degrees(theta_min):.1f}deg",
            theta_back if theta_back is not None else float("nan"),
            theta_min, tolerance=1e-5))

    # equilateral tripod: inscribed radius = circumradius - fingertip radius
    from .grasp import check_tripod
    from .kinematics import FingertipRadii, Trajectory

    side = 70.0
    tip_r = 6.0
    height = side * math.sqrt(3) / 2.0
    jitter = np.array([0.0, 0.0, 1e-3])

    def two_point(p):
        pts = np.array([p, p + jitter])
        return Trajectory.from_points(pts, pad_hint=np.array([1.0, 0.0, 0.0]),
                                      side_hint=np.array([0.0, 1.0, 0.0]))

    thumb_t = two_point(np.array([0.0, 0.0, 0.0]))
    index_t = two_point(np.array([side, 0.0, 0.0]))
    middle_t = two_point(np.array([side / 2.0, height, 0.0]))
    expected = side / math.sqrt(3) - tip_r + perturb_mm
    from .grasp import GraspRequirements

    req = GraspRequirements((0, 1), (0, 1), (0, 1), (0, 1),
                            math.radians(110), math.radians(30))
    tri = check_tripod(thumb_t, index_t, middle_t,
                       FingertipRadii(tip_r, tip_r, tip_r), req)
    reports.append(OracleReport.compare(
        "tripod/equilateral", f"side={side} tip_r={tip_r}",
        expected, tri.r_min if tri.r_min is not None else float("nan"),
        tolerance=1e-5))

    # grasp validity and width-sweep agreement on the reference hand
    from .config import reference_hand, reference_requirements

    hand = reference_hand(samples=10, thumb_steps=16)
    req = reference_requirements()
    dm = main_delta_m(10.0, 134300.0)
    mismatches = 0
    n_validity = 8
    for k in range(n_validity):
        cfg = _random_reference_config(rng, perturb_mm)
        main_verdict = is_valid_grasp(cfg, hand, req)
        oracle_verdict = oracle_validity(cfg, hand, req, radius_step=0.5)
        agree = (main_verdict.precision.ok == oracle_verdict.precision_ok
                 and main_verdict.lateral.ok == oracle_verdict.lateral_ok
                 and main_verdict.tripod.ok == oracle_verdict.tripod_ok)
        if not agree:
            mismatches += 1
    reports.append(OracleReport(
        "validity/agreement", f"{n_validity} random configs, reference hand",
        float(mismatches), 0.0, float(mismatches), float(mismatches),
        0.0, mismatches == 0))

    for k in range(3):
        cfg = _random_reference_config(rng, 0.0)
        sweep = oracle_width_sweep(cfg, hand, req, dm + perturb_mm,
                                   width_step=0.1)
        analysis = manipulation_range(cfg, hand, req, dm)
        main_iv = analysis.overall
        if sweep.empty and main_iv.empty:
            reports.append(OracleReport(f"width_sweep/{k}", "both empty",
                                        0.0, 0.0, 0.0, 0.0, 0.1, True))
            continue
        if sweep.empty != main_iv.empty:
            reports.append(OracleReport(f"width_sweep/{k}", "emptiness mismatch",
                                        float("nan"), float("nan"),
                                        float("inf"), float("inf"), 0.1, False))
            continue
        dev = max(abs(sweep.lo - main_iv.lo), abs(sweep.hi - main_iv.hi))
        reports.append(OracleReport(
            f"width_sweep/{k}", f"config {k}", sweep.lo, main_iv.lo, dev, dev,
            0.1, dev <= 0.1))

    return reports


def _random_reference_config(rng, perturb_mm: float):
    """Random axis placement around the reference hand's design region."""
    from .config import REFERENCE_AXIS_DEG
    from .geom import AxisConfig

    a = REFERENCE_AXIS_DEG
    deg = math.pi / 180.0
    return AxisConfig(
        a["x"] + float(rng.uniform(-20, 20)) + perturb_mm,
        a["y"] + float(rng.uniform(-20, 20)),
        a["z"] + float(rng.uniform(-20, 20)),
        (a["roll_deg"] + float(rng.uniform(-25, 25))) * deg,
        (a["pitch_deg"] + float(rng.uniform(-25, 25))) * deg,
        (a["yaw_deg"] + float(rng.uniform(-30, 30))) * deg,
    )
