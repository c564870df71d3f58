"""Geometric validation of precision, lateral and tripod grasps.

A thumb-axis configuration is valid when all three grasp types are
achievable somewhere within the finger motion ranges. Establishment
conditions (contact-angle alpha against the index reference normal, and the
force-applying digit's motion direction) select the admissible sample
pairs; the radius-range conditions are then evaluated over that set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom import AxisConfig, r_max_batch, r_min_batch
from .kinematics import FingertipRadii, HandModel, Trajectory

#: slack applied to every angular comparison so boundary cases are deterministic
ANGLE_SLACK = 1e-9
#: slack on barycentric coordinates for triangle containment
CONTAINMENT_SLACK = 1e-9

_TRIPOD_CHUNK = 400_000  # max triples per vectorized block


@dataclass(frozen=True)
class GraspRequirements:
    """Radius/width ranges (mm) and angular thresholds (rad) a valid
    configuration must satisfy."""

    precision_radius: tuple[float, float]
    lateral_radius: tuple[float, float]
    tripod_radius: tuple[float, float]
    manipulation_width: tuple[float, float]
    theta_min: float
    alpha_perm: float
    force_dir_limit: float = math.radians(45.0)

    def __post_init__(self):
        for name in ("precision_radius", "lateral_radius", "tripod_radius",
                     "manipulation_width"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} range has lo > hi")
        for name in ("theta_min", "alpha_perm", "force_dir_limit"):
            val = getattr(self, name)
            if not (0 < val <= math.pi):
                raise ValueError(f"{name} must lie in (0, pi]")


def default_requirements() -> GraspRequirements:
    """Stock requirement set: precision [0, 60], lateral [0, 30], tripod
    [10, 80], manipulation width [0, 30] mm; 110 deg minimum grasp angle,
    30 deg permitted contact angle, 45 deg force-direction limit."""
    return GraspRequirements(
        precision_radius=(0.0, 60.0),
        lateral_radius=(0.0, 30.0),
        tripod_radius=(10.0, 80.0),
        manipulation_width=(0.0, 30.0),
        theta_min=math.radians(110.0),
        alpha_perm=math.radians(30.0),
    )


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a two-finger grasp check with diagnostics.

    r_min/r_max are the radius extremes achieved over establishment-valid
    pairs (None when no pair qualifies). alpha_best / force_best are the
    smallest deviations seen over all pairs, valid or not, so a failure can
    be traced to the closest miss.
    """

    ok: bool
    r_min: float | None
    r_max: float | None
    alpha_best: float
    force_best: float
    valid_pairs: int
    violations: tuple[str, ...]


@dataclass(frozen=True)
class TripodResult:
    """Outcome of the three-finger check. r_min/r_max span the radii of
    objects that can touch all three tips with their centre inside the
    fingertip triangle; pairwise contact angles at the realizing triples are
    diagnostic only."""

    ok: bool
    r_min: float | None
    r_max: float | None
    valid_triples: int
    theta_at_rmin: tuple[float, float, float] | None
    theta_at_rmax: tuple[float, float, float] | None
    violations: tuple[str, ...]


@dataclass(frozen=True)
class GraspVerdict:
    precision: CheckResult
    lateral: CheckResult
    tripod: TripodResult

    @property
    def valid(self) -> bool:
        return self.precision.ok and self.lateral.ok and self.tripod.ok


# ---------------------------------------------------------------------------
# Pairwise geometry
# ---------------------------------------------------------------------------

def _pair_field(thumb: Trajectory, index: Trajectory):
    """(d, ghat): centre distances and grasp directions, (I, J[, 3])."""
    diff = thumb.positions[None, :, :] - index.positions[:, None, :]
    d = np.sqrt(np.sum(diff * diff, axis=2))
    with np.errstate(invalid="ignore", divide="ignore"):
        ghat = diff / d[:, :, None]
    return d, ghat


def _ang(dots: np.ndarray) -> np.ndarray:
    return np.arccos(np.clip(dots, -1.0, 1.0))


def _precision_angles(thumb: Trajectory, index: Trajectory, ghat: np.ndarray):
    alpha_pad = _ang(np.sum(index.pad_normals[:, None, :] * ghat, axis=2))
    force_index = _ang(np.sum(index.tangents[:, None, :] * ghat, axis=2))
    return alpha_pad, force_index


def _lateral_angles(thumb: Trajectory, index: Trajectory, ghat: np.ndarray):
    alpha_side = _ang(np.sum(index.side_normals[:, None, :] * ghat, axis=2))
    force_thumb = _ang(np.sum(thumb.tangents[None, :, :] * (-ghat), axis=2))
    return alpha_side, force_thumb


def establishment_masks(thumb: Trajectory, index: Trajectory,
                        req: GraspRequirements):
    """Boolean (n_index, n_thumb) masks of precision- and lateral-established
    sample pairs. Precision: index pad normal within alpha_perm of the grasp
    direction and index motion within the force limit of it. Lateral: index
    side normal within alpha_perm, thumb motion within the force limit of
    the reversed grasp direction."""
    d, ghat = _pair_field(thumb, index)
    alpha_pad, force_index = _precision_angles(thumb, index, ghat)
    alpha_side, force_thumb = _lateral_angles(thumb, index, ghat)
    defined = d > 0
    precision = (defined
                 & (alpha_pad <= req.alpha_perm + ANGLE_SLACK)
                 & (force_index <= req.force_dir_limit + ANGLE_SLACK))
    lateral = (defined
               & (alpha_side <= req.alpha_perm + ANGLE_SLACK)
               & (force_thumb <= req.force_dir_limit + ANGLE_SLACK))
    return precision, lateral


def _range_check(d: np.ndarray, mask: np.ndarray, radius_range: tuple[float, float],
                 r_thumb: float, r_other: float, theta_min: float,
                 alpha_best: float, force_best: float) -> CheckResult:
    lo_req, hi_req = radius_range
    violations: list[str] = []
    n_valid = int(mask.sum())
    if n_valid == 0:
        violations.append(
            "no sample pair satisfies the contact-angle and force-direction conditions"
        )
        return CheckResult(False, None, None, alpha_best, force_best, 0,
                           tuple(violations))

    d_valid = d[mask]
    r_min_achieved = float(np.min(r_min_batch(d_valid, r_thumb, r_other)))
    r_max_pairs = r_max_batch(d_valid, r_thumb, r_other, theta_min)
    r_max_achieved = (float(np.nanmax(r_max_pairs))
                      if not np.all(np.isnan(r_max_pairs)) else None)

    if r_max_achieved is None:
        violations.append(
            f"no valid pair can grasp any radius at theta_min: required max {hi_req:g} mm"
        )
    elif r_max_achieved < hi_req:
        violations.append(
            f"max graspable radius {r_max_achieved:.3f} mm < required {hi_req:g} mm"
        )
    if r_min_achieved > lo_req:
        violations.append(
            f"min graspable radius {r_min_achieved:.3f} mm > required {lo_req:g} mm"
        )
    ok = not violations
    return CheckResult(ok, r_min_achieved, r_max_achieved, alpha_best,
                       force_best, n_valid, tuple(violations))


def check_precision(thumb: Trajectory, index: Trajectory, radii: FingertipRadii,
                    req: GraspRequirements) -> CheckResult:
    """Precision (pad-to-pad) feasibility over all (index, thumb) pairs."""
    d, ghat = _pair_field(thumb, index)
    alpha_pad, force_index = _precision_angles(thumb, index, ghat)
    defined = d > 0
    mask = (defined
            & (alpha_pad <= req.alpha_perm + ANGLE_SLACK)
            & (force_index <= req.force_dir_limit + ANGLE_SLACK))
    return _range_check(
        d, mask, req.precision_radius, radii.thumb, radii.index, req.theta_min,
        alpha_best=float(alpha_pad.min()), force_best=float(force_index.min()),
    )


def check_lateral(thumb: Trajectory, index: Trajectory, radii: FingertipRadii,
                  req: GraspRequirements) -> CheckResult:
    """Lateral (key-pinch) feasibility: thumb against the index side."""
    d, ghat = _pair_field(thumb, index)
    alpha_side, force_thumb = _lateral_angles(thumb, index, ghat)
    defined = d > 0
    mask = (defined
            & (alpha_side <= req.alpha_perm + ANGLE_SLACK)
            & (force_thumb <= req.force_dir_limit + ANGLE_SLACK))
    return _range_check(
        d, mask, req.lateral_radius, radii.thumb, radii.index, req.theta_min,
        alpha_best=float(alpha_side.min()), force_best=float(force_thumb.min()),
    )


# ---------------------------------------------------------------------------
# Tripod
# ---------------------------------------------------------------------------

def _tripod_roots_chunk(thumb_pos: np.ndarray, index_pos: np.ndarray,
                        middle_pos: np.ndarray, radii: FingertipRadii):
    """All contained tangency radii for one thumb chunk.

    The object centre is sought in the plane of each (thumb, index, middle)
    triple as c_O = I + s*(M - I) + t*(T - I); external tangency to all
    three tip spheres makes (s, t) affine in R and leaves one quadratic in
    R per triple.
    """
    r_t, r_i, r_m = radii.thumb, radii.index, radii.middle
    e1 = middle_pos[None, None, :, :] - index_pos[None, :, None, :]   # (1, I, K, 3)
    e2 = thumb_pos[:, None, None, :] - index_pos[None, :, None, :]    # (C, I, 1, 3)

    a11 = np.sum(e1 * e1, axis=3)
    a22 = np.sum(e2 * e2, axis=3)
    a12 = np.sum(e1 * e2, axis=3)
    det = a11 * a22 - a12 * a12
    scale = a11 * a22
    nondegen = det > 1e-12 * np.maximum(scale, 1.0)

    b_m0 = (a11 - r_m * r_m + r_i * r_i) / 2.0
    b_m1 = -(r_m - r_i)
    b_t0 = (a22 - r_t * r_t + r_i * r_i) / 2.0
    b_t1 = -(r_t - r_i)

    with np.errstate(invalid="ignore", divide="ignore"):
        inv_det = np.where(nondegen, 1.0 / det, np.nan)
    s0 = (a22 * b_m0 - a12 * b_t0) * inv_det
    s1 = (a22 * b_m1 - a12 * b_t1) * inv_det
    t0 = (a11 * b_t0 - a12 * b_m0) * inv_det
    t1 = (a11 * b_t1 - a12 * b_m1) * inv_det

    w0 = s0[..., None] * e1 + t0[..., None] * e2
    w1 = s1[..., None] * e1 + t1[..., None] * e2
    quad_a = np.sum(w1 * w1, axis=3) - 1.0
    quad_b = 2.0 * (np.sum(w0 * w1, axis=3) - r_i)
    quad_c = np.sum(w0 * w0, axis=3) - r_i * r_i

    with np.errstate(invalid="ignore", divide="ignore"):
        disc = quad_b * quad_b - 4.0 * quad_a * quad_c
        sqrt_disc = np.sqrt(np.where(disc >= 0, disc, np.nan))
        quadratic = np.abs(quad_a) > 1e-12
        root_plus = np.where(quadratic, (-quad_b + sqrt_disc) / (2.0 * quad_a), np.nan)
        root_minus = np.where(quadratic, (-quad_b - sqrt_disc) / (2.0 * quad_a), np.nan)
        linear = ~quadratic & (np.abs(quad_b) > 1e-12)
        root_lin = np.where(linear, -quad_c / np.where(linear, quad_b, 1.0), np.nan)

    results = []
    for root in (root_plus, root_minus, root_lin):
        s = s0 + root * s1
        t = t0 + root * t1
        contained = ((s >= -CONTAINMENT_SLACK)
                     & (t >= -CONTAINMENT_SLACK)
                     & (1.0 - s - t >= -CONTAINMENT_SLACK))
        valid = nondegen & np.isfinite(root) & (root >= 0.0) & contained
        results.append((np.where(valid, root, np.nan), valid))
    return results


def _pairwise_contact_angles(c_o: np.ndarray, tips: tuple[np.ndarray, ...]):
    dirs = [tip - c_o for tip in tips]
    dirs = [v / np.linalg.norm(v) for v in dirs]

    def ang(u, v):
        return float(math.acos(min(1.0, max(-1.0, float(np.dot(u, v))))))

    thumb_dir, index_dir, middle_dir = dirs
    return (ang(thumb_dir, index_dir), ang(thumb_dir, middle_dir),
            ang(index_dir, middle_dir))


def check_tripod(thumb: Trajectory, index: Trajectory, middle: Trajectory,
                 radii: FingertipRadii, req: GraspRequirements) -> TripodResult:
    """Tripod feasibility over all (thumb, index, middle) sample triples."""
    t_pos, i_pos, m_pos = thumb.positions, index.positions, middle.positions
    n_t, n_i, n_m = len(t_pos), len(i_pos), len(m_pos)
    per_thumb = n_i * n_m
    chunk = max(1, _TRIPOD_CHUNK // max(per_thumb, 1))

    best_min = math.inf
    best_max = -math.inf
    best_min_loc = None
    best_max_loc = None
    n_valid = 0

    for start in range(0, n_t, chunk):
        stop = min(start + chunk, n_t)
        roots = _tripod_roots_chunk(t_pos[start:stop], i_pos, m_pos, radii)
        triple_valid = np.zeros(roots[0][0].shape, dtype=bool)
        for values, valid in roots:
            triple_valid |= valid
            if not valid.any():
                continue
            lo = float(np.nanmin(values))
            hi = float(np.nanmax(values))
            if lo < best_min:
                best_min = lo
                flat = int(np.nanargmin(values))
                best_min_loc = (start, flat, values.shape)
            if hi > best_max:
                best_max = hi
                flat = int(np.nanargmax(values))
                best_max_loc = (start, flat, values.shape)
        n_valid += int(triple_valid.sum())

    violations: list[str] = []
    if n_valid == 0:
        violations.append(
            "no sample triple admits an object touching all three tips with its "
            "centre inside the fingertip triangle"
        )
        return TripodResult(False, None, None, 0, None, None, tuple(violations))

    lo_req, hi_req = req.tripod_radius
    if best_min > lo_req:
        violations.append(
            f"min tripod radius {best_min:.3f} mm > required {lo_req:g} mm"
        )
    if best_max < hi_req:
        violations.append(
            f"max tripod radius {best_max:.3f} mm < required {hi_req:g} mm"
        )

    def theta_at(loc, radius):
        start, flat, shape = loc
        c_idx, i_idx, m_idx = np.unravel_index(flat, shape)
        tip_t = t_pos[start + int(c_idx)]
        tip_i = i_pos[int(i_idx)]
        tip_m = m_pos[int(m_idx)]
        c_o = _object_center(tip_t, tip_i, tip_m, radii, radius)
        return _pairwise_contact_angles(c_o, (tip_t, tip_i, tip_m))

    theta_min_diag = theta_at(best_min_loc, best_min)
    theta_max_diag = theta_at(best_max_loc, best_max)
    ok = not violations
    return TripodResult(ok, best_min, best_max, n_valid, theta_min_diag,
                        theta_max_diag, tuple(violations))


def _object_center(tip_t, tip_i, tip_m, radii: FingertipRadii, radius: float) -> np.ndarray:
    """Recover the in-plane object centre for a known tangency radius."""
    e1 = tip_m - tip_i
    e2 = tip_t - tip_i
    a11 = float(np.dot(e1, e1))
    a22 = float(np.dot(e2, e2))
    a12 = float(np.dot(e1, e2))
    det = a11 * a22 - a12 * a12
    r_t, r_i, r_m = radii.thumb, radii.index, radii.middle
    rhs_m = (a11 - r_m * r_m + r_i * r_i) / 2.0 - radius * (r_m - r_i)
    rhs_t = (a22 - r_t * r_t + r_i * r_i) / 2.0 - radius * (r_t - r_i)
    s = (a22 * rhs_m - a12 * rhs_t) / det
    t = (a11 * rhs_t - a12 * rhs_m) / det
    return tip_i + s * e1 + t * e2


def is_valid_grasp(cfg: AxisConfig, hand: HandModel,
                   req: GraspRequirements) -> GraspVerdict:
    """Aggregate precision/lateral/tripod validation for a configuration."""
    thumb = hand.thumb_trajectory(cfg)
    return verdict_for_thumb(thumb, hand, req)


def verdict_for_thumb(thumb: Trajectory, hand: HandModel,
                      req: GraspRequirements) -> GraspVerdict:
    """Validation against an already-generated thumb trajectory."""
    return GraspVerdict(
        precision=check_precision(thumb, hand.index, hand.radii, req),
        lateral=check_lateral(thumb, hand.index, hand.radii, req),
        tripod=check_tripod(thumb, hand.index, hand.middle, hand.radii, req),
    )
