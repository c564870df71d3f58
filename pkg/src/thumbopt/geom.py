"""3-D primitives and closed-form sphere-contact solvers.

Everything here is pure and immutable: lengths in millimetres, angles in
radians. The sphere-contact model treats fingertips and the grasped object
as spheres; contact means the centre distance equals the sum of the radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Vec3 = np.ndarray  # shape (3,), float64

#: tolerance for exact identities (unit norms, orthogonality, round trips)
EXACT_TOL = 1e-9
#: tolerance for iterative solver outputs, in mm
SOLVER_TOL = 1e-6
#: iteration cap for bisection solvers
BISECT_MAX_ITER = 100

_TWO_PI = 2.0 * math.pi


def vec3(x: float, y: float, z: float) -> Vec3:
    return np.array([float(x), float(y), float(z)], dtype=float)


def unit_vec3(v) -> Vec3:
    """Normalize to unit length; rejects zero-length input."""
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n < 1e-12:
        raise ValueError("cannot normalize a zero-length vector")
    return v / n


def is_unit(v, tol: float = EXACT_TOL) -> bool:
    return abs(float(np.linalg.norm(v)) - 1.0) <= tol


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    return math.pi - (math.pi - a) % _TWO_PI


def angle_between(u, v) -> float:
    """Angle in [0, pi] between two unit vectors, robust near 0 and pi."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    cross = np.cross(u, v)
    return float(math.atan2(float(np.linalg.norm(cross)), float(np.dot(u, v))))


@dataclass(frozen=True)
class AxisConfig:
    """Candidate thumb rotation-axis placement: position (mm) + intrinsic
    roll/pitch/yaw (rad), angles normalized to (-pi, pi]."""

    x: float
    y: float
    z: float
    roll: float
    pitch: float
    yaw: float

    def __post_init__(self):
        object.__setattr__(self, "roll", wrap_angle(float(self.roll)))
        object.__setattr__(self, "pitch", wrap_angle(float(self.pitch)))
        object.__setattr__(self, "yaw", wrap_angle(float(self.yaw)))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "z", float(self.z))

    @property
    def origin(self) -> Vec3:
        return vec3(self.x, self.y, self.z)

    def as_tuple(self) -> tuple:
        return (self.x, self.y, self.z, self.roll, self.pitch, self.yaw)


@dataclass(frozen=True, eq=False)
class SphereFingertip:
    """Fingertip modeled as a sphere: centre (mm) and radius (mm)."""

    center: Vec3
    radius: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        if center.shape != (3,):
            raise ValueError("fingertip centre must be a 3-vector")
        center.setflags(write=False)
        object.__setattr__(self, "center", center)
        if not self.radius > 0:
            raise ValueError("fingertip radius must be positive")


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Rotation + translation; rotation is a proper orthonormal 3x3."""

    rotation: np.ndarray
    translation: Vec3

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float)
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    def apply(self, p) -> np.ndarray:
        """Transform a point or an (N, 3) array of points."""
        p = np.asarray(p, dtype=float)
        return p @ self.rotation.T + self.translation

    def apply_vector(self, v) -> np.ndarray:
        """Rotate a direction (no translation)."""
        return np.asarray(v, dtype=float) @ self.rotation.T

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -(rt @ self.translation))

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self after other: (self.compose(other)).apply(p) == self.apply(other.apply(p))."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )


def _rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def axis_frame(cfg: AxisConfig) -> RigidTransform:
    """Realize an AxisConfig as a rigid frame.

    Rotation order is intrinsic roll->pitch->yaw, i.e. R = Rx(roll) @
    Ry(pitch) @ Rz(yaw). The rotation axis represented by the config is the
    frame's local +z direction.
    """
    rot = _rot_x(cfg.roll) @ _rot_y(cfg.pitch) @ _rot_z(cfg.yaw)
    return RigidTransform(rot, cfg.origin)


def rotate_about_axis(p, axis_point, axis_dir, angle: float) -> Vec3:
    """Rotate point p about the line (axis_point, axis_dir) by angle (rad).

    axis_dir must be unit length; uses the Rodrigues formula.
    """
    p = np.asarray(p, dtype=float)
    k = np.asarray(axis_dir, dtype=float)
    v = p - np.asarray(axis_point, dtype=float)
    c, s = math.cos(angle), math.sin(angle)
    rotated = v * c + np.cross(k, v) * s + k * float(np.dot(k, v)) * (1.0 - c)
    return np.asarray(axis_point, dtype=float) + rotated


def solve_object_placement(tip_a: SphereFingertip, tip_b: SphereFingertip,
                           object_radius: float) -> float | None:
    """Contact angle at the object centre for an object touching both tips.

    Returns theta in (0, pi], the angle between the two tip directions seen
    from the object centre, or None when no placement exists (the object
    cannot contact both fingertips).
    """
    if object_radius < 0:
        raise ValueError("object radius must be non-negative")
    d = float(np.linalg.norm(tip_a.center - tip_b.center))
    return contact_angle(d, tip_a.radius, tip_b.radius, object_radius)


def contact_angle(d: float, r_a: float, r_b: float, object_radius: float) -> float | None:
    """Law-of-cosines form of solve_object_placement on the tip distance d."""
    ua = object_radius + r_a
    ub = object_radius + r_b
    if d <= 0:
        return None
    if d > ua + ub or d < abs(ua - ub):
        return None
    cos_theta = (ua * ua + ub * ub - d * d) / (2.0 * ua * ub)
    cos_theta = min(1.0, max(-1.0, cos_theta))
    theta = math.acos(cos_theta)
    return theta if theta > 0 else None


def solve_R_min(d: float, r_a: float, r_b: float) -> float:
    """Smallest graspable object radius at tip distance d.

    Realized with the two tips and the object centre collinear; clamped to 0
    when the tip spheres interpenetrate (d < r_a + r_b).
    """
    if d <= 0:
        raise ValueError("tip distance must be positive")
    return max(0.0, (d - r_a - r_b) / 2.0)


def solve_R_max(d: float, r_a: float, r_b: float, theta_min: float) -> float | None:
    """Largest object radius whose contact angle still satisfies theta_min.

    theta(R) is strictly decreasing in R on the feasible domain, so the
    answer is the root of theta(R) = theta_min, solved in closed form from
    the law of cosines. Returns None when no radius >= 0 achieves theta_min.
    """
    if not (0 < theta_min <= math.pi):
        raise ValueError("theta_min must lie in (0, pi]")
    if d <= 0:
        raise ValueError("tip distance must be positive")
    if d < abs(r_a - r_b):
        return None  # one tip sphere buried in the other's contact reach
    c = math.cos(theta_min)
    k = r_b - r_a
    disc = (1.0 - c) * (2.0 * d * d - k * k * (1.0 + c))
    if disc < 0:
        return None
    u = -k / 2.0 + math.sqrt(disc) / (2.0 * (1.0 - c))
    radius = u - r_a
    if radius < 0:
        return None  # even a point object sees theta < theta_min
    # theta(R) decreasing: the round trip must land back on theta_min.
    theta_check = contact_angle(d, r_a, r_b, radius)
    assert theta_check is not None and abs(theta_check - theta_min) < 1e-7
    return radius


def r_max_batch(d: np.ndarray, r_a: float, r_b: float, theta_min: float) -> np.ndarray:
    """Vectorized solve_R_max over an array of tip distances; NaN = no grasp."""
    d = np.asarray(d, dtype=float)
    c = math.cos(theta_min)
    k = r_b - r_a
    disc = (1.0 - c) * (2.0 * d * d - k * k * (1.0 + c))
    ok = (d >= abs(r_a - r_b)) & (d > 0) & (disc >= 0)
    with np.errstate(invalid="ignore"):
        radius = -k / 2.0 + np.sqrt(np.where(ok, disc, np.nan)) / (2.0 * (1.0 - c)) - r_a
    return np.where(ok & (radius >= 0), radius, np.nan)


def r_min_batch(d: np.ndarray, r_a: float, r_b: float) -> np.ndarray:
    """Vectorized solve_R_min over an array of tip distances."""
    return np.maximum(0.0, (np.asarray(d, dtype=float) - r_a - r_b) / 2.0)
