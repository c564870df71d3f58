"""Finger trajectory generators and the linkage mechanisms behind them.

Index and middle fingertips ride four-bar coupler points, the thumb rides a
circle about its rotation axis (driven through a piston-crank), and the
ring/little pair shares one actuator through a differential. All trajectory
samples carry a motion tangent plus pad/side contact normals.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .geom import (
    AxisConfig,
    RigidTransform,
    Vec3,
    axis_frame,
    unit_vec3,
    vec3,
)


class MechanismError(ValueError):
    """A mechanism cannot realize the requested motion."""


# ---------------------------------------------------------------------------
# Four-bar linkage
# ---------------------------------------------------------------------------

IDENTITY_FRAME = RigidTransform(np.eye(3), np.zeros(3))


@dataclass(frozen=True)
class FourBarLinkage:
    """Planar four-bar, solved in its own (u, v) plane then posed in 3-D.

    The ground link runs from the input pivot at (0, 0) to the output pivot
    at (ground, 0). The coupler point is offset from the input-coupler joint
    by `coupler_offset` = (along the coupler toward the output joint,
    perpendicular, positive = +90 deg from the coupler direction).
    """

    ground: float
    input_link: float
    coupler: float
    output_link: float
    coupler_offset: tuple[float, float] = (0.0, 0.0)
    frame: RigidTransform = IDENTITY_FRAME

    def __post_init__(self):
        for name in ("ground", "input_link", "coupler", "output_link"):
            if not getattr(self, name) > 0:
                raise ValueError(f"four-bar {name} length must be positive")


def _four_bar_solve_2d(linkage: FourBarLinkage, input_angle: float,
                       branch: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Solve one pose in mechanism-plane coordinates; returns (A, B, P)."""
    if branch not in ("open", "crossed"):
        raise ValueError(f"unknown four-bar branch {branch!r}")
    a = linkage.input_link
    b = linkage.coupler
    c = linkage.output_link
    o4 = np.array([linkage.ground, 0.0])
    joint_a = np.array([a * math.cos(input_angle), a * math.sin(input_angle)])

    diff = o4 - joint_a
    dist = float(np.hypot(diff[0], diff[1]))
    if dist > b + c or dist < abs(b - c) or dist == 0.0:
        raise MechanismError(
            f"four-bar not assemblable at input angle {input_angle:.6f} rad"
        )
    e_hat = diff / dist
    e_perp = np.array([-e_hat[1], e_hat[0]])
    m = (b * b - c * c + dist * dist) / (2.0 * dist)
    h_sq = b * b - m * m
    h = math.sqrt(max(0.0, h_sq))
    sign = 1.0 if branch == "open" else -1.0
    joint_b = joint_a + m * e_hat + sign * h * e_perp

    coupler_hat = (joint_b - joint_a) / b
    coupler_perp = np.array([-coupler_hat[1], coupler_hat[0]])
    along, perp = linkage.coupler_offset
    point = joint_a + along * coupler_hat + perp * coupler_perp
    return joint_a, joint_b, point


def four_bar_loop_residual(linkage: FourBarLinkage, input_angle: float,
                           branch: str = "open") -> float:
    """Max loop-closure residual (mm) of the solved pose."""
    joint_a, joint_b, _ = _four_bar_solve_2d(linkage, input_angle, branch)
    o4 = np.array([linkage.ground, 0.0])
    res_coupler = abs(float(np.linalg.norm(joint_b - joint_a)) - linkage.coupler)
    res_output = abs(float(np.linalg.norm(joint_b - o4)) - linkage.output_link)
    return max(res_coupler, res_output)


def four_bar_forward(linkage: FourBarLinkage, input_angle: float,
                     branch: str = "open") -> Vec3:
    """Coupler-point position (3-D) at the given input crank angle."""
    _, _, point = _four_bar_solve_2d(linkage, input_angle, branch)
    return linkage.frame.apply(np.array([point[0], point[1], 0.0]))


# ---------------------------------------------------------------------------
# Piston-crank (thumb actuator)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PistonCrank:
    """Linear-to-rotary converter: slider on an axis through the crank pivot.

    Slider position x relates to crank angle phi through
    x(phi) = r cos(phi) + sqrt(l^2 - r^2 sin^2(phi)).
    """

    crank_radius: float
    rod_length: float
    pivot: Vec3 = field(default_factory=lambda: np.zeros(3))
    slider_axis: Vec3 = field(default_factory=lambda: vec3(1.0, 0.0, 0.0))

    def __post_init__(self):
        if not self.crank_radius > 0:
            raise ValueError("crank radius must be positive")
        if not self.rod_length > self.crank_radius:
            raise ValueError("rod length must exceed crank radius")
        object.__setattr__(self, "pivot", np.asarray(self.pivot, dtype=float))
        object.__setattr__(self, "slider_axis", unit_vec3(self.slider_axis))

    @property
    def stroke(self) -> tuple[float, float]:
        return (self.rod_length - self.crank_radius,
                self.rod_length + self.crank_radius)


def piston_crank_position(pc: PistonCrank, crank_angle: float) -> float:
    """Forward map: slider position (mm along the axis) at a crank angle."""
    r, length = pc.crank_radius, pc.rod_length
    s = r * math.sin(crank_angle)
    return r * math.cos(crank_angle) + math.sqrt(length * length - s * s)


def piston_crank_angle(pc: PistonCrank, slider_pos: float) -> float:
    """Crank angle in [0, pi] for a slider position inside the stroke."""
    lo, hi = pc.stroke
    if not (lo <= slider_pos <= hi):
        raise MechanismError(
            f"slider position {slider_pos:.6f} outside stroke [{lo:.6f}, {hi:.6f}]"
        )
    r, length = pc.crank_radius, pc.rod_length
    cos_phi = (slider_pos * slider_pos + r * r - length * length) / (2.0 * slider_pos * r)
    return math.acos(min(1.0, max(-1.0, cos_phi)))


def slider_point(pc: PistonCrank, crank_angle: float) -> Vec3:
    """Slider location in 3-D at a crank angle."""
    return pc.pivot + piston_crank_position(pc, crank_angle) * pc.slider_axis


# ---------------------------------------------------------------------------
# Ring/little differential
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Differential:
    """Single-actuator displacement distributor for the ring/little pair.

    Convention: without constraints each finger receives the full
    actuator-side travel, so total finger travel is twice the actuator
    travel; constraining one finger redirects everything to the other.
    """

    ring_constrained: bool = False
    little_constrained: bool = False
    ratio: tuple[float, float] = (1.0, 1.0)
    displacement: float = 0.0

    def __post_init__(self):
        ring_share, little_share = self.ratio
        if ring_share < 0 or little_share < 0 or ring_share + little_share <= 0:
            raise ValueError("distribution ratio shares must be non-negative and non-zero")


def differential_distribute(diff: Differential, actuator_delta: float) -> tuple[float, float]:
    """Split an actuator displacement into (ring_delta, little_delta)."""
    if diff.ring_constrained and diff.little_constrained:
        raise MechanismError("both fingers constrained: differential stalls, zero motion")
    total = 2.0 * actuator_delta
    if diff.ring_constrained:
        return (0.0, total)
    if diff.little_constrained:
        return (total, 0.0)
    ring_share, little_share = diff.ratio
    scale = total / (ring_share + little_share)
    return (ring_share * scale, little_share * scale)


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Trajectory:
    """Discretized fingertip path: positions, motion tangents, contact normals.

    Tangents are normalized first differences (the last sample repeats the
    previous tangent). Pad normals carry the nominal contact-surface
    orientation of the finger (for fixed fingers: the palm axis); side
    normals are the motion-plane normal oriented toward the thumb side.
    """

    positions: np.ndarray      # (N, 3) mm
    tangents: np.ndarray       # (N, 3) unit
    pad_normals: np.ndarray    # (N, 3) unit
    side_normals: np.ndarray   # (N, 3) unit
    params: np.ndarray         # (N,) actuator stroke (mm) or joint angle (rad)

    def __post_init__(self):
        for name in ("positions", "tangents", "pad_normals", "side_normals", "params"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = len(self.positions)
        if n < 2:
            raise ValueError("trajectory needs at least 2 samples")
        if self.positions.shape != (n, 3) or self.params.shape != (n,):
            raise ValueError("trajectory arrays have inconsistent shapes")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("trajectory contains non-finite coordinates")
        for name in ("tangents", "pad_normals", "side_normals"):
            norms = np.linalg.norm(getattr(self, name), axis=1)
            if float(np.abs(norms - 1.0).max()) > 1e-6:
                raise ValueError(f"{name} must be unit vectors")

    def __len__(self) -> int:
        return len(self.positions)

    @staticmethod
    def from_points(points, params=None, pad_hint=None, side_hint=None) -> "Trajectory":
        """Build a trajectory from raw sample points.

        pad_hint: single vector or (N, 3) array giving the contact-surface
        normal (for fixed fingers: the palm-axis config vector); rows are
        normalized and used as-is. side_hint: a single vector orients the
        motion-plane normal toward the thumb side; an (N, 3) array supplies
        side normals directly (normalized per row).
        """
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 3:
            raise ValueError("points must be an (N, 3) array")
        n = len(points)
        if n < 2:
            raise ValueError("trajectory needs at least 2 samples")
        if not np.all(np.isfinite(points)):
            raise ValueError("trajectory contains non-finite coordinates")

        diffs = np.diff(points, axis=0)
        seg_len = np.linalg.norm(diffs, axis=1)
        if float(seg_len.min()) < 1e-12:
            raise ValueError("duplicate consecutive trajectory points (degenerate tangent)")
        tangents = np.empty_like(points)
        tangents[:-1] = diffs / seg_len[:, None]
        tangents[-1] = tangents[-2]

        if pad_hint is None:
            raise ValueError("a pad-normal hint is required")
        pad_hint = np.asarray(pad_hint, dtype=float)
        if pad_hint.ndim == 1:
            pad_hint = np.broadcast_to(pad_hint, (n, 3))
        pad_norm = np.linalg.norm(pad_hint, axis=1)
        if float(pad_norm.min()) < 1e-9:
            raise ValueError("zero-length pad normal")
        pads = pad_hint / pad_norm[:, None]

        if side_hint is None:
            raise ValueError("a side-normal hint is required")
        side_hint = np.asarray(side_hint, dtype=float)
        if side_hint.ndim == 2:
            side_norm = np.linalg.norm(side_hint, axis=1)
            if float(side_norm.min()) < 1e-9:
                raise ValueError("zero-length side normal")
            sides = side_hint / side_norm[:, None]
        else:
            # motion-plane normal: dominant cross product of consecutive
            # segments; straight paths fall back to tangent x pad, then to
            # the hint direction itself
            crosses = np.cross(diffs[:-1], diffs[1:]) if n > 2 else np.zeros((0, 3))
            total = crosses.sum(axis=0) if len(crosses) else np.zeros(3)
            if float(np.linalg.norm(total)) < 1e-9:
                total = np.cross(tangents[0], pads[0])
            if float(np.linalg.norm(total)) < 1e-9:
                total = side_hint.astype(float)
            if float(np.linalg.norm(total)) < 1e-9:
                raise ValueError("cannot orient a side normal for this path")
            plane_normal = total / float(np.linalg.norm(total))
            if float(np.dot(plane_normal, side_hint)) < 0:
                plane_normal = -plane_normal
            sides = np.broadcast_to(plane_normal, (n, 3)).copy()

        if params is None:
            params = np.arange(n, dtype=float)
        return Trajectory(points, tangents, pads, sides, np.asarray(params, dtype=float))

    def reversed(self) -> "Trajectory":
        rev = self.positions[::-1].copy()
        return Trajectory.from_points(
            rev, self.params[::-1].copy(),
            pad_hint=self.pad_normals[::-1].copy(),
            side_hint=self.side_normals[::-1].copy(),
        )


def thumb_trajectory(axis: AxisConfig, tip_offset: tuple[float, float, float],
                     sweep: tuple[float, float], steps: int) -> Trajectory:
    """Thumb-tip circle about the rotation axis of `axis`.

    tip_offset = (radial mm, axial mm, phase rad) places the tip on a circle
    of the given radius in the plane perpendicular to the axis (the frame's
    local +z); `sweep` is the rotation range in radians.
    """
    radial, axial, phase = tip_offset
    if radial == 0:
        raise ValueError("degenerate thumb: tip offset places the tip on the axis")
    if steps < 2:
        raise ValueError("thumb trajectory needs at least 2 steps")
    if sweep[0] == sweep[1]:
        raise ValueError("degenerate thumb sweep")
    frame = axis_frame(axis)
    angles = np.linspace(sweep[0], sweep[1], steps)
    local = np.column_stack([
        radial * np.cos(phase + angles),
        radial * np.sin(phase + angles),
        np.full(steps, axial),
    ])
    points = frame.apply(local)
    circle_center = frame.apply(vec3(0.0, 0.0, axial))
    pad_hint = circle_center - points          # inward radial direction
    axis_dir = frame.apply_vector(vec3(0.0, 0.0, 1.0))
    return Trajectory.from_points(points, angles, pad_hint=pad_hint, side_hint=axis_dir)


def four_bar_trajectory(linkage: FourBarLinkage, angle_range: tuple[float, float],
                        steps: int, pad_hint, side_hint,
                        branch: str = "open") -> Trajectory:
    """Coupler-point trajectory of a four-bar over an input-angle sweep."""
    if steps < 2:
        raise ValueError("four-bar trajectory needs at least 2 steps")
    angles = np.linspace(angle_range[0], angle_range[1], steps)
    points = np.array([four_bar_forward(linkage, a, branch) for a in angles])
    return Trajectory.from_points(points, angles, pad_hint=pad_hint, side_hint=side_hint)


def polyline_trajectory(points, pad_hint, side_hint, params=None) -> Trajectory:
    """Trajectory from an explicit polyline of fingertip centres."""
    return Trajectory.from_points(points, params, pad_hint=pad_hint, side_hint=side_hint)


def load_polyline_csv(path, pad_hint=None, side_hint=None) -> Trajectory:
    """Load a trajectory from CSV rows x,y,z[,nx,ny,nz,sx,sy,sz] in mm.

    When normal columns are present they are used as per-sample hints
    (projected perpendicular to the tangent / sign-orienting the side
    normal); otherwise `pad_hint`/`side_hint` must be supplied.
    """
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if data.shape[1] == 3:
        if pad_hint is None:
            raise ValueError("polyline file has no normals; a pad-normal hint is required")
        return Trajectory.from_points(data, pad_hint=pad_hint, side_hint=side_hint)
    if data.shape[1] == 9:
        return Trajectory.from_points(
            data[:, :3], pad_hint=data[:, 3:6], side_hint=data[:, 6:9]
        )
    raise ValueError(
        f"polyline file must have 3 or 9 columns, found {data.shape[1]}"
    )


# ---------------------------------------------------------------------------
# Hand model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FingertipRadii:
    thumb: float
    index: float
    middle: float

    def __post_init__(self):
        for name in ("thumb", "index", "middle"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} fingertip radius must be positive")


@dataclass(frozen=True)
class ThumbSpec:
    """Thumb-tip placement relative to its rotation axis plus the sweep."""

    radial: float
    axial: float
    phase: float
    sweep: tuple[float, float]
    steps: int


@dataclass(frozen=True, eq=False)
class HandModel:
    """Everything the grasp checks need: fixed finger trajectories, fingertip
    radii, and the generator spec for the thumb circle."""

    index: Trajectory
    middle: Trajectory
    radii: FingertipRadii
    thumb: ThumbSpec

    def thumb_trajectory(self, cfg: AxisConfig) -> Trajectory:
        return thumb_trajectory(
            cfg, (self.thumb.radial, self.thumb.axial, self.thumb.phase),
            self.thumb.sweep, self.thumb.steps,
        )

    def thumb_circle(self, cfg: AxisConfig) -> tuple[Vec3, Vec3, float]:
        """(centre, axis direction, radius) of the thumb-tip circle."""
        frame = axis_frame(cfg)
        center = frame.apply(vec3(0.0, 0.0, self.thumb.axial))
        axis_dir = frame.apply_vector(vec3(0.0, 0.0, 1.0))
        return center, axis_dir, abs(self.thumb.radial)

    def fingerprint(self) -> str:
        """Stable content hash used to guard checkpoint resumption."""
        h = hashlib.sha256()
        for traj in (self.index, self.middle):
            for arr in (traj.positions, traj.tangents, traj.pad_normals,
                        traj.side_normals, traj.params):
                h.update(arr.tobytes())
        h.update(repr((self.radii.thumb, self.radii.index, self.radii.middle,
                       self.thumb.radial, self.thumb.axial, self.thumb.phase,
                       self.thumb.sweep, self.thumb.steps)).encode())
        return h.hexdigest()
