"""Thumb rotation-axis design optimization for prosthetic hands.

Exhaustive search over 6-DOF thumb-axis placements, geometric validation of
precision/lateral/tripod grasps against finger trajectories, and
maximization of the precision-lateral in-hand manipulation width range.
"""

from .geom import (
    AxisConfig,
    RigidTransform,
    SphereFingertip,
    angle_between,
    axis_frame,
    rotate_about_axis,
    solve_R_max,
    solve_R_min,
    solve_object_placement,
)
from .grasp import (
    GraspRequirements,
    GraspVerdict,
    check_lateral,
    check_precision,
    check_tripod,
    default_requirements,
    is_valid_grasp,
)
from .kinematics import (
    Differential,
    FingertipRadii,
    FourBarLinkage,
    HandModel,
    MechanismError,
    PistonCrank,
    ThumbSpec,
    Trajectory,
    differential_distribute,
    four_bar_forward,
    four_bar_trajectory,
    load_polyline_csv,
    piston_crank_angle,
    piston_crank_position,
    polyline_trajectory,
    thumb_trajectory,
)
from .manip import (
    TransitionAnalysis,
    WidthInterval,
    critical_points,
    delta_m,
    manipulation_range,
    width_interval,
)
from .optimizer import (
    GridDimension,
    OptimizationResult,
    OptimizeOptions,
    SearchGrid,
    TopEntry,
    enumerate_grid,
    evaluate_one,
    optimize,
    would_prune,
)

__version__ = "0.1.0"
