"""Run-configuration ingestion and the shipped reference hand.

Configs are single JSON documents with explicit unit suffixes: lengths in
mm, angles in degrees at this boundary (converted to radians on ingestion).
Parse errors carry the offending field path.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .geom import RigidTransform, unit_vec3, vec3
from .grasp import GraspRequirements
from .kinematics import (
    FingertipRadii,
    FourBarLinkage,
    HandModel,
    ThumbSpec,
    Trajectory,
    four_bar_trajectory,
    load_polyline_csv,
)
from .optimizer import GridDimension, SearchGrid

_DEG = math.pi / 180.0


class ConfigError(ValueError):
    """Malformed run configuration; message carries the field path."""


def _get(d: dict, key: str, path: str, expected=None):
    if key not in d:
        raise ConfigError(f"{path}.{key}: missing required field")
    val = d[key]
    if expected is not None and not isinstance(val, expected):
        raise ConfigError(
            f"{path}.{key}: expected {expected.__name__}, got {type(val).__name__}"
        )
    return val


def _pair(d: dict, key: str, path: str) -> tuple[float, float]:
    val = _get(d, key, path)
    if not isinstance(val, (list, tuple)) or len(val) != 2:
        raise ConfigError(f"{path}.{key}: expected a [lo, hi] pair")
    return float(val[0]), float(val[1])


def frame_from_axes(origin, u_axis, v_axis) -> RigidTransform:
    """Frame whose local x/y axes are the given (orthogonalized) directions."""
    ex = unit_vec3(u_axis)
    v = np.asarray(v_axis, dtype=float)
    v = v - float(np.dot(v, ex)) * ex
    ey = unit_vec3(v)
    ez = np.cross(ex, ey)
    return RigidTransform(np.column_stack([ex, ey, ez]),
                          np.asarray(origin, dtype=float))


def _four_bar_from_dict(d: dict, path: str) -> tuple[FourBarLinkage, tuple[float, float], str]:
    origin = _get(d, "origin_mm", path)
    plane_u = _get(d, "plane_u", path)
    plane_v = _get(d, "plane_v", path)
    frame = frame_from_axes(vec3(*origin), vec3(*plane_u), vec3(*plane_v))
    offset = _get(d, "coupler_offset_mm", path)
    try:
        linkage = FourBarLinkage(
            ground=float(_get(d, "ground_mm", path)),
            input_link=float(_get(d, "input_mm", path)),
            coupler=float(_get(d, "coupler_mm", path)),
            output_link=float(_get(d, "output_mm", path)),
            coupler_offset=(float(offset[0]), float(offset[1])),
            frame=frame,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    lo, hi = _pair(d, "input_range_deg", path)
    branch = d.get("branch", "open")
    if branch not in ("open", "crossed"):
        raise ConfigError(f"{path}.branch: must be 'open' or 'crossed'")
    return linkage, (lo * _DEG, hi * _DEG), branch


def _finger_from_dict(d: dict, path: str, palm_axis, thumb_side,
                      base_dir: str) -> Trajectory:
    samples = int(d.get("samples", 100))
    if "four_bar" in d:
        linkage, angle_range, branch = _four_bar_from_dict(
            _get(d, "four_bar", path, dict), f"{path}.four_bar")
        try:
            return four_bar_trajectory(linkage, angle_range, samples,
                                       pad_hint=palm_axis, side_hint=thumb_side,
                                       branch=branch)
        except ValueError as exc:
            raise ConfigError(f"{path}.four_bar: {exc}") from exc
    if "polyline_csv" in d:
        rel = _get(d, "polyline_csv", path, str)
        full = rel if os.path.isabs(rel) else os.path.join(base_dir, rel)
        if not os.path.exists(full):
            raise ConfigError(f"{path}.polyline_csv: file not found: {full}")
        try:
            return load_polyline_csv(full, pad_hint=palm_axis, side_hint=thumb_side)
        except ValueError as exc:
            raise ConfigError(f"{path}.polyline_csv: {exc}") from exc
    raise ConfigError(f"{path}: needs either 'four_bar' or 'polyline_csv'")


def hand_from_dict(d: dict, path: str, base_dir: str) -> HandModel:
    radii_d = _get(d, "fingertip_radii_mm", path, dict)
    try:
        radii = FingertipRadii(
            thumb=float(_get(radii_d, "thumb", f"{path}.fingertip_radii_mm")),
            index=float(_get(radii_d, "index", f"{path}.fingertip_radii_mm")),
            middle=float(_get(radii_d, "middle", f"{path}.fingertip_radii_mm")),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}.fingertip_radii_mm: {exc}") from exc
    palm_axis = vec3(*_get(d, "palm_axis", path))
    thumb_side = vec3(*_get(d, "thumb_side", path))

    index = _finger_from_dict(_get(d, "index", path, dict), f"{path}.index",
                              palm_axis, thumb_side, base_dir)
    middle = _finger_from_dict(_get(d, "middle", path, dict), f"{path}.middle",
                               palm_axis, thumb_side, base_dir)

    thumb_d = _get(d, "thumb", path, dict)
    sweep = _pair(thumb_d, "sweep_deg", f"{path}.thumb")
    thumb = ThumbSpec(
        radial=float(_get(thumb_d, "radial_mm", f"{path}.thumb")),
        axial=float(thumb_d.get("axial_mm", 0.0)),
        phase=float(thumb_d.get("phase_deg", 0.0)) * _DEG,
        sweep=(sweep[0] * _DEG, sweep[1] * _DEG),
        steps=int(thumb_d.get("steps", 100)),
    )
    return HandModel(index=index, middle=middle, radii=radii, thumb=thumb)


def requirements_from_dict(d: dict, path: str) -> GraspRequirements:
    try:
        return GraspRequirements(
            precision_radius=_pair(d, "precision_radius_mm", path),
            lateral_radius=_pair(d, "lateral_radius_mm", path),
            tripod_radius=_pair(d, "tripod_radius_mm", path),
            manipulation_width=_pair(d, "manipulation_width_mm", path),
            theta_min=float(_get(d, "theta_min_deg", path)) * _DEG,
            alpha_perm=float(_get(d, "alpha_perm_deg", path)) * _DEG,
            force_dir_limit=float(d.get("force_dir_limit_deg", 45.0)) * _DEG,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


_GRID_KEYS = ("x_mm", "y_mm", "z_mm", "roll_deg", "pitch_deg", "yaw_deg")


def grid_from_dict(d: dict, path: str) -> SearchGrid:
    dims = []
    for key in _GRID_KEYS:
        sub = _get(d, key, path, dict)
        scale = _DEG if key.endswith("_deg") else 1.0
        try:
            dims.append(GridDimension(
                lo=float(_get(sub, "min", f"{path}.{key}")) * scale,
                hi=float(_get(sub, "max", f"{path}.{key}")) * scale,
                count=int(_get(sub, "count", f"{path}.{key}")),
            ))
        except ValueError as exc:
            raise ConfigError(f"{path}.{key}: {exc}") from exc
    try:
        return SearchGrid(*dims)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


@dataclass(frozen=True, eq=False)
class RunConfig:
    hand: HandModel
    requirements: GraspRequirements
    grid: SearchGrid
    pinch_force_n: float
    youngs_modulus_pa: float
    output_dir: str
    heatmap_dims: tuple[str, str]
    top_k: int
    workers: int | None
    checkpoint_path: str | None
    checkpoint_every: int
    raw: dict

    @property
    def deformation_mm(self) -> float:
        from .manip import delta_m

        return delta_m(self.pinch_force_n, self.youngs_modulus_pa)

    def to_json_dict(self) -> dict:
        return self.raw


def run_config_from_dict(d: dict, base_dir: str = ".") -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("top level: expected a JSON object")
    hand = hand_from_dict(_get(d, "hand", "$", dict), "$.hand", base_dir)
    requirements = requirements_from_dict(
        _get(d, "requirements", "$", dict), "$.requirements")
    grid = grid_from_dict(_get(d, "grid", "$", dict), "$.grid")

    deform = _get(d, "deformation", "$", dict)
    force_n = float(_get(deform, "pinch_force_n", "$.deformation"))
    if "youngs_modulus_kpa" in deform:
        youngs_pa = float(deform["youngs_modulus_kpa"]) * 1000.0
    elif "youngs_modulus_pa" in deform:
        youngs_pa = float(deform["youngs_modulus_pa"])
    else:
        raise ConfigError("$.deformation: needs youngs_modulus_kpa or youngs_modulus_pa")
    if force_n <= 0 or youngs_pa <= 0:
        raise ConfigError("$.deformation: force and modulus must be positive")

    output = d.get("output", {})
    out_dir = output.get("dir", "thumbopt_out")
    heatmap_dims = tuple(output.get("heatmap_dims", ["x", "y"]))
    if (len(heatmap_dims) != 2
            or any(k not in ("x", "y", "z", "roll", "pitch", "yaw")
                   for k in heatmap_dims)
            or heatmap_dims[0] == heatmap_dims[1]):
        raise ConfigError("$.output.heatmap_dims: expected two distinct axis names")

    run = d.get("run", {})
    workers = run.get("workers")
    if workers is not None:
        workers = int(workers)
        if workers < 1:
            raise ConfigError("$.run.workers: must be >= 1")

    return RunConfig(
        hand=hand,
        requirements=requirements,
        grid=grid,
        pinch_force_n=force_n,
        youngs_modulus_pa=youngs_pa,
        output_dir=out_dir,
        heatmap_dims=heatmap_dims,  # type: ignore[arg-type]
        top_k=int(run.get("top_k", 10)),
        workers=workers,
        checkpoint_path=run.get("checkpoint_path"),
        checkpoint_every=int(run.get("checkpoint_every", 250_000)),
        raw=d,
    )


def load_run_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return run_config_from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))


# ---------------------------------------------------------------------------
# Reference hand (non-authoritative dimensions, tuned to a 130 x 210 mm hand)
# ---------------------------------------------------------------------------

#: Palm coordinate convention: +x radial (thumb side), +y distal (along the
#: fingers), +z palmar (out of the palm, where grasped objects sit).
#: Dimensions are plausible values scaled to a 130 x 210 mm hand, tuned so
#: the stock requirement set is satisfiable; they are NOT published data.
REFERENCE_HAND = {
    "fingertip_radii_mm": {"thumb": 8.0, "index": 8.0, "middle": 8.0},
    "palm_axis": [0.0, 0.0, 1.0],
    "thumb_side": [1.0, 0.0, 0.0],
    "index": {
        "samples": 24,
        "four_bar": {
            "origin_mm": [18.0, 35.0, 0.0],
            "plane_u": [0.0, 1.0, 0.0],
            "plane_v": [0.0, 0.0, 1.0],
            "ground_mm": 25.0,
            "input_mm": 18.0,
            "coupler_mm": 45.0,
            "output_mm": 22.0,
            "coupler_offset_mm": [73.6029175323713, -5.120757845451644],
            "input_range_deg": [185.59573320474615, 195.60167245355728],
            "branch": "open",
        },
    },
    "middle": {
        "samples": 24,
        "four_bar": {
            "origin_mm": [-8.0, 37.0, 0.0],
            "plane_u": [0.0, 1.0, 0.0],
            "plane_v": [0.0, 0.0, 1.0],
            "ground_mm": 25.75,
            "input_mm": 18.54,
            "coupler_mm": 46.35,
            "output_mm": 22.66,
            "coupler_offset_mm": [75.81100505834245, -5.274380480815193],
            "input_range_deg": [185.59573320474615, 195.60167245355728],
            "branch": "open",
        },
    },
    "thumb": {
        "radial_mm": 104.87451798752498,
        "axial_mm": -1.4958059530985033,
        "phase_deg": 0.0,
        "sweep_deg": [0.0, 205.53540004821636],
        "steps": 160,
    },
}

#: Axis placement from which all Table-style requirements hold on the
#: reference hand (CLI/boundary units: mm and degrees).
REFERENCE_AXIS_DEG = {
    "x": 85.50322665627827,
    "y": 14.952454462285967,
    "z": 97.52935553897686,
    "roll_deg": math.degrees(-1.0879718970857395),
    "pitch_deg": math.degrees(0.49086332177920367),
    "yaw_deg": math.degrees(0.8958167271312267),
}

REFERENCE_REQUIREMENTS = {
    "precision_radius_mm": [0.0, 60.0],
    "lateral_radius_mm": [0.0, 30.0],
    "tripod_radius_mm": [10.0, 80.0],
    "manipulation_width_mm": [0.0, 30.0],
    "theta_min_deg": 110.0,
    "alpha_perm_deg": 30.0,
    "force_dir_limit_deg": 45.0,
}

REFERENCE_DEFORMATION = {"pinch_force_n": 10.0, "youngs_modulus_kpa": 134.3}


def _centered_dim(center: float, step: float, count: int,
                  center_index: int) -> dict:
    """Grid dimension whose lattice lands exactly on `center`."""
    lo = center - center_index * step
    hi = lo + (count - 1) * step
    return {"min": lo, "max": hi, "count": count}


#: Desk-scale refinement box around the reference axis (3^6 = 729 configs).
REFERENCE_DESK_GRID = {
    "x_mm": _centered_dim(REFERENCE_AXIS_DEG["x"], 2.5, 3, 1),
    "y_mm": _centered_dim(REFERENCE_AXIS_DEG["y"], 2.5, 3, 1),
    "z_mm": _centered_dim(REFERENCE_AXIS_DEG["z"], 2.5, 3, 1),
    "roll_deg": _centered_dim(REFERENCE_AXIS_DEG["roll_deg"], 2.0, 3, 1),
    "pitch_deg": _centered_dim(REFERENCE_AXIS_DEG["pitch_deg"], 2.0, 3, 1),
    "yaw_deg": _centered_dim(REFERENCE_AXIS_DEG["yaw_deg"], 2.0, 3, 1),
}

#: Axis placement that stays valid at the coarse scale-sweep discretization
#: (12 trajectory samples, 20 thumb steps); lies on the scale-grid lattice.
REFERENCE_SCALE_AXIS_DEG = {
    "x": 73.9381278014147,
    "y": 11.952454462285967,
    "z": 102.17935553897686,
    "roll_deg": math.degrees(-1.0879718970857395),
    "pitch_deg": math.degrees(0.5385876213573285),
    "yaw_deg": math.degrees(0.9318167271312267),
}

#: Discretization used by the scale sweep (recorded in run metadata; coarser
#: grids change critical points, so scale results are not comparable to
#: desk-scale results).
SCALE_SAMPLES = 12
SCALE_THUMB_STEPS = 20

#: Scale sweep reproducing the published exploration count:
#: 20*20*20 * 8*15*20 = 19,200,000 axis placements over a hand-size box
#: (positions span ~114 mm per axis, orientations 84-152 degrees). The
#: factorization is a documented choice; only the total is the published
#: number.
REFERENCE_SCALE_GRID = {
    "x_mm": _centered_dim(REFERENCE_SCALE_AXIS_DEG["x"], 6.0, 20, 9),
    "y_mm": _centered_dim(REFERENCE_SCALE_AXIS_DEG["y"], 6.0, 20, 9),
    "z_mm": _centered_dim(REFERENCE_SCALE_AXIS_DEG["z"], 6.0, 20, 12),
    "roll_deg": _centered_dim(REFERENCE_SCALE_AXIS_DEG["roll_deg"], 12.0, 8, 3),
    "pitch_deg": _centered_dim(REFERENCE_SCALE_AXIS_DEG["pitch_deg"], 8.0, 15, 7),
    "yaw_deg": _centered_dim(REFERENCE_SCALE_AXIS_DEG["yaw_deg"], 8.0, 20, 9),
}


def reference_config_dict(grid: dict | None = None, samples: int | None = None,
                          thumb_steps: int | None = None) -> dict:
    """Full reference run config as a JSON-ready dict."""
    hand = json.loads(json.dumps(REFERENCE_HAND))  # deep copy
    if samples is not None:
        hand["index"]["samples"] = samples
        hand["middle"]["samples"] = samples
    if thumb_steps is not None:
        hand["thumb"]["steps"] = thumb_steps
    return {
        "version": 1,
        "units": {"length": "mm", "angle": "deg"},
        "hand": hand,
        "requirements": dict(REFERENCE_REQUIREMENTS),
        "deformation": dict(REFERENCE_DEFORMATION),
        "grid": json.loads(json.dumps(grid if grid is not None
                                      else REFERENCE_DESK_GRID)),
        "output": {"dir": "thumbopt_out", "heatmap_dims": ["x", "z"]},
        "run": {"top_k": 10, "workers": None, "checkpoint_path": None,
                "checkpoint_every": 250000},
    }


def scale_config_dict() -> dict:
    """Run config for the 19,200,000-configuration sweep."""
    cfg = reference_config_dict(grid=REFERENCE_SCALE_GRID,
                                samples=SCALE_SAMPLES,
                                thumb_steps=SCALE_THUMB_STEPS)
    cfg["output"]["dir"] = "thumbopt_scale_out"
    cfg["run"]["checkpoint_path"] = "thumbopt_scale.ckpt.json"
    return cfg


def reference_hand(samples: int | None = None,
                   thumb_steps: int | None = None) -> HandModel:
    """The shipped reference hand as a HandModel."""
    cfg = reference_config_dict(samples=samples, thumb_steps=thumb_steps)
    return hand_from_dict(cfg["hand"], "$.hand", ".")


def reference_axis() -> "AxisConfig":
    """The shipped valid axis placement (desk-scale discretization)."""
    from .geom import AxisConfig

    a = REFERENCE_AXIS_DEG
    d = math.pi / 180.0
    return AxisConfig(a["x"], a["y"], a["z"], a["roll_deg"] * d,
                      a["pitch_deg"] * d, a["yaw_deg"] * d)


def reference_requirements() -> GraspRequirements:
    return requirements_from_dict(dict(REFERENCE_REQUIREMENTS), "$.requirements")
