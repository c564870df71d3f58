"""Exhaustive two-stage search over thumb-axis configurations.

Stage one filters the 6-DOF grid by grasp validity, stage two ranks the
survivors by manipulable width range; both are fused into one pass per
configuration (observationally equivalent to the two-pass formulation,
which the test oracle retains). Work is partitioned by linear-index chunks,
every chunk is pure, and the reduction is deterministic, so results are
bit-identical for any worker count and across checkpoint/resume.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .geom import AxisConfig
from .grasp import (
    GraspRequirements,
    GraspVerdict,
    check_lateral,
    check_precision,
    check_tripod,
    verdict_for_thumb,
)
from .kinematics import HandModel
from .manip import TransitionAnalysis, WidthInterval, transition_for_thumb

CHECKPOINT_VERSION = 1
_MAX_TOTAL = 2**63 - 1


@dataclass(frozen=True)
class GridDimension:
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("grid dimension count must be >= 1")
        if self.lo > self.hi:
            raise ValueError("grid dimension has lo > hi")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([(self.lo + self.hi) / 2.0])
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class SearchGrid:
    """Per-dimension ranges for (x, y, z, roll, pitch, yaw); positions in mm,
    angles in rad. Enumeration is row-major with x slowest and yaw fastest."""

    x: GridDimension
    y: GridDimension
    z: GridDimension
    roll: GridDimension
    pitch: GridDimension
    yaw: GridDimension

    _values: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        total = 1
        for dim in self.dimensions():
            total *= dim.count
            if total > _MAX_TOTAL:
                raise ValueError("grid total exceeds the 63-bit index limit")
        object.__setattr__(
            self, "_values", tuple(dim.values() for dim in self.dimensions())
        )

    def dimensions(self) -> tuple[GridDimension, ...]:
        return (self.x, self.y, self.z, self.roll, self.pitch, self.yaw)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(dim.count for dim in self.dimensions())

    @property
    def total(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))

    def config_at(self, linear_index: int) -> AxisConfig:
        if not (0 <= linear_index < self.total):
            raise IndexError(f"linear index {linear_index} outside grid")
        multi = np.unravel_index(linear_index, self.shape)
        vals = [float(self._values[k][multi[k]]) for k in range(6)]
        return AxisConfig(*vals)

    def grid_hash(self) -> str:
        spec = [(d.lo, d.hi, d.count) for d in self.dimensions()]
        return hashlib.sha256(repr((CHECKPOINT_VERSION, spec)).encode()).hexdigest()

    def to_json_dict(self) -> dict:
        names = ("x", "y", "z", "roll", "pitch", "yaw")
        return {
            name: {"lo": d.lo, "hi": d.hi, "count": d.count}
            for name, d in zip(names, self.dimensions())
        }


def enumerate_grid(grid: SearchGrid):
    """Yield (linear_index, AxisConfig) in deterministic row-major order."""
    for idx in range(grid.total):
        yield idx, grid.config_at(idx)


# ---------------------------------------------------------------------------
# Per-configuration evaluation
# ---------------------------------------------------------------------------

def evaluate_one(cfg: AxisConfig, hand: HandModel, req: GraspRequirements,
                 deformation_mm: float) -> tuple[GraspVerdict, WidthInterval]:
    """Grasp verdict plus manipulable width interval for one configuration.

    The interval is empty (and the transition analysis skipped) when the
    configuration is grasp-invalid.
    """
    thumb = hand.thumb_trajectory(cfg)
    verdict = verdict_for_thumb(thumb, hand, req)
    if not verdict.valid:
        return verdict, WidthInterval.empty_interval()
    analysis = transition_for_thumb(thumb, hand, req, deformation_mm)
    return verdict, analysis.overall


def evaluate_transition(cfg: AxisConfig, hand: HandModel, req: GraspRequirements,
                        deformation_mm: float) -> TransitionAnalysis:
    """Transition analysis regardless of validity (debugging aid)."""
    thumb = hand.thumb_trajectory(cfg)
    return transition_for_thumb(thumb, hand, req, deformation_mm)


@dataclass(frozen=True)
class _PruneContext:
    center: np.ndarray
    radius: float
    threshold: float


def _prune_context(hand: HandModel, req: GraspRequirements) -> _PruneContext:
    pos = hand.index.positions
    center = (pos.min(axis=0) + pos.max(axis=0)) / 2.0
    radius = float(np.max(np.linalg.norm(pos - center, axis=1)))
    biggest = max(req.precision_radius[1], req.lateral_radius[1],
                  req.tripod_radius[1])
    threshold = hand.radii.thumb + hand.radii.index + 2.0 * biggest
    return _PruneContext(center, radius, threshold)


def _circle_point_distance(center, axis_dir, circle_radius, point) -> float:
    v = np.asarray(point, dtype=float) - center
    v_ax = float(np.dot(v, axis_dir))
    v_sq = float(np.dot(v, v))
    v_perp = math.sqrt(max(0.0, v_sq - v_ax * v_ax))
    return math.hypot(v_ax, v_perp - circle_radius)


def would_prune(cfg: AxisConfig, hand: HandModel, req: GraspRequirements) -> bool:
    """Conservative bounding test: True only when the thumb circle stays so
    far from the index trajectory that no grasp radius condition can hold."""
    ctx = _prune_context(hand, req)
    return _would_prune(cfg, hand, ctx)


def _would_prune(cfg: AxisConfig, hand: HandModel, ctx: _PruneContext) -> bool:
    center, axis_dir, circle_radius = hand.thumb_circle(cfg)
    clearance = _circle_point_distance(center, axis_dir, circle_radius, ctx.center)
    return clearance - ctx.radius > ctx.threshold


_STAGES = ("pruned", "precision", "lateral", "tripod", "valid")


def _assess(cfg: AxisConfig, hand: HandModel, req: GraspRequirements,
            deformation_mm: float,
            prune_ctx: _PruneContext | None) -> tuple[str, WidthInterval]:
    """Funnel evaluation: earliest failing stage, or width interval if valid."""
    if prune_ctx is not None and _would_prune(cfg, hand, prune_ctx):
        return "pruned", WidthInterval.empty_interval()
    thumb = hand.thumb_trajectory(cfg)
    if not check_precision(thumb, hand.index, hand.radii, req).ok:
        return "precision", WidthInterval.empty_interval()
    if not check_lateral(thumb, hand.index, hand.radii, req).ok:
        return "lateral", WidthInterval.empty_interval()
    if not check_tripod(thumb, hand.index, hand.middle, hand.radii, req).ok:
        return "tripod", WidthInterval.empty_interval()
    analysis = transition_for_thumb(thumb, hand, req, deformation_mm)
    return "valid", analysis.overall


# ---------------------------------------------------------------------------
# Result containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TopEntry:
    linear_index: int
    config: AxisConfig
    interval: WidthInterval

    @property
    def width(self) -> float:
        return self.interval.width

    def sort_key(self) -> tuple[float, int]:
        return (-self.interval.width, self.linear_index)


def select_best(entries: list[TopEntry]) -> TopEntry | None:
    """Deterministic argmax: widest interval, ties to the lowest index."""
    if not entries:
        return None
    return min(entries, key=TopEntry.sort_key)


@dataclass(frozen=True)
class OptimizationResult:
    omega_opt: AxisConfig | None
    w_max: float
    w_interval: WidthInterval | None
    valid_count: int
    evaluated_count: int
    top_k: tuple[TopEntry, ...]
    stage_counts: dict
    metadata: dict
    runtime: dict
    completed: bool = True

    def same_outcome(self, other: "OptimizationResult") -> bool:
        """Equality on every deterministic field (runtime excluded)."""
        return (
            self.omega_opt == other.omega_opt
            and self.w_max == other.w_max
            and self.w_interval == other.w_interval
            and self.valid_count == other.valid_count
            and self.evaluated_count == other.evaluated_count
            and self.top_k == other.top_k
            and self.stage_counts == other.stage_counts
            and self.metadata == other.metadata
            and self.completed == other.completed
        )

    def to_json_dict(self) -> dict:
        def cfg_dict(cfg: AxisConfig) -> dict:
            return {"x": cfg.x, "y": cfg.y, "z": cfg.z,
                    "roll": cfg.roll, "pitch": cfg.pitch, "yaw": cfg.yaw}

        def interval_dict(iv: WidthInterval) -> dict:
            return {"lo": iv.lo, "hi": iv.hi, "empty": iv.empty,
                    "width": iv.width}

        return {
            "schema_version": 1,
            "omega_opt": cfg_dict(self.omega_opt) if self.omega_opt else None,
            "w_max": self.w_max,
            "w_interval": interval_dict(self.w_interval) if self.w_interval else None,
            "valid_count": self.valid_count,
            "evaluated_count": self.evaluated_count,
            "completed": self.completed,
            "top_k": [
                {"rank": rank + 1, "linear_index": e.linear_index,
                 "config": cfg_dict(e.config),
                 "interval": interval_dict(e.interval)}
                for rank, e in enumerate(self.top_k)
            ],
            "stage_counts": self.stage_counts,
            "metadata": self.metadata,
        }


@dataclass(frozen=True)
class OptimizeOptions:
    workers: int = 1
    top_k: int = 10
    chunk_size: int = 2048
    prune: bool = True
    checkpoint_path: str | None = None
    checkpoint_every: int = 250_000
    resume: bool = True
    limit: int | None = None


# ---------------------------------------------------------------------------
# Worker protocol
# ---------------------------------------------------------------------------

_WORKER_STATE: dict = {}


def _init_worker(hand, req, deformation_mm, grid, prune_ctx, top_k):
    _WORKER_STATE["args"] = (hand, req, deformation_mm, grid, prune_ctx, top_k)


def _run_chunk_with(args, start: int, stop: int):
    hand, req, deformation_mm, grid, prune_ctx, top_k = args
    counts = dict.fromkeys(_STAGES, 0)
    entries: list[tuple[int, float, float, bool]] = []
    for idx in range(start, stop):
        cfg = grid.config_at(idx)
        stage, interval = _assess(cfg, hand, req, deformation_mm, prune_ctx)
        counts[stage] += 1
        if stage == "valid":
            entries.append((idx, interval.lo, interval.hi, interval.empty))
    entries.sort(key=lambda e: (-(0.0 if e[3] else e[2] - e[1]), e[0]))
    return counts, entries[:top_k]


def _run_chunk(task):
    start, stop = task
    return _run_chunk_with(_WORKER_STATE["args"], start, stop)


def _merge_entries(acc: list, new: list, top_k: int) -> list:
    merged = acc + list(new)
    merged.sort(key=lambda e: (-(0.0 if e[3] else e[2] - e[1]), e[0]))
    return merged[:top_k]


# ---------------------------------------------------------------------------
# Checkpointing
# ---------------------------------------------------------------------------

def _inputs_hash(hand: HandModel, req: GraspRequirements, deformation_mm: float,
                 top_k: int, prune: bool) -> str:
    h = hashlib.sha256()
    h.update(hand.fingerprint().encode())
    h.update(repr((req, deformation_mm, top_k, prune)).encode())
    return h.hexdigest()


def _write_checkpoint(path: str, grid_hash: str, inputs_hash: str,
                      next_index: int, counts: dict, entries: list) -> None:
    payload = {
        "version": CHECKPOINT_VERSION,
        "grid_hash": grid_hash,
        "inputs_hash": inputs_hash,
        "next_index": next_index,
        "stage_counts": counts,
        "entries": [list(e) for e in entries],
    }
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
    os.replace(tmp, path)


def _load_checkpoint(path: str, grid_hash: str, inputs_hash: str):
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version in {path}")
    if payload["grid_hash"] != grid_hash or payload["inputs_hash"] != inputs_hash:
        raise ValueError(
            f"checkpoint {path} was produced by a different grid or input set"
        )
    entries = [(int(i), float(lo), float(hi), bool(em))
               for i, lo, hi, em in payload["entries"]]
    counts = {k: int(v) for k, v in payload["stage_counts"].items()}
    return int(payload["next_index"]), counts, entries


# ---------------------------------------------------------------------------
# The search itself
# ---------------------------------------------------------------------------

def optimize(hand: HandModel, req: GraspRequirements, grid: SearchGrid,
             deformation_mm: float,
             options: OptimizeOptions = OptimizeOptions()) -> OptimizationResult:
    """Run (or resume) the exhaustive search and return the best configuration.

    The result is identical for any worker count and for any
    interrupt/resume pattern: per-configuration evaluation is pure, chunk
    boundaries are fixed by chunk_size alone, and the reduction orders
    candidates by (width desc, linear index asc).
    """
    total = grid.total
    if total <= 0:
        raise ValueError("empty search grid")
    grid_hash = grid.grid_hash()
    inputs_hash = _inputs_hash(hand, req, deformation_mm, options.top_k,
                               options.prune)
    prune_ctx = _prune_context(hand, req) if options.prune else None

    next_index = 0
    counts = dict.fromkeys(_STAGES, 0)
    entries: list = []
    if (options.resume and options.checkpoint_path
            and os.path.exists(options.checkpoint_path)):
        next_index, counts, entries = _load_checkpoint(
            options.checkpoint_path, grid_hash, inputs_hash)

    stop_at = total
    if options.limit is not None:
        stop_at = min(total, next_index + options.limit)

    started = time.perf_counter()
    processed_at_start = next_index
    since_checkpoint = 0

    tasks = [(start, min(start + options.chunk_size, stop_at))
             for start in range(next_index, stop_at, options.chunk_size)]
    worker_args = (hand, req, deformation_mm, grid, prune_ctx, options.top_k)

    def consume(result, stop: int):
        nonlocal entries, next_index, since_checkpoint
        chunk_counts, chunk_entries = result
        for key, val in chunk_counts.items():
            counts[key] += val
        entries = _merge_entries(entries, chunk_entries, options.top_k)
        since_checkpoint += stop - next_index
        next_index = stop
        if (options.checkpoint_path
                and since_checkpoint >= options.checkpoint_every):
            _write_checkpoint(options.checkpoint_path, grid_hash, inputs_hash,
                              next_index, counts, entries)
            since_checkpoint = 0

    workers = max(1, options.workers)
    if workers == 1 or len(tasks) <= 1:
        for start, stop in tasks:
            consume(_run_chunk_with(worker_args, start, stop), stop)
    else:
        import multiprocessing as mp

        with mp.Pool(workers, initializer=_init_worker,
                     initargs=worker_args) as pool:
            for (start, stop), result in zip(tasks, pool.imap(_run_chunk, tasks)):
                consume(result, stop)

    completed = next_index >= total
    if options.checkpoint_path:
        _write_checkpoint(options.checkpoint_path, grid_hash, inputs_hash,
                          next_index, counts, entries)

    elapsed = time.perf_counter() - started
    processed = next_index - processed_at_start

    top_entries = tuple(
        TopEntry(idx, grid.config_at(idx),
                 WidthInterval.empty_interval() if em
                 else WidthInterval(lo, hi, False))
        for idx, lo, hi, em in entries
    )
    best = top_entries[0] if counts["valid"] > 0 and top_entries else None

    metadata = {
        "grid": grid.to_json_dict(),
        "grid_hash": grid_hash,
        "inputs_hash": inputs_hash,
        "grid_total": total,
        "requirements": _req_dict(req),
        "deformation_mm": deformation_mm,
        "discretization": {
            "index_samples": len(hand.index),
            "middle_samples": len(hand.middle),
            "thumb_samples": hand.thumb.steps,
        },
        "prune_enabled": options.prune,
        "top_k": options.top_k,
        "manipulation_coverage": (
            best.interval.coverage_of(req.manipulation_width) if best else 0.0
        ),
    }
    runtime = {
        "wall_time_s": elapsed,
        "workers": workers,
        "configs_per_s": (processed / elapsed) if elapsed > 0 else float("nan"),
        "processed": processed,
    }
    return OptimizationResult(
        omega_opt=best.config if best else None,
        w_max=best.interval.width if best else 0.0,
        w_interval=best.interval if best else None,
        valid_count=counts["valid"],
        evaluated_count=next_index,
        top_k=top_entries,
        stage_counts=dict(counts),
        metadata=metadata,
        runtime=runtime,
        completed=completed,
    )


def _req_dict(req: GraspRequirements) -> dict:
    return {
        "precision_radius_mm": list(req.precision_radius),
        "lateral_radius_mm": list(req.lateral_radius),
        "tripod_radius_mm": list(req.tripod_radius),
        "manipulation_width_mm": list(req.manipulation_width),
        "theta_min_rad": req.theta_min,
        "alpha_perm_rad": req.alpha_perm,
        "force_dir_limit_rad": req.force_dir_limit,
    }
