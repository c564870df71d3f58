"""Precision-lateral transition analysis and manipulable width intervals.

For each index-finger sample the thumb sweep (ordered from the lateral side
toward the precision side) is scanned for the last lateral-established step
and the first precision-established step at or after it. The distance
excursion over that closed step range, together with the elastic fingertip
deformation budget, bounds the object widths that stay held through the
whole transition; the overall range is the intersection across index
samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom import AxisConfig
from .grasp import GraspRequirements, establishment_masks
from .kinematics import FingertipRadii, HandModel, Trajectory


def delta_m(force_n: float, youngs_modulus_pa: float) -> float:
    """Maximum elastic fingertip deformation sqrt(F / (pi E)), in mm."""
    if not force_n > 0:
        raise ValueError("pinch force must be positive")
    if not youngs_modulus_pa > 0:
        raise ValueError("Young's modulus must be positive")
    return math.sqrt(force_n / (math.pi * youngs_modulus_pa)) * 1000.0


@dataclass(frozen=True)
class WidthInterval:
    """Closed interval of manipulable object widths [lo, hi] mm; may be empty."""

    lo: float
    hi: float
    empty: bool

    def __post_init__(self):
        if not self.empty and self.lo > self.hi:
            raise ValueError("non-empty width interval must have lo <= hi")

    @staticmethod
    def from_bounds(lo: float, hi: float) -> "WidthInterval":
        if hi < lo:
            return WidthInterval(0.0, 0.0, True)
        return WidthInterval(float(lo), float(hi), False)

    @staticmethod
    def empty_interval() -> "WidthInterval":
        return WidthInterval(0.0, 0.0, True)

    @property
    def width(self) -> float:
        return 0.0 if self.empty else self.hi - self.lo

    def contains(self, w: float) -> bool:
        return (not self.empty) and self.lo <= w <= self.hi

    def intersect(self, other: "WidthInterval") -> "WidthInterval":
        if self.empty or other.empty:
            return WidthInterval.empty_interval()
        return WidthInterval.from_bounds(max(self.lo, other.lo),
                                         min(self.hi, other.hi))

    def clipped_nonnegative(self) -> "WidthInterval":
        if self.empty:
            return self
        return WidthInterval.from_bounds(max(0.0, self.lo), self.hi)

    def coverage_of(self, required: tuple[float, float]) -> float:
        """Fraction of the required [lo, hi] range covered by this interval."""
        lo_req, hi_req = required
        if self.empty or hi_req <= lo_req:
            return 0.0
        overlap = min(self.hi, hi_req) - max(self.lo, lo_req)
        return max(0.0, overlap) / (hi_req - lo_req)


@dataclass(frozen=True)
class IndexTransition:
    """Critical points and width interval for one index-finger sample."""

    index_step: int
    j_lateral: int | None
    j_precision: int | None
    d_max: float | None
    d_min: float | None
    width: WidthInterval

    def __post_init__(self):
        if (self.j_lateral is not None and self.j_precision is not None
                and self.j_lateral > self.j_precision):
            raise ValueError("j_lateral must not exceed j_precision")


@dataclass(frozen=True)
class TransitionAnalysis:
    per_index: tuple[IndexTransition, ...]
    overall: WidthInterval


def _critical_points_from_rows(lateral_row: np.ndarray,
                               precision_row: np.ndarray) -> tuple[int, int] | None:
    lateral_js = np.flatnonzero(lateral_row)
    if lateral_js.size == 0:
        return None
    j_lateral = int(lateral_js[-1])
    precision_js = np.flatnonzero(precision_row[j_lateral:])
    if precision_js.size == 0:
        return None
    return j_lateral, j_lateral + int(precision_js[0])


def critical_points(thumb: Trajectory, index: Trajectory, index_step: int,
                    req: GraspRequirements) -> tuple[int, int] | None:
    """(j_lateral, j_precision) for one index sample, or None.

    The thumb trajectory must be ordered from the lateral-grasp side toward
    the precision-grasp side. j_lateral is the greatest thumb step whose
    pose is lateral-established at this index sample; j_precision the least
    precision-established step at or after it.
    """
    precision_mask, lateral_mask = establishment_masks(thumb, index, req)
    return _critical_points_from_rows(lateral_mask[index_step],
                                      precision_mask[index_step])


def width_interval(thumb: Trajectory, index_pos, j_range: tuple[int, int],
                   radii: FingertipRadii, deformation_mm: float) -> WidthInterval:
    """Width interval for one index position over thumb steps j_range.

    [d_max - (r_T + r_I), d_min - (r_T + r_I) + 2*delta_m] over the closed
    step range; empty when the distance excursion exceeds 2*delta_m.
    """
    j_lo, j_hi = j_range
    if j_lo > j_hi:
        raise ValueError("empty thumb step range")
    segment = thumb.positions[j_lo:j_hi + 1] - np.asarray(index_pos, dtype=float)
    dists = np.sqrt(np.sum(segment * segment, axis=1))
    d_max = float(dists.max())
    d_min = float(dists.min())
    tip_sum = radii.thumb + radii.index
    return WidthInterval.from_bounds(d_max - tip_sum,
                                     d_min - tip_sum + 2.0 * deformation_mm)


def manipulation_range(cfg: AxisConfig, hand: HandModel, req: GraspRequirements,
                       deformation_mm: float) -> TransitionAnalysis:
    """Full transition analysis for a configuration.

    The overall interval is the intersection of the per-index intervals,
    clipped to non-negative widths; it is empty as soon as any index sample
    lacks a critical-point pair or its interval vanishes.
    """
    thumb = hand.thumb_trajectory(cfg)
    return transition_for_thumb(thumb, hand, req, deformation_mm)


def transition_for_thumb(thumb: Trajectory, hand: HandModel,
                         req: GraspRequirements,
                         deformation_mm: float) -> TransitionAnalysis:
    """Transition analysis against an already-generated thumb trajectory."""
    precision_mask, lateral_mask = establishment_masks(thumb, hand.index, req)
    tip_sum = hand.radii.thumb + hand.radii.index

    records: list[IndexTransition] = []
    overall: WidthInterval | None = None
    for i in range(len(hand.index)):
        pair = _critical_points_from_rows(lateral_mask[i], precision_mask[i])
        if pair is None:
            records.append(IndexTransition(i, None, None, None, None,
                                           WidthInterval.empty_interval()))
            overall = WidthInterval.empty_interval()
            continue
        j_lat, j_prec = pair
        segment = thumb.positions[j_lat:j_prec + 1] - hand.index.positions[i]
        dists = np.sqrt(np.sum(segment * segment, axis=1))
        d_max = float(dists.max())
        d_min = float(dists.min())
        interval = WidthInterval.from_bounds(
            d_max - tip_sum, d_min - tip_sum + 2.0 * deformation_mm
        )
        records.append(IndexTransition(i, j_lat, j_prec, d_max, d_min, interval))
        overall = interval if overall is None else overall.intersect(interval)

    if overall is None:
        overall = WidthInterval.empty_interval()
    return TransitionAnalysis(tuple(records), overall.clipped_nonnegative())
