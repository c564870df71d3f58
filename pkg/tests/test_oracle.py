"""Self-checks of the brute-force reference implementations."""

import math

import numpy as np
import pytest

from thumbopt.config import reference_hand, reference_requirements
from thumbopt.geom import AxisConfig, SphereFingertip, contact_angle, vec3
from thumbopt.grasp import GraspRequirements, is_valid_grasp
from thumbopt.kinematics import FingertipRadii, HandModel, ThumbSpec, Trajectory
from thumbopt.manip import delta_m, manipulation_range, transition_for_thumb
from thumbopt.oracle import (
    OracleReport,
    high_precision_delta_m,
    oracle_contact_angle,
    oracle_r_max,
    oracle_validity,
    oracle_width_sweep,
    run_verification,
)

DM = delta_m(10.0, 134300.0)


def tips(d, r_a, r_b):
    return (SphereFingertip(vec3(0, 0, 0), r_a),
            SphereFingertip(vec3(d, 0, 0), r_b))


class TestContactAngleOracle:
    def test_symmetric_matches_closed_form(self):
        a, b = tips(30.0, 5.0, 5.0)
        theta = oracle_contact_angle(a, b, 20.0)
        assert abs(theta - contact_angle(30.0, 5.0, 5.0, 20.0)) < 1e-6

    def test_collinear_degenerate(self):
        a, b = tips(2 * 20.0 + 10.0, 5.0, 5.0)
        theta = oracle_contact_angle(a, b, 20.0)
        assert abs(theta - math.pi) < 1e-6

    def test_infeasible_agreement(self):
        a, b = tips(60.0, 5.0, 5.0)
        assert oracle_contact_angle(a, b, 20.0) is None
        assert contact_angle(60.0, 5.0, 5.0, 20.0) is None

    def test_asymmetric_radii(self):
        a, b = tips(42.0, 4.0, 11.0)
        theta = oracle_contact_angle(a, b, 17.0)
        assert abs(theta - contact_angle(42.0, 4.0, 11.0, 17.0)) < 1e-6

    def test_requires_minimum_samples(self):
        a, b = tips(30.0, 5.0, 5.0)
        with pytest.raises(ValueError):
            oracle_contact_angle(a, b, 20.0, samples=5)


class TestRMaxOracle:
    def test_monotone_scan_and_root(self):
        theta_min = math.radians(110.0)
        ref = oracle_r_max(40.0, 5.0, 5.0, theta_min)
        closed = 40.0 / (2 * math.sin(theta_min / 2)) - 5.0
        assert abs(ref - closed) < 1e-6

    def test_no_grasp_detected(self):
        # tips nearly touching: even a point object sees a wide-open angle,
        # but a demanding theta beyond theta(0) is unreachable
        theta_zero = contact_angle(8.0, 5.0, 5.0, 0.0)
        assert oracle_r_max(8.0, 5.0, 5.0, theta_zero + 0.05) is None


def sphere_arc_hand(radius_profile):
    """Handcrafted fixture: thumb poses on a sphere around the index tip.

    The thumb arc runs from the index side (+x) toward the palmar pad
    direction (+z) with inward-pointing motion tangents, so the lateral zone
    is the early arc, the precision zone the late arc, and the transition
    corridor crosses the dead zone at the given radial distances.
    """
    idx_pts = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1e-6]])
    unit_z = np.array([[0.0, 0.0, 1.0]] * 2)
    unit_x = np.array([[1.0, 0.0, 0.0]] * 2)
    index = Trajectory(idx_pts, unit_z.copy(), unit_z.copy(), unit_x.copy(),
                       np.array([0.0, 1.0]))
    phis = np.radians(np.linspace(0.0, 90.0, 19))
    pos = np.column_stack([
        radius_profile * np.cos(phis),
        np.zeros_like(phis),
        radius_profile * np.sin(phis),
    ])
    ghat = pos / np.linalg.norm(pos, axis=1)[:, None]
    tangents = -ghat
    pads = np.column_stack([np.zeros_like(phis), np.ones_like(phis),
                            np.zeros_like(phis)])
    thumb = Trajectory(pos, tangents, pads, pads.copy(), phis)
    middle = index
    hand = HandModel(index, middle, FingertipRadii(8.0, 8.0, 8.0),
                     ThumbSpec(50.0, 0.0, 0.0, (0.0, 1.0), 2))
    return hand, thumb


class TestWidthSweepOracle:
    def test_constant_distance_transition(self):
        radius = np.full(19, 40.0)
        hand, thumb = sphere_arc_hand(radius)
        req = reference_requirements()
        analysis = transition_for_thumb(thumb, hand, req, DM)
        assert not analysis.overall.empty
        assert abs(analysis.overall.width - 2 * DM) < 2e-6
        assert abs(analysis.overall.lo - (40.0 - 16.0)) < 2e-6

        sweep = _sweep_with_thumb(hand, thumb, req)
        assert not sweep.empty
        assert abs(sweep.lo - analysis.overall.lo) <= 0.1
        assert abs(sweep.hi - analysis.overall.hi) <= 0.1
        assert abs(sweep.width - 2 * DM) <= 0.2

    def test_excessive_excursion_empty(self):
        radius = np.linspace(40.0, 40.0 + 3 * (2 * DM + 5.0), 19)
        hand, thumb = sphere_arc_hand(radius)
        req = reference_requirements()
        analysis = transition_for_thumb(thumb, hand, req, DM)
        assert analysis.overall.empty
        sweep = _sweep_with_thumb(hand, thumb, req)
        assert sweep.empty

    def test_rejects_coarse_step(self):
        hand = reference_hand(samples=6, thumb_steps=8)
        with pytest.raises(ValueError):
            oracle_width_sweep(AxisConfig(0, 0, 0, 0, 0, 0), hand,
                               reference_requirements(), DM, width_step=0.5)


def _sweep_with_thumb(hand, thumb, req):
    """Run oracle_width_sweep against an explicit thumb trajectory."""

    class _Fixed(HandModel):
        def thumb_trajectory(self, cfg):
            return thumb

    fixed = _Fixed(hand.index, hand.middle, hand.radii, hand.thumb)
    return oracle_width_sweep(AxisConfig(0, 0, 0, 0, 0, 0), fixed, req, DM,
                              width_step=0.1)


class TestValidityOracle:
    def test_unreachable_thumb_invalid(self):
        hand = reference_hand(samples=6, thumb_steps=10)
        req = reference_requirements()
        cfg = AxisConfig(500.0, 500.0, 500.0, 0.0, 0.0, 0.0)
        verdict = oracle_validity(cfg, hand, req, radius_step=0.5)
        assert not verdict.valid
        assert not is_valid_grasp(cfg, hand, req).valid

    def test_spot_agreement_with_main_path(self):
        hand = reference_hand(samples=6, thumb_steps=10)
        req = reference_requirements()
        rng = np.random.default_rng(43)
        for _ in range(6):
            cfg = AxisConfig(
                float(rng.uniform(40, 110)), float(rng.uniform(0, 60)),
                float(rng.uniform(30, 110)), float(rng.uniform(-1.8, -0.6)),
                float(rng.uniform(-0.4, 1.0)), float(rng.uniform(-0.5, 2.0)))
            main = is_valid_grasp(cfg, hand, req)
            ref = oracle_validity(cfg, hand, req, radius_step=0.5)
            assert main.precision.ok == ref.precision_ok
            assert main.lateral.ok == ref.lateral_ok
            assert main.tripod.ok == ref.tripod_ok


class TestHighPrecisionDeltaM:
    def test_reproduces_reported_value(self):
        val = high_precision_delta_m("10", "134300")
        assert abs(val - 4.87) <= 0.005
        assert abs(val - delta_m(10.0, 134300.0)) < 1e-9


class TestOracleReport:
    def test_compare_pass_fail(self):
        ok = OracleReport.compare("c", "in", 1.0, 1.0 + 1e-7, 1e-6)
        bad = OracleReport.compare("c", "in", 1.0, 1.1, 1e-6)
        assert ok.passed and not bad.passed
        assert bad.abs_dev == pytest.approx(0.1)


class TestRunVerification:
    def test_clean_pass(self):
        reports = run_verification()
        assert reports
        failing = [r for r in reports if not r.passed]
        assert failing == []

    def test_negative_control_fails(self):
        reports = run_verification(perturb_mm=1.0)
        assert any(not r.passed for r in reports)
