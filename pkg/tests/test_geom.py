"""Geometry primitives and sphere-contact solvers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from thumbopt.geom import (
    AxisConfig,
    SphereFingertip,
    angle_between,
    axis_frame,
    contact_angle,
    r_max_batch,
    r_min_batch,
    rotate_about_axis,
    solve_R_max,
    solve_R_min,
    solve_object_placement,
    unit_vec3,
    vec3,
    wrap_angle,
)
from thumbopt.oracle import oracle_contact_angle, oracle_r_max

# frozen from oracle_contact_angle on the isoceles case r=5/5, d=30, R=20;
# equals 2*asin(15/25)
ISOCELES_THETA = 1.2870022175865687


def tips(d, r_a, r_b):
    return (SphereFingertip(vec3(0, 0, 0), r_a),
            SphereFingertip(vec3(d, 0, 0), r_b))


class TestAxisFrame:
    def test_identity(self):
        f = axis_frame(AxisConfig(0, 0, 0, 0, 0, 0))
        assert np.allclose(f.rotation, np.eye(3), atol=1e-12)
        assert np.allclose(f.translation, 0.0)

    def test_pure_translation(self):
        f = axis_frame(AxisConfig(10, 0, 0, 0, 0, 0))
        assert np.allclose(f.rotation, np.eye(3), atol=1e-12)
        assert np.allclose(f.apply(vec3(0, 0, 0)), [10, 0, 0])

    def test_quarter_turn_maps_x_to_y(self):
        f = axis_frame(AxisConfig(0, 0, 0, 0, 0, math.pi / 2))
        assert np.allclose(f.apply_vector(vec3(1, 0, 0)), [0, 1, 0], atol=1e-12)

    @given(hs.lists(hs.floats(-math.pi, math.pi), min_size=6, max_size=6))
    @settings(max_examples=200)
    def test_orthonormal_and_invertible(self, vals):
        cfg = AxisConfig(vals[0] * 30, vals[1] * 30, vals[2] * 30,
                         vals[3], vals[4], vals[5])
        f = axis_frame(cfg)
        r = f.rotation
        assert abs(np.linalg.det(r) - 1.0) < 1e-9
        assert np.allclose(r @ r.T, np.eye(3), atol=1e-9)
        p = vec3(3.0, -7.0, 11.0)
        assert np.allclose(f.inverse().apply(f.apply(p)), p, atol=1e-9)

    def test_angle_normalization(self):
        cfg = AxisConfig(0, 0, 0, 3 * math.pi, -math.pi, 2 * math.pi)
        assert -math.pi < cfg.roll <= math.pi
        assert cfg.pitch == math.pi  # -pi wraps to +pi
        assert abs(cfg.yaw) < 1e-12


class TestRotateAboutAxis:
    def test_point_on_axis_fixed(self):
        p = vec3(2, 2, 5)
        out = rotate_about_axis(p, vec3(2, 2, 0), vec3(0, 0, 1), 1.234)
        assert np.allclose(out, p, atol=1e-12)

    def test_half_turn(self):
        out = rotate_about_axis(vec3(1, 0, 0), vec3(0, 0, 0), vec3(0, 0, 1),
                                math.pi)
        assert np.allclose(out, [-1, 0, 0], atol=1e-12)

    @given(hs.lists(hs.floats(-50, 50), min_size=3, max_size=3),
           hs.floats(0, 2 * math.pi))
    @settings(max_examples=200)
    def test_full_turn_identity_and_distance_preserved(self, coords, angle):
        p = vec3(*coords)
        axis_pt = vec3(1, 2, 3)
        axis_dir = unit_vec3(vec3(1, 1, 1))
        full = rotate_about_axis(p, axis_pt, axis_dir, 2 * math.pi)
        assert np.allclose(full, p, atol=1e-9)
        rot = rotate_about_axis(p, axis_pt, axis_dir, angle)

        def dist_to_axis(q):
            v = q - axis_pt
            return np.linalg.norm(v - np.dot(v, axis_dir) * axis_dir)

        assert abs(dist_to_axis(rot) - dist_to_axis(p)) < 1e-9
        # distance along the axis is preserved too
        assert abs(np.dot(rot - axis_pt, axis_dir)
                   - np.dot(p - axis_pt, axis_dir)) < 1e-9


class TestAngleBetween:
    def test_equal_vectors(self):
        assert angle_between(vec3(0, 0, 1), vec3(0, 0, 1)) == 0.0

    def test_opposite_vectors(self):
        assert abs(angle_between(vec3(1, 0, 0), vec3(-1, 0, 0)) - math.pi) < 1e-15

    def test_orthogonal(self):
        assert abs(angle_between(vec3(1, 0, 0), vec3(0, 1, 0)) - math.pi / 2) < 1e-12

    def test_robust_near_zero(self):
        u = unit_vec3(vec3(1, 0, 0))
        v = unit_vec3(vec3(1, 1e-9, 0))
        assert 0 < angle_between(u, v) < 1e-8


class TestObjectPlacement:
    def test_collinear_contact_is_pi(self):
        a, b = tips(2 * 20 + 5 + 5, 5, 5)
        theta = solve_object_placement(a, b, 20)
        assert theta is not None and abs(theta - math.pi) < 1e-9

    def test_isoceles_case_matches_oracle(self):
        a, b = tips(30, 5, 5)
        theta = solve_object_placement(a, b, 20)
        assert abs(theta - ISOCELES_THETA) < 1e-9
        oracle = oracle_contact_angle(a, b, 20)
        assert abs(oracle - ISOCELES_THETA) < 1e-6

    def test_separation_beyond_reach_infeasible(self):
        a, b = tips(2 * 20 + 5 + 5 + 0.001, 5, 5)
        assert solve_object_placement(a, b, 20) is None
        assert oracle_contact_angle(a, b, 20) is None

    @given(hs.floats(3, 12), hs.floats(3, 12), hs.floats(1, 80),
           hs.floats(0.05, 0.95))
    @settings(max_examples=300)
    def test_theta_strictly_decreasing_in_radius(self, r_a, r_b, d_extra, frac):
        d = abs(r_a - r_b) + d_extra
        r_lo = max(0.0, (d - r_a - r_b) / 2.0) + 0.01
        r_hi = r_lo + 40.0
        r_mid = r_lo + frac * (r_hi - r_lo)
        t_lo = contact_angle(d, r_a, r_b, r_lo)
        t_mid = contact_angle(d, r_a, r_b, r_mid)
        t_hi = contact_angle(d, r_a, r_b, r_hi)
        assert t_lo is not None and t_mid is not None and t_hi is not None
        assert t_lo > t_mid > t_hi


class TestRMin:
    def test_touching_fingertips(self):
        assert solve_R_min(10.0, 5.0, 5.0) == 0.0

    def test_arithmetic(self):
        assert solve_R_min(30.0, 5.0, 5.0) == 10.0

    def test_interpenetration_clamps(self):
        assert solve_R_min(7.0, 5.0, 5.0) == 0.0


class TestRMax:
    def test_collinear_limit(self):
        r = solve_R_max(40.0, 5.0, 5.0, math.pi)
        assert r is not None and abs(r - (40.0 - 10.0) / 2.0) < 1e-9

    def test_table_case_matches_bisection_oracle(self):
        theta_min = math.radians(110.0)
        main = solve_R_max(40.0, 5.0, 5.0, theta_min)
        ref = oracle_r_max(40.0, 5.0, 5.0, theta_min, radius_step=0.5)
        assert main is not None and ref is not None
        assert abs(main - ref) < 1e-6
        # closed form for the symmetric case: d / (2 sin(theta/2)) - r
        assert abs(main - (40.0 / (2 * math.sin(theta_min / 2)) - 5.0)) < 1e-9

    def test_small_separation_branches(self):
        # d <= r_a + r_b: a grasp exists only when theta(0) clears theta_min
        theta_at_zero = contact_angle(8.0, 5.0, 5.0, 0.0)
        ok = solve_R_max(8.0, 5.0, 5.0, theta_at_zero - 0.01)
        assert ok is not None
        assert solve_R_max(8.0, 5.0, 5.0, theta_at_zero + 0.01) is None
        # brute scan: no feasible radius reaches the raised threshold
        for radius in np.arange(0.0, 30.0, 0.05):
            t = contact_angle(8.0, 5.0, 5.0, float(radius))
            if t is not None:
                assert t < theta_at_zero + 0.01

    @given(hs.floats(3, 12), hs.floats(3, 12), hs.floats(2, 100),
           hs.floats(math.radians(95), math.radians(175)))
    @settings(max_examples=300)
    def test_round_trip_theta(self, r_a, r_b, d_extra, theta_min):
        d = abs(r_a - r_b) + d_extra
        r = solve_R_max(d, r_a, r_b, theta_min)
        if r is None:
            return
        theta = contact_angle(d, r_a, r_b, r)
        assert theta is not None and abs(theta - theta_min) < 1e-5

    def test_batch_matches_scalar(self):
        theta_min = math.radians(110.0)
        dists = np.array([5.0, 12.0, 40.0, 90.0, 1.0])
        batch = r_max_batch(dists, 5.0, 7.0, theta_min)
        for d, rb in zip(dists, batch):
            scalar = solve_R_max(float(d), 5.0, 7.0, theta_min)
            if scalar is None:
                assert math.isnan(rb)
            else:
                assert rb == scalar
        rmin = r_min_batch(dists, 5.0, 7.0)
        for d, rm in zip(dists, rmin):
            assert rm == solve_R_min(float(d), 5.0, 7.0)


class TestWrapAngle:
    @given(hs.floats(-50, 50))
    @settings(max_examples=200)
    def test_range_and_equivalence(self, a):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi
        assert abs(math.sin(w) - math.sin(a)) < 1e-9
        assert abs(math.cos(w) - math.cos(a)) < 1e-9


class TestSphereFingertip:
    def test_rejects_nonpositive_radius(self):
        with pytest.raises(ValueError):
            SphereFingertip(vec3(0, 0, 0), 0.0)
