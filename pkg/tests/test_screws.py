"""Lie-algebra layer: hat/exp/log/adjoint against independent oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tendonstat.errors import AngleNearPi
from tendonstat.screws import (
    Pose,
    ad,
    adjoint,
    exp_screw,
    exp_twist,
    hat,
    log_pose,
    quaternion_to_rotation,
    rotation_to_quaternion,
    screw_axis,
)

RNG = np.random.default_rng(20240811)


def dense_expm(m: np.ndarray, order: int = 30) -> np.ndarray:
    """Scaling-and-squaring Taylor exponential for small dense matrices.

    Independent of the closed-form Rodrigues path under test.
    """
    scale = max(1, int(np.ceil(np.log2(max(1.0, np.linalg.norm(m, ord=np.inf))))) + 4)
    a = m / (2.0 ** scale)
    out = np.eye(m.shape[0])
    term = np.eye(m.shape[0])
    for k in range(1, order + 1):
        term = term @ a / k
        out = out + term
    for _ in range(scale):
        out = out @ out
    return out


def hat4(twist: np.ndarray) -> np.ndarray:
    """4x4 matrix form of a twist (angular, linear)."""
    out = np.zeros((4, 4))
    out[:3, :3] = hat(twist[:3])
    out[:3, 3] = twist[3:]
    return out


def random_screw(rng) -> np.ndarray:
    w = rng.normal(size=3)
    return screw_axis(w, rng.normal(size=3))


def random_pose(rng) -> Pose:
    s = random_screw(rng)
    return exp_screw(s, rng.uniform(-2.5, 2.5))


finite3 = st.tuples(*([st.floats(-10, 10)] * 3))


class TestHat:
    def test_zero(self):
        assert np.array_equal(hat([0, 0, 0]), np.zeros((3, 3)))

    def test_z_unit_pattern(self):
        expected = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        assert np.array_equal(hat([0, 0, 1]), expected)

    @given(v=finite3, w=finite3)
    def test_cross_product_oracle(self, v, w):
        v, w = np.array(v), np.array(w)
        # componentwise cross product, written out independently
        expected = np.array([
            v[1] * w[2] - v[2] * w[1],
            v[2] * w[0] - v[0] * w[2],
            v[0] * w[1] - v[1] * w[0],
        ])
        assert np.allclose(hat(v) @ w, expected, atol=1e-12)

    @given(v=finite3)
    def test_exactly_skew(self, v):
        m = hat(v)
        assert np.array_equal(m + m.T, np.zeros((3, 3)))


class TestExpScrew:
    def test_zero_angle_is_identity(self):
        s = screw_axis([0.3, -0.4, 0.5], [1.0, 2.0, 3.0])
        pose = exp_screw(s, 0.0)
        assert np.allclose(pose.rotation, np.eye(3), atol=1e-15)
        assert np.allclose(pose.position, 0.0, atol=1e-15)

    def test_quarter_turn_about_z(self):
        s = np.array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0])
        pose = exp_screw(s, math.pi / 2)
        assert np.allclose(pose.rotation @ np.array([1.0, 0, 0]), [0, 1, 0], atol=1e-15)
        assert np.allclose(pose.position, 0.0)

    def test_matches_dense_matrix_exponential(self):
        for _ in range(50):
            s = random_screw(RNG)
            theta = RNG.uniform(-3.0, 3.0)
            t = exp_screw(s, theta).as_matrix()
            t_ref = dense_expm(hat4(s * theta))
            assert np.allclose(t, t_ref, atol=1e-10)

    def test_small_angle_branch_continuous(self):
        s = random_screw(np.random.default_rng(7))
        for theta in [1e-12, 1e-9, 1e-8, 2e-8]:
            t = exp_screw(s, theta).as_matrix()
            t_ref = dense_expm(hat4(s * theta))
            assert np.allclose(t, t_ref, atol=1e-14)

    def test_output_rotation_revalidated(self):
        # Pose construction re-checks orthonormality; just exercise many draws.
        for _ in range(20):
            exp_screw(random_screw(RNG), RNG.uniform(-3, 3))


class TestLogPose:
    def test_identity_gives_canonical_axis(self):
        s, theta = log_pose(Pose.identity())
        assert theta == 0.0
        assert np.array_equal(s, [0, 0, 1, 0, 0, 0])

    def test_round_trip_recovers_screw(self):
        s = screw_axis([1.0, 2.0, -0.5], [0.3, 0.0, 0.7])
        pose = exp_screw(s, 0.3)
        s2, theta2 = log_pose(pose)
        assert abs(theta2 - 0.3) < 1e-9
        assert np.allclose(s2, s, atol=1e-9)

    def test_pure_translation(self):
        p = np.array([0.1, -0.2, 0.3])
        s, theta = log_pose(Pose(np.eye(3), p))
        assert np.allclose(s[:3], 0.0)
        assert abs(np.linalg.norm(s[3:]) - 1.0) < 1e-12
        assert abs(theta - np.linalg.norm(p)) < 1e-12

    def test_angle_near_pi_raises(self):
        r = np.diag([1.0, -1.0, -1.0])  # rotation by pi about x
        with pytest.raises(AngleNearPi):
            log_pose(Pose(r, np.zeros(3)))

    @settings(max_examples=60, deadline=None)
    @given(
        theta=st.floats(1e-4, math.pi - 0.01),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_exp_log_round_trip_property(self, theta, seed):
        s = random_screw(np.random.default_rng(seed))
        pose = exp_screw(s, theta)
        s2, theta2 = log_pose(pose)
        pose2 = exp_screw(s2, theta2)
        assert np.allclose(pose2.as_matrix(), pose.as_matrix(), atol=1e-9)


class TestAdjoint:
    def test_identity(self):
        assert np.array_equal(adjoint(Pose.identity()), np.eye(6))

    def test_group_homomorphism(self):
        for _ in range(30):
            t1, t2 = random_pose(RNG), random_pose(RNG)
            lhs = adjoint(t1 @ t2)
            rhs = adjoint(t1) @ adjoint(t2)
            assert np.allclose(lhs, rhs, atol=1e-10)

    def test_pure_translation_block(self):
        # with twists stacked (angular, linear), translating the frame leaves
        # the angular part alone and adds p x omega to the linear part, so
        # hat(p) sits in the lower-left block
        p = np.array([0.0, 0.0, 1.7])
        a = adjoint(Pose(np.eye(3), p))
        assert np.allclose(a[3:, :3], hat(p))
        assert np.allclose(a[:3, :3], np.eye(3))
        assert np.allclose(a[:3, 3:], 0.0)

    def test_twist_transform_physical(self):
        # rotating about z at the origin, observed from a frame displaced
        # along x: same angular velocity, linear velocity p x omega
        p = np.array([0.5, 0.0, 0.0])
        twist_b = np.array([0.0, 0.0, 2.0, 0.0, 0.0, 0.0])
        twist_a = adjoint(Pose(np.eye(3), p)) @ twist_b
        assert np.allclose(twist_a[:3], [0.0, 0.0, 2.0])
        assert np.allclose(twist_a[3:], np.cross(p, [0.0, 0.0, 2.0]))

    def test_inverse_pose_gives_inverse_adjoint(self):
        for _ in range(20):
            t = random_pose(RNG)
            assert np.allclose(adjoint(t.inverse()), np.linalg.inv(adjoint(t)), atol=1e-10)


class TestAd:
    def test_zero_twist(self):
        assert np.array_equal(ad(np.zeros(6)), np.zeros((6, 6)))

    def test_bracket_antisymmetry(self):
        for _ in range(30):
            v, w = RNG.normal(size=6), RNG.normal(size=6)
            assert np.allclose(ad(v) @ w, -(ad(w) @ v), atol=1e-12)

    def test_derivative_of_adjoint_at_zero(self):
        h = 1e-6
        for _ in range(10):
            s = random_screw(RNG)
            d = (adjoint(exp_screw(s, h)) - adjoint(exp_screw(s, -h))) / (2 * h)
            assert np.allclose(d, ad(s), atol=1e-6)


class TestQuaternions:
    def test_round_trip(self):
        for _ in range(30):
            r = random_pose(RNG).rotation
            assert np.allclose(quaternion_to_rotation(rotation_to_quaternion(r)), r, atol=1e-12)

    def test_norm_tolerance(self):
        with pytest.raises(ValueError):
            quaternion_to_rotation([1.0 + 1e-3, 0, 0, 0])
        # within tolerance: silently normalized
        quaternion_to_rotation([1.0 + 1e-7, 0, 0, 0])


def test_exp_twist_matches_exp_screw():
    s = random_screw(RNG)
    theta = 0.77
    assert np.allclose(exp_twist(s * theta).as_matrix(), exp_screw(s, theta).as_matrix())
