"""End-effector error metrics."""

import math

import numpy as np

from tendonstat.metrics import pose_error
from tendonstat.screws import Pose, exp_screw, log_pose, screw_axis

RNG = np.random.default_rng(5)


def random_pose(rng):
    s = screw_axis(rng.normal(size=3), rng.normal(size=3))
    return exp_screw(s, rng.uniform(0.05, 2.0))


HOME = Pose(np.eye(3), np.array([0.0, 0.0, 0.5]))


def test_identical_poses_have_zero_error():
    p = random_pose(RNG)
    err = pose_error(p, p, HOME)
    assert err.e_theta == 0.0
    assert err.e_p == 0.0


def test_antipodal_rotation_gives_pi():
    ref = Pose(np.eye(3), np.array([0.1, 0.0, 0.0]))
    est = Pose(np.diag([1.0, -1.0, -1.0]), ref.position)
    err = pose_error(est, ref, HOME)
    assert err.e_theta == math.pi


def test_angle_matches_axis_angle_oracle():
    for _ in range(30):
        est, ref = random_pose(RNG), random_pose(RNG)
        rel = Pose(est.rotation @ ref.rotation.T, np.zeros(3))
        try:
            _, expected = log_pose(rel)
        except Exception:
            continue
        err = pose_error(est, ref, HOME)
        assert abs(err.e_theta - expected) <= 1e-12


def test_left_invariance_of_orientation_error():
    est, ref = random_pose(RNG), random_pose(RNG)
    q = random_pose(RNG)
    base = pose_error(est, ref, HOME).e_theta
    moved = pose_error(Pose(q.rotation @ est.rotation, est.position),
                       Pose(q.rotation @ ref.rotation, ref.position), HOME).e_theta
    assert abs(base - moved) <= 1e-10


def test_position_error_invariant_under_common_rigid_motion():
    est, ref, home = random_pose(RNG), random_pose(RNG), HOME
    q = random_pose(RNG)
    base = pose_error(est, ref, home)
    moved = pose_error(q @ est, q @ ref, q @ home)
    assert abs(base.e_p - moved.e_p) <= 1e-12
    assert abs(base.eps_p - moved.eps_p) <= 1e-10


def test_relative_metrics():
    ref = Pose(exp_screw([0, 1, 0, 0, 0, 0], 0.5).rotation, np.array([0.1, 0.0, 0.6]))
    est = Pose(exp_screw([0, 1, 0, 0, 0, 0], 0.6).rotation, np.array([0.12, 0.0, 0.6]))
    err = pose_error(est, ref, HOME)
    assert abs(err.eps_theta - err.e_theta / 0.5) < 1e-12
    assert err.eps_p == err.e_p / np.linalg.norm(ref.position - HOME.position)


def test_degenerate_reference_flags_relative_metrics():
    est = Pose(exp_screw([1, 0, 0, 0, 0, 0], 0.2).rotation, np.array([0.0, 0.01, 0.5]))
    err = pose_error(est, HOME, HOME)
    assert err.eps_theta is None
    assert err.eps_p is None
    assert err.e_theta > 0.0
    assert err.e_p > 0.0


def test_clamp_handles_roundoff_at_unity():
    # products of orthonormal matrices can push the arccos argument a few ulp
    # past 1; the clamp must map that to exactly zero angle
    r = random_pose(RNG).rotation
    est = Pose(r, np.zeros(3))
    ref = Pose(r.copy(), np.zeros(3))
    err = pose_error(est, ref, HOME)
    assert err.e_theta == 0.0
