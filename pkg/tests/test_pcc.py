"""Constant-curvature baseline: closed forms, symmetry, chain discretization."""

import math

import numpy as np
import pytest

from conftest import antagonist_tendons, make_model
from tendonstat.pcc import (
    ArcParams,
    arc_pose,
    pcc_bead_poses,
    pcc_discretized_theta,
    pcc_forward,
    pcc_from_tip_quaternion,
    pcc_segment_tips,
    pcc_tendon_lengths,
    segment_arc_length,
)
from tendonstat.screws import rotation_to_quaternion
from tendonstat.tendons import geometric_tendon_length

RNG = np.random.default_rng(13)

H = 0.0295
R_GUIDE = 0.022


def platform_like(n_b=16, segments=1):
    tendons = []
    for s in range(1, segments + 1):
        tendons += antagonist_tendons(segment=s, start_id=4 * (s - 1) + 1)
    return make_model(n_segments=segments, beads_per_segment=n_b, tendons=tendons)


class TestPccForward:
    def test_straight_limit(self):
        arcs = [ArcParams(0.0, 0.0, 0.3), ArcParams(0.0, 0.0, 0.25)]
        tip = pcc_forward(arcs)
        assert np.allclose(tip.position, [0.0, 0.0, 0.55], atol=1e-15)
        assert np.allclose(tip.rotation, np.eye(3), atol=1e-15)

    def test_quarter_circle_closed_form(self):
        s = 0.4
        arc = ArcParams(curvature=math.pi / (2 * s), plane_angle=0.0, arc_length=s)
        tip = pcc_forward([arc])
        assert np.allclose(tip.position, [2 * s / math.pi, 0.0, 2 * s / math.pi], atol=1e-12)
        # 90 degree bend about +y maps z_hat to x_hat
        assert np.allclose(tip.rotation @ np.array([0, 0, 1.0]), [1.0, 0, 0], atol=1e-12)

    def test_plane_angle_equivariance(self):
        s, kappa = 0.5, 2.0
        base = pcc_forward([ArcParams(kappa, 0.0, s)])
        for delta in [0.3, -1.2, 2.5]:
            rotated = pcc_forward([ArcParams(kappa, delta, s)])
            c, d = math.cos(delta), math.sin(delta)
            rz = np.array([[c, -d, 0], [d, c, 0], [0, 0, 1.0]])
            assert np.allclose(rotated.position, rz @ base.position, atol=1e-12)
            assert np.allclose(rotated.rotation, rz @ base.rotation @ rz.T, atol=1e-12)

    def test_continuity_at_zero_curvature(self):
        s = 0.472
        straight = pcc_forward([ArcParams(0.0, 0.0, s)])
        for kappa in [1e-9, 1e-7, 9e-7]:
            near = pcc_forward([ArcParams(kappa, 0.4, s)])
            assert np.max(np.abs(near.position - straight.position)) < 1e-6
        # no jump across the series/closed-form switch at |kappa*s| = 1e-6
        below = pcc_forward([ArcParams(0.99e-6 / s, 0.4, s)])
        above = pcc_forward([ArcParams(1.01e-6 / s, 0.4, s)])
        assert np.max(np.abs(below.position - above.position)) < 1e-8
        # series branch agrees with the naive closed form where that is
        # still numerically meaningful
        kappa = 0.99e-6 / s
        beta = kappa * s
        naive = np.array([(1 - math.cos(beta)) / kappa, 0.0, math.sin(beta) / kappa])
        series = pcc_forward([ArcParams(kappa, 0.0, s)])
        assert np.max(np.abs(series.position - naive)) < 1e-9

    def test_bead_poses_home_match_chain(self):
        from tendonstat.chain import forward_kinematics
        model = platform_like(n_b=4)
        arcs = [ArcParams(0.0, 0.0, segment_arc_length(model))]
        pcc = pcc_bead_poses(model, arcs)
        chain = forward_kinematics(model, np.zeros(4))
        for a, b in zip(pcc, chain):
            assert np.allclose(a.position, b.position, atol=1e-15)


class TestPccTendonLengths:
    def test_straight_gives_home_lengths(self):
        model = platform_like(n_b=8, segments=2)
        s = segment_arc_length(model)
        arcs = [ArcParams(0.0, 0.0, s), ArcParams(0.0, 0.0, s)]
        lengths = pcc_tendon_lengths(model, arcs)
        expected = [8 * H] * 4 + [16 * H] * 4
        assert np.allclose(lengths, expected, atol=1e-15)

    def test_antagonist_symmetry(self):
        model = platform_like(n_b=8)
        s = segment_arc_length(model)
        kappa = 1.5
        lengths = pcc_tendon_lengths(model, [ArcParams(kappa, 0.0, s)])
        assert lengths[0] == pytest.approx(s - kappa * s * R_GUIDE, abs=1e-15)
        assert lengths[1] == pytest.approx(s + kappa * s * R_GUIDE, abs=1e-15)
        assert lengths[2] == lengths[3] == pytest.approx(s, abs=1e-15)

    @pytest.mark.parametrize("n_b,limit", [(16, 0.005), (32, 0.00125), (64, 0.0004)])
    def test_discretized_chain_oracle(self, n_b, limit):
        # a quarter-circle bend discretized on the chain's y-hinges; the
        # relative gap must shrink at least quadratically with bead count
        model = platform_like(n_b=n_b)
        s = segment_arc_length(model)
        arc = ArcParams(curvature=(math.pi / 2) / s, plane_angle=0.0, arc_length=s)
        theta = pcc_discretized_theta(model, [arc])
        ideal = pcc_tendon_lengths(model, [arc])
        for i, tendon in enumerate(model.tendons):
            geo = geometric_tendon_length(model, theta, tendon)
            assert abs(geo - ideal[i]) / ideal[i] < limit

    def test_discretized_theta_total_bend(self):
        model = platform_like(n_b=16)
        s = segment_arc_length(model)
        arc = ArcParams(curvature=1.1, plane_angle=0.0, arc_length=s)
        theta = pcc_discretized_theta(model, [arc])
        assert theta.sum() == pytest.approx(arc.bend_angle, abs=1e-12)
        # x-hinges stay untouched for a bend in the x-z plane
        for j in range(0, 16, 2):
            assert theta[j] == 0.0


class TestPccFromTipQuaternion:
    def test_identity_is_straight(self):
        model = platform_like(n_b=4)
        arcs = pcc_from_tip_quaternion(model, [np.array([1.0, 0, 0, 0])])
        assert arcs[0].curvature == 0.0
        assert arcs[0].plane_angle == 0.0

    def test_axis_azimuth_construction(self):
        model = platform_like(n_b=4)
        s = segment_arc_length(model)
        beta, phi0 = 0.8, 0.6
        axis = np.array([-math.sin(phi0), math.cos(phi0), 0.0])
        from tendonstat.screws import exp_screw
        rot = exp_screw(np.concatenate([axis, np.zeros(3)]), beta).rotation
        arcs = pcc_from_tip_quaternion(model, [rotation_to_quaternion(rot)])
        assert arcs[0].curvature * s == pytest.approx(beta, abs=1e-10)
        assert arcs[0].plane_angle == pytest.approx(phi0, abs=1e-10)

    def test_round_trip_through_forward(self):
        model = platform_like(n_b=8, segments=2)
        s = segment_arc_length(model)
        arcs = [ArcParams(1.7, 0.35, s), ArcParams(0.9, -1.1, s)]
        tips = pcc_segment_tips(arcs)
        qs = [rotation_to_quaternion(t.rotation) for t in tips]
        recovered = pcc_from_tip_quaternion(model, qs)
        for got, want in zip(recovered, arcs):
            assert got.curvature == pytest.approx(want.curvature, abs=1e-9)
            assert got.plane_angle == pytest.approx(want.plane_angle, abs=1e-9)
            tip = pcc_forward(recovered)
        assert np.allclose(tip.as_matrix(), pcc_forward(arcs).as_matrix(), atol=1e-9)


class TestArcParams:
    def test_plane_angle_normalized(self):
        arc = ArcParams(1.0, 2.5 * math.pi, 0.3)
        assert -math.pi < arc.plane_angle <= math.pi
        assert arc.plane_angle == pytest.approx(0.5 * math.pi, abs=1e-12)

    def test_rejects_bad_arc_length(self):
        with pytest.raises(ValueError):
            ArcParams(1.0, 0.0, 0.0)

    def test_fraction_sampling_consistent(self):
        arc = ArcParams(2.0, 0.7, 0.4)
        half = arc_pose(arc, 0.5)
        halved = arc_pose(ArcParams(2.0, 0.7, 0.2))
        assert np.allclose(half.as_matrix(), halved.as_matrix(), atol=1e-14)
