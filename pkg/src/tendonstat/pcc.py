"""Piecewise-constant-curvature kinematic baseline.

Each segment is a circular arc of curvature kappa in a bending plane at
azimuth phi, composed base-to-tip. Used as the comparison reference for the
statics solvers: it consumes only per-segment tip orientations and the
segment arc lengths, never forces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainModel
from .screws import Pose, log_pose, quaternion_to_rotation

# Below |kappa * s| the arc map switches to its series expansion.
_SMALL_BEND = 1e-6
# Relative rotations closer to identity than this are reported as straight.
_DEGENERATE_BEND = 1e-9


@dataclass(frozen=True)
class ArcParams:
    """One constant-curvature segment: curvature (1/m), bending-plane azimuth
    (rad, normalized into (-pi, pi]), arc length (m)."""

    curvature: float
    plane_angle: float
    arc_length: float

    def __post_init__(self):
        if not self.arc_length > 0.0:
            raise ValueError(f"arc length must be positive, got {self.arc_length}")
        if not np.isfinite(self.curvature):
            raise ValueError("curvature must be finite")
        phi = math.remainder(self.plane_angle, 2.0 * math.pi)
        if phi <= -math.pi:
            phi += 2.0 * math.pi
        object.__setattr__(self, "plane_angle", phi)

    @property
    def bend_angle(self) -> float:
        return self.curvature * self.arc_length


def _rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def arc_pose(arc: ArcParams, fraction: float = 1.0) -> Pose:
    """Pose of the point a given arc-length fraction along one segment.

    The in-plane map places the tip at ((1-cos b)/kappa, 0, sin(b)/kappa)
    with orientation R_y(b), b = kappa * s; the bending plane is selected by
    conjugation with R_z(phi). A series branch keeps the straight limit
    continuous.
    """
    s = arc.arc_length * fraction
    beta = arc.curvature * s
    if abs(beta) < _SMALL_BEND:
        # (1 - cos b)/kappa = s * (b/2 - b^3/24 + ...), sin(b)/kappa = s * (1 - b^2/6 + ...)
        x = s * (beta / 2.0 - beta**3 / 24.0)
        z = s * (1.0 - beta**2 / 6.0)
    else:
        x = (1.0 - math.cos(beta)) / arc.curvature
        z = math.sin(beta) / arc.curvature
    rz = _rot_z(arc.plane_angle)
    rotation = rz @ _rot_y(beta) @ rz.T
    position = rz @ np.array([x, 0.0, z])
    return Pose(rotation, position)


def pcc_segment_tips(arcs: list[ArcParams]) -> list[Pose]:
    """Cumulative tip pose after each segment, base frame."""
    tips = []
    current = Pose.identity()
    for arc in arcs:
        current = current @ arc_pose(arc)
        tips.append(current)
    return tips


def pcc_forward(arcs: list[ArcParams]) -> Pose:
    """End-effector pose of the composed constant-curvature segments."""
    return pcc_segment_tips(arcs)[-1]


def pcc_bead_poses(model: ChainModel, arcs: list[ArcParams]) -> list[Pose]:
    """Arc poses sampled at the chain's bead stations (one per bead)."""
    if len(arcs) != model.n_segments:
        raise ValueError(f"expected {model.n_segments} arcs, got {len(arcs)}")
    poses = []
    base = Pose.identity()
    for seg, arc in enumerate(arcs):
        for b in range(model.beads_per_segment):
            poses.append(base @ arc_pose(arc, (b + 1) / model.beads_per_segment))
        base = base @ arc_pose(arc)
    return poses


def pcc_tendon_lengths(model: ChainModel, arcs: list[ArcParams]) -> np.ndarray:
    """Ideal-arc tendon lengths, accumulated over every segment a tendon
    crosses: l = sum_m s_m - b_m (r_x cos phi_m + r_y sin phi_m)."""
    if len(arcs) != model.n_segments:
        raise ValueError(f"expected {model.n_segments} arcs, got {len(arcs)}")
    out = np.zeros(model.n_tendons)
    for i, tendon in enumerate(model.tendons):
        total = 0.0
        for arc in arcs[:tendon.segment]:
            beta = arc.bend_angle
            proj = (tendon.offset[0] * math.cos(arc.plane_angle)
                    + tendon.offset[1] * math.sin(arc.plane_angle))
            total += arc.arc_length - beta * proj
        out[i] = total
    return out


def pcc_discretized_theta(model: ChainModel, arcs: list[ArcParams]) -> np.ndarray:
    """Joint vector discretizing the arcs on the chain's alternating hinges.

    The bend about the plane normal is split evenly over each segment's
    joints, component-wise per hinge axis. Exact for planar bends aligned
    with one hinge family; first-order for general plane angles.
    """
    if len(arcs) != model.n_segments:
        raise ValueError(f"expected {model.n_segments} arcs, got {len(arcs)}")
    n_b = model.beads_per_segment
    theta = np.zeros(model.n_joints)
    for seg, arc in enumerate(arcs):
        beta = arc.bend_angle
        normal = np.array([-math.sin(arc.plane_angle), math.cos(arc.plane_angle), 0.0])
        joints = range(seg * n_b, (seg + 1) * n_b)
        for fam_axis in (np.array([1.0, 0, 0]), np.array([0.0, 1, 0])):
            fam = [j for j in joints if abs(model.joints[j].axis[:3] @ fam_axis) > 0.5]
            if fam:
                comp = beta * float(normal @ fam_axis)
                for j in fam:
                    theta[j] = comp / len(fam) * float(model.joints[j].axis[:3] @ fam_axis)
    return theta


def segment_arc_length(model: ChainModel) -> float:
    """Compressed segment length used as the PCC arc length (n_b beads)."""
    return model.beads_per_segment * model.beads[0].height


def pcc_from_tip_quaternion(model: ChainModel, quaternions) -> list[ArcParams]:
    """Recover per-segment arc parameters from measured tip orientations.

    ``quaternions`` are scalar-first unit quaternions of each segment tip in
    the base frame. Near-identity relative rotations (degenerate, kappa -> 0)
    return the canonical straight arc with phi = 0.
    """
    rotations = [quaternion_to_rotation(q) for q in quaternions]
    if len(rotations) != model.n_segments:
        raise ValueError(f"expected {model.n_segments} tip orientations, got {len(rotations)}")
    s = segment_arc_length(model)
    arcs = []
    prev = np.eye(3)
    for r_tip in rotations:
        rel = prev.T @ r_tip
        screw, beta = log_pose(Pose(rel, np.zeros(3)))
        if abs(beta) < _DEGENERATE_BEND:
            arcs.append(ArcParams(curvature=0.0, plane_angle=0.0, arc_length=s))
        else:
            axis = screw[:3]
            phi = math.atan2(axis[1], axis[0]) - math.pi / 2.0
            arcs.append(ArcParams(curvature=beta / s, plane_angle=phi, arc_length=s))
        prev = r_tip
    return arcs
