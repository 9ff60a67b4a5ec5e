"""Tendon force and length models for partially-constrained cables.

Each cable slides through one guide per bead (at the bead's mid-height
cross-section, offset ``r`` from the centroid line) and is anchored at its
segment's terminal bead. In the lumped model the cable's whole static effect
is a pure couple on that terminal bead: the anchor pull acts along the
terminal bead's own axis, so the body-frame moment r x (-z_hat) * f is
independent of the joint vector. Every other bead receives exactly zero net
wrench; the distributed oracle below re-derives that cancellation from the
individual force applications.
"""

from __future__ import annotations

import numpy as np

from .chain import ChainModel, TendonSpec, forward_kinematics
from .errors import DimensionMismatch

# Anchor pull direction in the terminal bead's own frame (cable runs down the
# bead axis at the guide offset).
_ANCHOR_DIR_BODY = np.array([0.0, 0.0, -1.0])


def _check_tensions(model: ChainModel, f) -> np.ndarray:
    f = np.asarray(f, dtype=float).reshape(-1)
    if f.shape != (model.n_tendons,):
        raise DimensionMismatch(
            f"tension vector has length {f.shape[0]}, model has {model.n_tendons} tendons")
    return f


def unit_moment(tendon: TendonSpec) -> np.ndarray:
    """Body-frame moment on the terminal bead per newton of tension."""
    return np.cross(tendon.offset, _ANCHOR_DIR_BODY)


def tendon_moment(model: ChainModel, theta, tendon: TendonSpec, f_i: float) -> np.ndarray:
    """Wrench (pure moment) exerted on the tendon's terminal bead, in that
    bead's body frame."""
    del theta  # the body-frame couple does not depend on the configuration
    wrench = np.zeros(6)
    wrench[:3] = unit_moment(tendon) * f_i
    return wrench


def dFt_df(model: ChainModel, theta) -> np.ndarray:
    """6n x n_l map from tensions to the stacked tendon wrench.

    Column i is the stacked wrench for a unit tension on tendon i: a pure
    moment in the terminal-bead slot, zero everywhere else.
    """
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape != (model.n_joints,):
        raise DimensionMismatch(
            f"theta has length {theta.shape[0]}, model has {model.n_joints} joints")
    out = np.zeros((6 * model.n_joints, model.n_tendons))
    for i, tendon in enumerate(model.tendons):
        slot = model.terminal_bead(tendon)
        out[6 * slot:6 * slot + 3, i] = unit_moment(tendon)
    return out


def stacked_tendon_wrench(model: ChainModel, theta, f) -> np.ndarray:
    """Stacked per-bead body wrenches generated by the tensions ``f``.

    Linear in ``f``; only segment-terminal slots are populated, and those are
    pure couples.
    """
    f = _check_tensions(model, f)
    return dFt_df(model, theta) @ f


def guide_points(model: ChainModel, theta, tendon: TendonSpec) -> np.ndarray:
    """Base-frame positions of the cable's guide polyline vertices.

    Entry 0 is the guide in the base mount, then one mid-bead guide per bead
    up to and including the terminal bead.
    """
    poses = forward_kinematics(model, theta)
    terminal = model.terminal_bead(tendon)
    pts = np.zeros((terminal + 2, 3))
    base_h = model.beads[0].height
    pts[0] = tendon.offset + np.array([0.0, 0.0, base_h / 2.0])
    for j in range(terminal + 1):
        local = tendon.offset + np.array([0.0, 0.0, model.beads[j].height / 2.0])
        pts[j + 1] = poses[j].apply(local)
    return pts


def geometric_tendon_length(model: ChainModel, theta, tendon: TendonSpec) -> float:
    """Polyline length through the cable's guide points (nonlinear oracle for
    the coupling matrix)."""
    pts = guide_points(model, theta, tendon)
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


def coupling_matrix(model: ChainModel) -> np.ndarray:
    """Constant n_l x n map from joint angles to tendon length changes.

    Entry (i, j) is the first-order moment arm of tendon i about joint j,
    axis_j . (r_i x z_hat): bending toward the tendon's side shortens it.
    Joints beyond the tendon's terminal bead contribute nothing.
    """
    z_hat = np.array([0.0, 0.0, 1.0])
    out = np.zeros((model.n_tendons, model.n_joints))
    for i, tendon in enumerate(model.tendons):
        arm = np.cross(tendon.offset, z_hat)
        terminal = model.terminal_bead(tendon)
        for j in range(terminal + 1):
            out[i, j] = float(model.joints[j].axis[:3] @ arm)
    return out


def rest_lengths(model: ChainModel) -> np.ndarray:
    """Cable lengths at theta = 0 (geometric, unless overridden per tendon)."""
    zeros = np.zeros(model.n_joints)
    return np.array([
        t.rest_length if t.rest_length is not None
        else geometric_tendon_length(model, zeros, t)
        for t in model.tendons
    ])


def extensibility_matrix(model: ChainModel) -> np.ndarray:
    return np.diag([t.extensibility for t in model.tendons])


def tendon_length(model: ChainModel, theta, f) -> np.ndarray:
    """Linearized length model: P_theta @ theta + l_0 - lambda_t @ f."""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    f = _check_tensions(model, f)
    p_theta = coupling_matrix(model)
    return p_theta @ theta + rest_lengths(model) - extensibility_matrix(model) @ f


def distributed_force_oracle(model: ChainModel, theta, f,
                             traction: str = "axis") -> list[np.ndarray]:
    """Un-lumped tendon force model: per-bead net body wrenches.

    Applies the per-joint force pairs of the elastic-joint reasoning at the
    joint centers plus the terminal anchor traction at the anchor guide, then
    sums force/moment per bead. ``traction`` selects the anchor pull
    direction: "axis" uses the terminal bead's axis (the idealization behind
    the lumped model), "polyline" uses the geometric direction toward the
    previous guide, exposing the small-spacing approximation error. Test-only
    validation device for the lumped cancellation argument.
    """
    if traction not in ("axis", "polyline"):
        raise ValueError(f"traction must be 'axis' or 'polyline', got {traction!r}")
    f = _check_tensions(model, f)
    poses = forward_kinematics(model, theta)
    n = model.n_joints
    forces = [np.zeros(3) for _ in range(n)]   # base-frame net force per bead
    moments = [np.zeros(3) for _ in range(n)]  # base-frame net moment about each bead frame

    def apply_force(bead: int, point: np.ndarray, force: np.ndarray) -> None:
        forces[bead] += force
        moments[bead] += np.cross(point - poses[bead].position, force)

    z_hat = np.array([0.0, 0.0, 1.0])
    for i, tendon in enumerate(model.tendons):
        if f[i] == 0.0:
            continue
        terminal = model.terminal_bead(tendon)
        axes_tipward = [poses[j].rotation @ z_hat for j in range(terminal + 1)]
        # Crossing at joint j pulls the two adjacent beads toward each other,
        # each along its own axis; the base-side partner of joint 0 is ground.
        for j in range(terminal + 1):
            if j >= 1:
                apply_force(j - 1, poses[j].position, -f[i] * axes_tipward[j - 1])
            apply_force(j, poses[j].position, f[i] * axes_tipward[j])
        pts = guide_points(model, theta, tendon)
        anchor = pts[terminal + 1]
        if traction == "axis":
            pull_dir = -axes_tipward[terminal]
        else:
            gap = pts[terminal] - anchor
            pull_dir = gap / np.linalg.norm(gap)
        apply_force(terminal, anchor, f[i] * pull_dir)

    out = []
    for j in range(n):
        r_t = poses[j].rotation.T
        out.append(np.concatenate([r_t @ moments[j], r_t @ forces[j]]))
    return out
