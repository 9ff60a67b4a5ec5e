"""Manipulator description and the stacked chain operators.

Frame conventions: bead ``j`` (0-based) carries a body frame at the center of
its elastic hinge, z along the chain axis at theta = 0, so every home
transform between consecutive frames is a pure z-translation by one bead
height. The bead body sits above its hinge; the center of mass therefore
defaults to (0, 0, h/2) in the bead frame. The inter-frame transform used in
the twist recursion is T[j] = exp(-A_j * theta_j) @ M[j], which expresses
frame j-1 in frame j. Forward kinematics composes the inverses base-to-tip.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

import numpy as np

from .errors import ConfigError, DimensionMismatch
from .screws import Pose, ad, check_screw_axis, exp_screw, hat

if TYPE_CHECKING:  # pragma: no cover
    from .config import ModelConfig


def cuboid_inertia(mass: float, width: float, depth: float, height: float) -> np.ndarray:
    """Centroidal inertia of a solid box (axes aligned with the edges)."""
    return np.diag([
        mass * (depth**2 + height**2) / 12.0,
        mass * (width**2 + height**2) / 12.0,
        mass * (width**2 + depth**2) / 12.0,
    ])


@dataclass(frozen=True)
class BeadSpec:
    """One rigid link: height along the chain, mass, centroidal inertia and
    the center-of-mass offset from the joint frame."""

    height: float
    mass: float
    inertia: np.ndarray
    com_offset: np.ndarray

    def __post_init__(self):
        if not self.mass > 0.0:
            raise ConfigError("bead.mass", f"must be positive, got {self.mass}")
        inertia = np.array(self.inertia, dtype=float)
        if inertia.shape != (3, 3):
            raise ConfigError("bead.inertia", f"must be 3x3, got {inertia.shape}")
        if np.max(np.abs(inertia - inertia.T)) > 1e-12:
            raise ConfigError("bead.inertia", "must be symmetric")
        if np.min(np.linalg.eigvalsh(inertia)) <= 0.0:
            raise ConfigError("bead.inertia", "must be positive definite")
        com_offset = np.array(self.com_offset, dtype=float).reshape(3)
        inertia.setflags(write=False)
        com_offset.setflags(write=False)
        object.__setattr__(self, "inertia", inertia)
        object.__setattr__(self, "com_offset", com_offset)

    def spatial_inertia(self) -> np.ndarray:
        """6x6 spatial inertia in the joint frame, (angular, linear) ordering."""
        c = hat(self.com_offset)
        m = self.mass
        out = np.zeros((6, 6))
        out[:3, :3] = self.inertia + m * (c @ c.T)
        out[:3, 3:] = m * c
        out[3:, :3] = m * c.T
        out[3:, 3:] = m * np.eye(3)
        return out


@dataclass(frozen=True)
class JointSpec:
    """Elastic hinge: unit pure-rotation screw axis, stiffness, and a damping
    coefficient that is stored but never used by the statics."""

    axis: np.ndarray
    stiffness: float
    damping: float = 0.0

    def __post_init__(self):
        axis = check_screw_axis(self.axis).copy()
        if np.linalg.norm(axis[3:]) > 1e-12:
            raise ConfigError("joint.axis", "must be a pure rotation screw")
        if self.stiffness < 0.0:
            raise ConfigError("joint.stiffness", f"must be >= 0, got {self.stiffness}")
        axis.setflags(write=False)
        object.__setattr__(self, "axis", axis)


@dataclass(frozen=True)
class TendonSpec:
    """A partially-constrained cable: slides through a guide in every bead it
    spans and terminates at its segment's last bead.

    ``offset`` is the guide position in the bead cross-section plane (zero z
    component). ``extensibility`` is the length gained per newton of tension
    (zero for inextensible cables).
    """

    id: int
    segment: int
    offset: np.ndarray
    extensibility: float = 0.0
    rest_length: Optional[float] = None

    def __post_init__(self):
        offset = np.array(self.offset, dtype=float).reshape(3)
        if abs(offset[2]) > 1e-12:
            raise ConfigError(f"tendon[{self.id}].offset",
                              "guide must lie in the bead cross-section plane (zero z)")
        if self.segment < 1:
            raise ConfigError(f"tendon[{self.id}].segment", "must be 1-based positive")
        if self.extensibility < 0.0:
            raise ConfigError(f"tendon[{self.id}].extensibility", "must be >= 0")
        offset.setflags(write=False)
        object.__setattr__(self, "offset", offset)


@dataclass(frozen=True)
class ChainModel:
    """Full manipulator description, immutable once built."""

    n_segments: int
    beads_per_segment: int
    beads: tuple[BeadSpec, ...]
    joints: tuple[JointSpec, ...]
    home_transforms: tuple[Pose, ...]
    gravity: np.ndarray
    tendons: tuple[TendonSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        n = self.n_segments * self.beads_per_segment
        if len(self.beads) != n or len(self.joints) != n or len(self.home_transforms) != n:
            raise ConfigError(
                "model", f"expected {n} beads/joints/home transforms, got "
                f"{len(self.beads)}/{len(self.joints)}/{len(self.home_transforms)}")
        axes = [j.axis[:3] for j in self.joints]
        for k in range(1, n):
            if abs(float(axes[k] @ axes[k - 1])) > 1e-9:
                raise ConfigError(f"joint[{k}].axis",
                                  "successive joint axes must be orthogonal")
            if k >= 2 and np.linalg.norm(np.cross(axes[k], axes[k - 2])) > 1e-9:
                raise ConfigError(f"joint[{k}].axis",
                                  "joint axes must alternate between two fixed directions")
        gravity = np.array(self.gravity, dtype=float).reshape(3)
        object.__setattr__(self, "gravity", gravity)
        object.__setattr__(self, "beads", tuple(self.beads))
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(self, "home_transforms", tuple(self.home_transforms))
        object.__setattr__(self, "tendons", tuple(self.tendons))
        for t in self.tendons:
            if t.segment > self.n_segments:
                raise ConfigError(f"tendon[{t.id}].segment",
                                  f"only {self.n_segments} segments available")
        # Configuration-independent operator pieces, precomputed once and
        # frozen so concurrent solves can share the model safely.
        axes3 = np.array([j.axis[:3] for j in self.joints])
        a_stack = np.zeros((6 * n, n))
        g_blocks = np.zeros((n, 6, 6))
        for j in range(n):
            a_stack[6 * j:6 * j + 6, j] = self.joints[j].axis
            g_blocks[j] = self.beads[j].spatial_inertia()
        cached = {
            "_axes3": axes3,
            "_axis_hats": np.array([hat(a) for a in axes3]),
            "_a_stack": a_stack,
            "_g_blocks": g_blocks,
            "_home_positions": np.array([p.position for p in self.home_transforms]),
            "_stiffness": np.array([j.stiffness for j in self.joints]),
        }
        gravity.setflags(write=False)
        for name, arr in cached.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_joints(self) -> int:
        return len(self.joints)

    @property
    def n_tendons(self) -> int:
        return len(self.tendons)

    def stiffness_vector(self) -> np.ndarray:
        return self._stiffness

    def terminal_bead(self, tendon: TendonSpec) -> int:
        """0-based index of the bead where the tendon is anchored."""
        return tendon.segment * self.beads_per_segment - 1

    def segment_terminals(self) -> list[int]:
        return [s * self.beads_per_segment - 1 for s in range(1, self.n_segments + 1)]


def build_chain(config: "ModelConfig") -> ChainModel:
    """Realize a chain from a validated configuration.

    Home transforms are pure z-translations of one bead height, joint axes
    alternate between x and y rotations starting with ``config.first_axis``,
    and bead inertias default to the solid-cuboid formula unless overridden.
    """
    n = config.n_segments * config.beads_per_segment
    if n < 1:
        raise ConfigError("geometry", "need at least one bead")

    h = config.bead_height
    if config.inertia_diag is not None:
        inertia = np.diag(np.asarray(config.inertia_diag, dtype=float))
    else:
        inertia = cuboid_inertia(config.bead_mass, config.bead_width, config.bead_width, h)
    beads = tuple(
        BeadSpec(height=h, mass=config.bead_mass, inertia=inertia,
                 com_offset=np.array([0.0, 0.0, h / 2.0]))
        for _ in range(n)
    )

    axes = {"x": np.array([1.0, 0, 0, 0, 0, 0]), "y": np.array([0.0, 1, 0, 0, 0, 0])}
    if config.first_axis not in axes:
        raise ConfigError("geometry.first_axis", f"must be 'x' or 'y', got {config.first_axis!r}")
    order = ["x", "y"] if config.first_axis == "x" else ["y", "x"]
    stiffness = config.stiffness_per_joint(n)
    damping = config.damping_per_joint(n)
    joints = tuple(
        JointSpec(axis=axes[order[j % 2]], stiffness=stiffness[j], damping=damping[j])
        for j in range(n)
    )

    home = tuple(Pose(np.eye(3), np.array([0.0, 0.0, -h])) for _ in range(n))

    tendons = tuple(
        TendonSpec(id=row.id, segment=row.segment, offset=row.offset,
                   extensibility=row.extensibility, rest_length=row.rest_length)
        for row in config.tendons
    )

    return ChainModel(
        n_segments=config.n_segments,
        beads_per_segment=config.beads_per_segment,
        beads=beads,
        joints=joints,
        home_transforms=home,
        gravity=np.asarray(config.gravity, dtype=float),
        tendons=tendons,
    )


def _check_theta(model: ChainModel, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape != (model.n_joints,):
        raise DimensionMismatch(
            f"theta has length {theta.shape[0]}, model has {model.n_joints} joints")
    return theta


def joint_transforms(model: ChainModel, theta) -> list[Pose]:
    """All inter-frame transforms T[j] = exp(-A_j theta_j) @ M[j]."""
    theta = _check_theta(model, theta)
    return [
        exp_screw(-model.joints[j].axis, theta[j]) @ model.home_transforms[j]
        for j in range(model.n_joints)
    ]


def relative_adjoint_block(model: ChainModel, j: int, theta_j: float) -> np.ndarray:
    """Ad of the single inter-frame transform exp(-A_j theta_j) @ M[j]."""
    k = model._axis_hats[j]
    s, c = np.sin(theta_j), np.cos(theta_j)
    rot = np.eye(3) - s * k + (1.0 - c) * (k @ k)  # exp(-axis * theta)
    p = rot @ model._home_positions[j]
    out = np.zeros((6, 6))
    out[:3, :3] = rot
    out[3:, 3:] = rot
    out[3:, :3] = hat(p) @ rot
    return out


def relative_adjoint_blocks(model: ChainModel, theta) -> np.ndarray:
    """Ad of every inter-frame transform as an (n, 6, 6) array.

    Same math as adjoint(joint_transforms(...)) but without Pose overhead;
    this sits on the hot path of every residual and Jacobian evaluation.
    """
    theta = _check_theta(model, theta)
    return np.array([
        relative_adjoint_block(model, j, theta[j]) for j in range(model.n_joints)
    ])


def forward_kinematics(model: ChainModel, theta) -> list[Pose]:
    """Pose of every bead frame in the base frame; the last entry is the
    end-effector pose used by the error metrics."""
    rel = joint_transforms(model, theta)
    poses: list[Pose] = []
    current = Pose.identity()
    for t in rel:
        current = current @ t.inverse()
        poses.append(current)
    return poses


@dataclass(frozen=True)
class StackedOperators:
    """Block operators of the whole chain at a given joint vector.

    ``dW_blocks[j]`` holds the single nonzero 6x6 block of dW/dtheta_j, which
    sits at block position (j, j-1); entry 0 is None because W has no block in
    its first row. ``dVb_col0`` is the derivative of the gravity stack with
    respect to theta_0, the only joint it depends on.
    """

    A: np.ndarray
    G: np.ndarray
    W: np.ndarray
    L: np.ndarray
    dW_blocks: tuple
    Vdot_b: np.ndarray
    dVb_col0: np.ndarray
    adjoints: tuple

    def dW_dense(self, j: int) -> np.ndarray:
        """Materialize dW/dtheta_j as a full 6n x 6n matrix (tests only)."""
        n6 = self.W.shape[0]
        out = np.zeros((n6, n6))
        if j >= 1 and self.dW_blocks[j] is not None:
            out[6 * j:6 * j + 6, 6 * (j - 1):6 * j] = self.dW_blocks[j]
        return out


def assemble_operators(model: ChainModel, theta) -> StackedOperators:
    """Assemble A, G, W, L = (I - W)^-1, dW/dtheta and the gravity stack.

    L is built by block forward substitution on the strictly lower block
    structure of W (n^2 small products), never by dense inversion.
    """
    theta = _check_theta(model, theta)
    n = model.n_joints
    adjs = relative_adjoint_blocks(model, theta)

    a_stack = model._a_stack
    g_stack = np.zeros((6 * n, 6 * n))
    w_stack = np.zeros((6 * n, 6 * n))
    for j in range(n):
        g_stack[6 * j:6 * j + 6, 6 * j:6 * j + 6] = model._g_blocks[j]
        if j >= 1:
            w_stack[6 * j:6 * j + 6, 6 * (j - 1):6 * j] = adjs[j]

    # Forward substitution: row j of L is Ad_j times row j-1, plus the
    # identity on the diagonal (W is nilpotent, so L is unit lower triangular
    # in blocks).
    l_stack = np.zeros((6 * n, 6 * n))
    l_stack[0:6, 0:6] = np.eye(6)
    for j in range(1, n):
        rows = slice(6 * j, 6 * j + 6)
        prev = slice(6 * (j - 1), 6 * j)
        l_stack[rows, :6 * j] = adjs[j] @ l_stack[prev, :6 * j]
        l_stack[rows, rows] = np.eye(6)

    dw_blocks = [None] + [
        -ad(model.joints[j].axis) @ adjs[j] for j in range(1, n)
    ]

    vdot0 = np.concatenate([np.zeros(3), -model.gravity])
    vdot_b = np.zeros(6 * n)
    vdot_b[0:6] = adjs[0] @ vdot0
    dvb_col0 = np.zeros(6 * n)
    dvb_col0[0:6] = -ad(model.joints[0].axis) @ adjs[0] @ vdot0

    return StackedOperators(
        A=a_stack, G=g_stack, W=w_stack, L=l_stack,
        dW_blocks=tuple(dw_blocks), Vdot_b=vdot_b, dVb_col0=dvb_col0,
        adjoints=tuple(np.asarray(adjs)),
    )
