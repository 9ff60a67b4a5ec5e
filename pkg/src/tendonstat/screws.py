"""SO(3)/SE(3) primitives: hat maps, exponential/log, adjoint representations.

Conventions used throughout the package:

* twists are 6-vectors ordered (angular, linear) = (wx, wy, wz, vx, vy, vz)
* wrenches are 6-vectors ordered (moment, force) = (mx, my, mz, fx, fy, fz)
* all quantities are body-frame by default
* rotations are stored as 3x3 matrices; quaternions appear only at the IO
  boundary (scalar-first, (w, x, y, z))
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AngleNearPi

# Orthonormality / unit-norm tolerance for constructed rotations and screw axes.
ROTATION_TOL = 1e-12
# Below this angle the Rodrigues coefficients switch to their Taylor series.
SMALL_ANGLE = 1e-8


def _as_vec(x, n: int) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.shape != (n,):
        raise ValueError(f"expected length-{n} vector, got shape {np.shape(x)}")
    return v


def hat(v) -> np.ndarray:
    """Skew-symmetric matrix of a 3-vector: hat(v) @ w == cross(v, w)."""
    v = _as_vec(v, 3)
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def vee(m: np.ndarray) -> np.ndarray:
    """Inverse of :func:`hat` (uses the strictly lower triangle)."""
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def check_rotation(r: np.ndarray, tol: float = ROTATION_TOL) -> None:
    """Raise ValueError unless ``r`` is special orthogonal to tolerance."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {r.shape}")
    err = np.max(np.abs(r.T @ r - np.eye(3)))
    if err > tol:
        raise ValueError(f"matrix is not orthonormal (max |R^T R - I| = {err:.3e})")
    det = np.linalg.det(r)
    if abs(det - 1.0) > max(tol, 16 * np.finfo(float).eps):
        raise ValueError(f"matrix is not proper (det = {det!r})")


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform: rotation in SO(3) plus a position in meters.

    Immutable; arrays are copied and marked read-only on construction and the
    rotation invariants are re-checked every time.
    """

    rotation: np.ndarray
    position: np.ndarray

    def __post_init__(self):
        r = np.array(self.rotation, dtype=float)
        p = _as_vec(self.position, 3).copy()
        check_rotation(r)
        r.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "position", p)

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    @staticmethod
    def from_matrix(t: np.ndarray) -> "Pose":
        t = np.asarray(t, dtype=float)
        if t.shape != (4, 4):
            raise ValueError(f"homogeneous transform must be 4x4, got {t.shape}")
        return Pose(t[:3, :3], t[:3, 3])

    def as_matrix(self) -> np.ndarray:
        t = np.eye(4)
        t[:3, :3] = self.rotation
        t[:3, 3] = self.position
        return t

    def compose(self, other: "Pose") -> "Pose":
        """self @ other (apply ``other`` first, then ``self``)."""
        return Pose(self.rotation @ other.rotation,
                    self.rotation @ other.position + self.position)

    def __matmul__(self, other: "Pose") -> "Pose":
        return self.compose(other)

    def inverse(self) -> "Pose":
        rt = self.rotation.T
        return Pose(rt, -rt @ self.position)

    def apply(self, point) -> np.ndarray:
        """Map a point from this pose's frame into the parent frame."""
        return self.rotation @ _as_vec(point, 3) + self.position


def check_screw_axis(s, tol: float = ROTATION_TOL) -> np.ndarray:
    """Validate the screw-axis normalization and return it as an array.

    A screw axis has unit angular part, or unit linear part when the angular
    part vanishes (pure translation).
    """
    s = _as_vec(s, 6)
    w_norm = np.linalg.norm(s[:3])
    if w_norm > tol:
        if abs(w_norm - 1.0) > tol:
            raise ValueError(f"screw axis angular part must be unit, |w| = {w_norm!r}")
    elif abs(np.linalg.norm(s[3:]) - 1.0) > tol:
        raise ValueError("pure-translation screw axis must have unit linear part")
    return s


def screw_axis(angular, linear) -> np.ndarray:
    """Build a normalized screw axis from angular/linear 3-vectors."""
    v = np.concatenate([_as_vec(angular, 3), _as_vec(linear, 3)])
    w_norm = np.linalg.norm(v[:3])
    scale = w_norm if w_norm > 0.0 else np.linalg.norm(v[3:])
    if scale == 0.0:
        raise ValueError("cannot normalize a zero twist into a screw axis")
    return v / scale


def _rodrigues_coeffs(angle: float) -> tuple[float, float, float]:
    """Coefficients (a, b, c) with R = I + a*K + b*K^2 and the translation
    map V = I + b*K + c*K^2 (K the un-normalized skew of the rotation vector).

    a = sin(x)/x, b = (1-cos(x))/x^2, c = (x-sin(x))/x^3; second-order Taylor
    below the small-angle cutoff to avoid 0/0 at straight configurations.
    """
    x = angle
    if abs(x) < SMALL_ANGLE:
        x2 = x * x
        return 1.0 - x2 / 6.0, 0.5 - x2 / 24.0, 1.0 / 6.0 - x2 / 120.0
    x2 = x * x
    return math.sin(x) / x, (1.0 - math.cos(x)) / x2, (x - math.sin(x)) / (x2 * x)


def exp_twist(xi) -> Pose:
    """Exponential map se(3) -> SE(3) of a twist (angular, linear)."""
    xi = _as_vec(xi, 6)
    w, v = xi[:3], xi[3:]
    angle = np.linalg.norm(w)
    k = hat(w)
    a, b, c = _rodrigues_coeffs(angle)
    r = np.eye(3) + a * k + b * (k @ k)
    vmat = np.eye(3) + b * k + c * (k @ k)
    return Pose(r, vmat @ v)


def exp_screw(s, theta: float) -> Pose:
    """Pose reached by moving along screw axis ``s`` through angle ``theta``."""
    s = check_screw_axis(s)
    return exp_twist(s * theta)


def log_pose(pose: Pose) -> tuple[np.ndarray, float]:
    """Principal-branch logarithm: (screw axis, angle) with exp(S, theta) == pose.

    Raises AngleNearPi when the rotation angle is within 1e-6 of pi; the
    caller must perturb the pose first. The identity maps to the canonical
    z rotation axis with theta = 0.
    """
    r, p = pose.rotation, pose.position
    tr = float(np.trace(r))
    cos_angle = min(1.0, max(-1.0, 0.5 * (tr - 1.0)))
    angle = math.acos(cos_angle)

    if tr <= -1.0 + 1e-6:
        raise AngleNearPi(f"rotation angle {angle!r} too close to pi for the principal branch")

    if angle < SMALL_ANGLE:
        # Pure (or nearly pure) translation.
        d = np.linalg.norm(p)
        if d < SMALL_ANGLE:
            return np.array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0]), 0.0
        return np.concatenate([np.zeros(3), p / d]), d

    w_axis = vee(r - r.T) / (2.0 * math.sin(angle))
    w_axis = w_axis / np.linalg.norm(w_axis)
    k = hat(w_axis * angle)
    _, b, _ = _rodrigues_coeffs(angle)
    # Closed-form inverse of the translation map V(angle * w_axis).
    denom = 2.0 * (1.0 - math.cos(angle))
    coeff = (1.0 - (angle * math.sin(angle)) / denom) / (angle * angle)
    vinv = np.eye(3) - 0.5 * k + coeff * (k @ k)
    v = vinv @ p / angle
    return np.concatenate([w_axis, v]), angle


def adjoint(pose: Pose) -> np.ndarray:
    """6x6 adjoint Ad_T = [[R, hat(p) R], [0, R]] mapping twists between frames."""
    r, p = pose.rotation, pose.position
    out = np.zeros((6, 6))
    out[:3, :3] = r
    out[3:, 3:] = r
    out[3:, :3] = hat(p) @ r
    return out


def ad(twist) -> np.ndarray:
    """Lie bracket matrix ad_V = [[hat(w), 0], [hat(v), hat(w)]] so that
    ad(V) @ W is the bracket [V, W] of two twists."""
    xi = _as_vec(twist, 6)
    w, v = hat(xi[:3]), hat(xi[3:])
    out = np.zeros((6, 6))
    out[:3, :3] = w
    out[3:, 3:] = w
    out[3:, :3] = v
    return out


def rotation_to_quaternion(r: np.ndarray) -> np.ndarray:
    """Rotation matrix -> unit quaternion (w, x, y, z), w >= 0."""
    r = np.asarray(r, dtype=float)
    m = r.T
    if m[2, 2] < 0:
        if m[0, 0] > m[1, 1]:
            t = 1.0 + m[0, 0] - m[1, 1] - m[2, 2]
            q = [m[1, 2] - m[2, 1], t, m[0, 1] + m[1, 0], m[2, 0] + m[0, 2]]
        else:
            t = 1.0 - m[0, 0] + m[1, 1] - m[2, 2]
            q = [m[2, 0] - m[0, 2], m[0, 1] + m[1, 0], t, m[1, 2] + m[2, 1]]
    else:
        if m[0, 0] < -m[1, 1]:
            t = 1.0 - m[0, 0] - m[1, 1] + m[2, 2]
            q = [m[0, 1] - m[1, 0], m[2, 0] + m[0, 2], m[1, 2] + m[2, 1], t]
        else:
            t = 1.0 + m[0, 0] + m[1, 1] + m[2, 2]
            q = [t, m[1, 2] - m[2, 1], m[2, 0] - m[0, 2], m[0, 1] - m[1, 0]]
    q = np.asarray(q, dtype=float) * (0.5 / math.sqrt(t))
    if q[0] < 0:
        q = -q
    return q


def quaternion_to_rotation(q, norm_tol: float = 1e-6) -> np.ndarray:
    """Unit quaternion (w, x, y, z) -> rotation matrix.

    The quaternion is normalized before use; deviations from unit norm beyond
    ``norm_tol`` are rejected.
    """
    q = _as_vec(q, 4)
    n = np.linalg.norm(q)
    if abs(n - 1.0) > norm_tol:
        raise ValueError(f"quaternion norm {n!r} deviates from 1 beyond {norm_tol}")
    w, x, y, z = q / n
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])
