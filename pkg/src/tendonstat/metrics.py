"""End-effector error metrics between an estimated and a reference pose."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .screws import Pose

# Reference displacements below these make the relative metrics undefined.
_MIN_REF_DISPLACEMENT = 1e-9  # m
_MIN_REF_ANGLE = 1e-9         # rad


def _rotation_angle(ra: np.ndarray, rb: np.ndarray) -> float:
    """Angle of the relative rotation ra @ rb^-1, arccos argument clamped."""
    arg = 0.5 * (float(np.trace(ra @ rb.T)) - 1.0)
    return math.acos(min(1.0, max(-1.0, arg)))


@dataclass(frozen=True)
class PoseError:
    """Absolute and relative orientation/position errors.

    Relative metrics are None when the reference pose is degenerate (no
    displacement or no rotation away from home); the absolute metrics remain
    valid in that case.
    """

    e_theta: float
    e_p: float
    eps_theta: Optional[float]
    eps_p: Optional[float]


def pose_error(estimated: Pose, reference: Pose, home: Pose) -> PoseError:
    """All four end-effector error metrics.

    e_theta is the relative-rotation angle between estimate and reference;
    e_p the position error norm. The relative versions divide by the
    reference's own rotation/displacement away from the home pose.
    """
    e_theta = _rotation_angle(estimated.rotation, reference.rotation)
    e_p = float(np.linalg.norm(estimated.position - reference.position))

    ref_angle = _rotation_angle(home.rotation, reference.rotation)
    ref_disp = float(np.linalg.norm(reference.position - home.position))

    eps_theta = e_theta / ref_angle if ref_angle >= _MIN_REF_ANGLE else None
    eps_p = e_p / ref_disp if ref_disp >= _MIN_REF_DISPLACEMENT else None
    return PoseError(e_theta=e_theta, e_p=e_p, eps_theta=eps_theta, eps_p=eps_p)
