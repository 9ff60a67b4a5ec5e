"""Exception types shared across the package."""

from __future__ import annotations


class TendonStatError(Exception):
    """Base class for all package-specific errors."""


class ParseError(TendonStatError):
    """A model or scenario file could not be parsed (carries line/column info)."""


class ConfigError(TendonStatError):
    """A parsed configuration violates a constraint.

    ``field`` holds a dotted path to the offending entry, e.g.
    ``"geometry.bead_mass"``.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DimensionMismatch(TendonStatError):
    """A vector or matrix argument has the wrong length/shape."""


class AngleNearPi(TendonStatError):
    """Rotation logarithm requested too close to the pi branch cut.

    The caller must perturb the pose before retrying.
    """


class SolverError(TendonStatError):
    """Base class for equilibrium-solver failures."""


class NonConvergence(SolverError):
    """Solver hit the iteration cap.

    The best iterate and its residual history are attached as ``result``.
    """

    def __init__(self, message: str, result):
        self.result = result
        super().__init__(message)


class InfeasibleLengths(NonConvergence):
    """FSL stalled with a large length residual: the requested tendon
    lengths appear to lie outside the static workspace."""


class SingularJacobian(SolverError):
    """The solver Jacobian lost rank beyond the allowed defect, indicating
    ill-posed stiffness or geometry."""
