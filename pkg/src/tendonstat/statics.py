"""Torque residual of the elastic chain and its analytical derivatives.

The residual at a static configuration is

    tau(theta) = g(theta) + J^T(theta) (Fe_stack - Ft_stack) + K theta

with g = A^T L^T G L Vdot_b (gravity entering as a fictitious base
acceleration with linear part -gravity), J^T = A^T L^T, K the diagonal
stiffness matrix, Ft the stacked tendon wrench and Fe the external wrench the
end-effector exerts on its environment (placed in the last stack slot,
end-effector body frame). The mass matrix and the velocity-product torques
are provided for completeness; the equilibrium solvers never use them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainModel, StackedOperators, assemble_operators, relative_adjoint_blocks
from .errors import DimensionMismatch
from .tendons import dFt_df, stacked_tendon_wrench
from .screws import ad

_FD_STEP_TENDON = 1e-6


def _gravity_twists(model: ChainModel, adjs: np.ndarray) -> np.ndarray:
    """Forward recursion x = L Vdot_b as an (n, 6) array."""
    n = model.n_joints
    x = np.zeros((n, 6))
    x[0] = adjs[0] @ np.concatenate([np.zeros(3), -model.gravity])
    for j in range(1, n):
        x[j] = adjs[j] @ x[j - 1]
    return x


def _project_stack(model: ChainModel, adjs: np.ndarray, stack: np.ndarray) -> np.ndarray:
    """A^T L^T applied to an (n, 6) stack via the backward recursion."""
    n = model.n_joints
    z = stack[n - 1]
    out = np.zeros(n)
    out[n - 1] = float(model.joints[n - 1].axis @ z)
    for j in range(n - 2, -1, -1):
        z = stack[j] + adjs[j + 1].T @ z
        out[j] = float(model.joints[j].axis @ z)
    return out


def _external_stack(model: ChainModel, f_ext) -> np.ndarray:
    n = model.n_joints
    stack = np.zeros(6 * n)
    if f_ext is not None:
        w = np.asarray(f_ext, dtype=float).reshape(-1)
        if w.shape != (6,):
            raise DimensionMismatch(f"external wrench must be a 6-vector, got {w.shape}")
        stack[6 * (n - 1):] = w
    return stack


def _project_joint_space(ops: StackedOperators, stack: np.ndarray) -> np.ndarray:
    """A^T L^T applied to a stacked 6n vector."""
    return ops.A.T @ (ops.L.T @ stack)


@dataclass(frozen=True)
class ResidualReport:
    """Torque residual with its per-term breakdown (all length-n arrays)."""

    tau: np.ndarray
    norm: float
    gravity: np.ndarray
    tendon: np.ndarray
    elastic: np.ndarray
    external: np.ndarray


def gravity_torque(model: ChainModel, theta, ops: StackedOperators | None = None) -> np.ndarray:
    """Gravitational joint torques, equal to the gradient of the potential."""
    if ops is not None:
        return _project_joint_space(ops, ops.G @ (ops.L @ ops.Vdot_b))
    adjs = relative_adjoint_blocks(model, theta)
    x = _gravity_twists(model, adjs)
    y = np.einsum("jab,jb->ja", model._g_blocks, x)
    return _project_stack(model, adjs, y)


def mass_matrix(model: ChainModel, theta) -> np.ndarray:
    """Joint-space inertia A^T L^T G L A (symmetric positive definite)."""
    ops = assemble_operators(model, theta)
    la = ops.L @ ops.A
    return la.T @ ops.G @ la


def coriolis(model: ChainModel, theta, theta_dot) -> np.ndarray:
    """Velocity-product joint torques.

    Uses the sign/transpose structure required by energy conservation,
    c = -A^T L^T (G L [ad_{A theta_dot}] W + [ad_V]^T G) L A theta_dot,
    with V = L A theta_dot the stacked body twists.
    """
    theta_dot = np.asarray(theta_dot, dtype=float).reshape(-1)
    n = model.n_joints
    if theta_dot.shape != (n,):
        raise DimensionMismatch(f"theta_dot has length {theta_dot.shape[0]}, expected {n}")
    ops = assemble_operators(model, theta)
    v = ops.L @ (ops.A @ theta_dot)
    ad_a = np.zeros((6 * n, 6 * n))
    ad_v_t = np.zeros((6 * n, 6 * n))
    for j in range(n):
        sl = slice(6 * j, 6 * j + 6)
        ad_a[sl, sl] = ad(model.joints[j].axis * theta_dot[j])
        ad_v_t[sl, sl] = ad(v[sl]).T
    bias = ops.G @ (ops.L @ (ad_a @ (ops.W @ v))) + ad_v_t @ (ops.G @ v)
    return -_project_joint_space(ops, bias)


def torque_residual(model: ChainModel, theta, f=None, f_ext=None,
                    ops: StackedOperators | None = None) -> ResidualReport:
    """Residual tau(theta, f) with per-term breakdown.

    ``f`` may be omitted for tendon-free models; ``f_ext`` is the optional
    end-effector wrench (moment, force).
    """
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if f is None:
        f = np.zeros(model.n_tendons)
    n = model.n_joints
    if ops is not None:
        g_term = gravity_torque(model, theta, ops)
        tendon_term = -_project_joint_space(ops, stacked_tendon_wrench(model, theta, f))
        external_term = _project_joint_space(ops, _external_stack(model, f_ext))
    else:
        adjs = relative_adjoint_blocks(model, theta)
        x = _gravity_twists(model, adjs)
        g_term = _project_stack(model, adjs,
                                np.einsum("jab,jb->ja", model._g_blocks, x))
        ft = stacked_tendon_wrench(model, theta, f).reshape(n, 6)
        tendon_term = -_project_stack(model, adjs, ft)
        if f_ext is None:
            external_term = np.zeros(n)
        else:
            external_term = _project_stack(
                model, adjs, _external_stack(model, f_ext).reshape(n, 6))
    elastic_term = model.stiffness_vector() * theta
    tau = g_term + tendon_term + external_term + elastic_term
    return ResidualReport(
        tau=tau, norm=float(np.linalg.norm(tau)),
        gravity=g_term, tendon=tendon_term, elastic=elastic_term,
        external=external_term,
    )


def dtau_df(model: ChainModel, theta, ops: StackedOperators | None = None) -> np.ndarray:
    """n x n_l tension sensitivity, -A^T L^T dFt/df."""
    ops = ops or assemble_operators(model, theta)
    return -_project_joint_space(ops, dFt_df(model, theta))


def dtau_dtheta(model: ChainModel, theta, f=None, f_ext=None,
                exact_tendon_jacobian: bool = False,
                ops: StackedOperators | None = None) -> np.ndarray:
    """Analytical Jacobian of the torque residual with respect to theta.

    Differentiates the gravity term, the wrench projection J^T, and the
    stiffness diagonal, using dL = L dW L applied column by column through
    the single nonzero block of each dW/dtheta_j. The tendon routing makes
    the stacked tendon wrench configuration-independent; setting
    ``exact_tendon_jacobian`` nevertheless adds a finite-difference of that
    term, which verifies as zero for this routing and guards alternative
    tendon models.
    """
    theta = np.asarray(theta, dtype=float).reshape(-1)
    n = model.n_joints
    ops = ops or assemble_operators(model, theta)
    if f is None:
        f = np.zeros(model.n_tendons)

    f_bar = _external_stack(model, f_ext) - stacked_tendon_wrench(model, theta, f)
    x = ops.L @ ops.Vdot_b                  # stacked twists of the gravity pass
    z_plus_w = ops.L.T @ (ops.G @ x + f_bar)

    # Column j of d(L Vdot_b): L @ (dW_j x + dVb_j); dW_j x occupies slot j.
    x1 = np.zeros((6 * n, n))
    x2 = np.zeros((6 * n, n))
    for j in range(1, n):
        blk = ops.dW_blocks[j]
        x1[6 * j:6 * j + 6, j] = blk @ x[6 * (j - 1):6 * j]
        x2[6 * (j - 1):6 * j, j] = blk.T @ z_plus_w[6 * j:6 * j + 6]
    x1[:, 0] += ops.dVb_col0

    jac = ops.A.T @ (ops.L.T @ (ops.G @ (ops.L @ x1)) + ops.L.T @ x2)
    jac += np.diag(model.stiffness_vector())

    if exact_tendon_jacobian and model.n_tendons:
        jt = (ops.L @ ops.A).T
        h = _FD_STEP_TENDON
        for j in range(n):
            dtheta = np.zeros(n)
            dtheta[j] = h
            dft = (stacked_tendon_wrench(model, theta + dtheta, f)
                   - stacked_tendon_wrench(model, theta - dtheta, f)) / (2.0 * h)
            jac[:, j] -= jt @ dft
    return jac
