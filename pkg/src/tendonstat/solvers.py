"""Newton-Raphson forward statics: tension input (FST) and length input (FSL).

FST solves tau(theta; f) = 0 for theta. FSL solves tau = 0 and l_t = l_D
jointly for (theta, f), with tensions reparametrized through a smooth
positive kernel so cables can only pull. Both iterate

    x <- x + alpha * pinv(J) (target - y)

with a trust region |theta_j| <= pi/2 (the hinge limit) enforced by step
rescaling, and step halving whenever the residual norm would grow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .chain import ChainModel, assemble_operators
from .errors import InfeasibleLengths, NonConvergence, SingularJacobian
from .statics import dtau_df, dtau_dtheta, torque_residual
from .tendons import coupling_matrix, extensibility_matrix, rest_lengths

THETA_LIMIT = math.pi / 2.0
_MAX_BACKTRACKS = 60
_STALL_WINDOW = 40
_STALL_IMPROVEMENT = 1e-14
# Kernel arguments beyond this add nothing (tensions below 1e-13 N) and only
# risk floating-point overflow in u^2.
_U_LIMIT = 1e9


@dataclass(frozen=True)
class SolverParams:
    """Knobs shared by both solvers; defaults reproduce the reference setup."""

    alpha: float = 0.5
    tol_torque: float = 1e-9
    tol_length: float = 1e-9
    max_iters: int = 500
    kernel_c: float = 1e-4
    pinv_rcond: float = 1e-10
    exact_tendon_jacobian: bool = False
    paper_kernel_jacobian: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.tol_torque <= 0.0 or self.tol_length <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.kernel_c <= 0.0:
            raise ValueError(f"kernel_c must be positive, got {self.kernel_c}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class SolveResult:
    """Converged (or best) iterate of a forward-statics solve.

    ``residual_history`` holds one (torque_norm, length_norm) tuple per
    residual evaluation, starting with the initial guess; the length entry is
    None for FST runs. Norms are infinity norms, matching the convergence
    tests.
    """

    theta: np.ndarray
    f: np.ndarray
    iterations: int
    converged: bool
    residual_history: list = field(default_factory=list)
    u: Optional[np.ndarray] = None


def kernel_apply(u, c: float) -> np.ndarray:
    """Positive tension kernel f(u) = (sqrt(4c + u^2) + u) / 2.

    Negative arguments go through the conjugate form 2c / (sqrt(4c+u^2) - u)
    and magnitudes large enough to overflow u^2 use the asymptotes directly,
    so the result stays strictly positive in floating point for any real u.
    """
    u = np.asarray(u, dtype=float)
    a = np.abs(u)
    huge = a > 1e150  # u * u would overflow
    u_safe = np.where(huge, 0.0, u)
    root = np.sqrt(4.0 * c + u_safe * u_safe)
    pos = np.where(huge, a, 0.5 * (root + u_safe))
    neg = np.where(huge, c / np.maximum(a, 1.0), 2.0 * c / (root + np.abs(u_safe)))
    return np.where(u >= 0.0, pos, neg)


def kernel_inverse(f, c: float) -> np.ndarray:
    """Inverse of :func:`kernel_apply` for f > 0: u = f - c / f."""
    f = np.asarray(f, dtype=float)
    return f - c / f


def kernel_jacobian(u, c: float, paper_variant: bool = False) -> np.ndarray:
    """Diagonal df/du.

    The default is the exact derivative of the kernel,
    (u / sqrt(4c + u^2) + 1) / 2, so the Newton system is consistent. The
    ``paper_variant`` diag(u^2 / (u^2 + c)) is retained for fidelity studies;
    it is not the kernel's derivative and vanishes at u = 0, freezing slack
    tendons.
    """
    u = np.asarray(u, dtype=float)
    if paper_variant:
        d = u * u / (u * u + c)
    else:
        d = 0.5 * (u / np.sqrt(4.0 * c + u * u) + 1.0)
    return np.diag(d)


def _pinv_checked(jac: np.ndarray, rcond: float, min_rank: int) -> np.ndarray:
    """SVD pseudo-inverse raising SingularJacobian below the required rank."""
    u_mat, s, vt = np.linalg.svd(jac, full_matrices=False)
    cutoff = rcond * (s[0] if s.size and s[0] > 0.0 else 1.0)
    rank = int(np.sum(s > cutoff))
    if rank < min_rank:
        raise SingularJacobian(
            f"Jacobian rank {rank} below required {min_rank}; "
            "stiffness or geometry make the statics ill-posed")
    inv_s = np.where(s > cutoff, 1.0 / np.where(s > 0, s, 1.0), 0.0)
    return (vt.T * inv_s) @ u_mat.T


def _equilibrated_step(jac: np.ndarray, rhs: np.ndarray, rcond: float,
                       min_rank: int) -> np.ndarray:
    """pinv(jac) @ rhs with columns normalized first.

    The augmented FSL system mixes units (N*m and m) and its kernel columns
    shrink with the kernel derivative as tendons go slack; equilibration keeps
    the relative rcond cutoff from silently freezing those directions.
    """
    norms = np.linalg.norm(jac, axis=0)
    norms = np.where(norms > 0.0, norms, 1.0)
    step = _pinv_checked(jac / norms, rcond, min_rank) @ rhs
    return step / norms


def _trust_region_scale(theta: np.ndarray, step: np.ndarray) -> float:
    """Largest factor in [0, 1] keeping theta + scale*step within the hinge limit."""
    target = theta + step
    scale = 1.0
    for j in range(theta.size):
        if target[j] > THETA_LIMIT and step[j] > 0.0:
            scale = min(scale, (THETA_LIMIT - theta[j]) / step[j])
        elif target[j] < -THETA_LIMIT and step[j] < 0.0:
            scale = min(scale, (-THETA_LIMIT - theta[j]) / step[j])
    return max(scale, 0.0)


def _validate_tensions(model: ChainModel, f) -> np.ndarray:
    f = np.asarray(f, dtype=float).reshape(-1)
    if f.shape != (model.n_tendons,):
        raise ValueError(f"expected {model.n_tendons} tensions, got {f.shape[0]}")
    if np.any(f < 0.0):
        raise ValueError("tendon tensions must be non-negative (cables pull only)")
    return f


def solve_fst(model: ChainModel, f, params: SolverParams | None = None,
              theta0=None, f_ext=None) -> SolveResult:
    """Equilibrium joint vector for prescribed tendon tensions.

    Raises NonConvergence (best iterate attached) at the iteration cap and
    SingularJacobian on rank collapse. A converged result re-verifies its
    residual with a fresh torque_residual evaluation.
    """
    params = params or SolverParams()
    f = _validate_tensions(model, f)
    n = model.n_joints
    theta = np.zeros(n) if theta0 is None else np.asarray(theta0, dtype=float).copy()
    if np.any(np.abs(theta) > THETA_LIMIT):
        raise ValueError("theta0 outside the hinge trust region")

    history: list = []
    report = torque_residual(model, theta, f, f_ext)
    iterations = 0
    converged = False
    for _ in range(params.max_iters):
        history.append((float(np.max(np.abs(report.tau))), None))
        if history[-1][0] <= params.tol_torque:
            converged = True
            break
        ops = assemble_operators(model, theta)
        jac = dtau_dtheta(model, theta, f, f_ext,
                          exact_tendon_jacobian=params.exact_tendon_jacobian, ops=ops)
        step = params.alpha * (_pinv_checked(jac, params.pinv_rcond, n) @ (-report.tau))
        step = step * _trust_region_scale(theta, step)
        for _ in range(_MAX_BACKTRACKS):
            candidate = theta + step
            cand_report = torque_residual(model, candidate, f, f_ext)
            if cand_report.norm <= report.norm or np.max(np.abs(step)) == 0.0:
                break
            step = 0.5 * step
        theta, report = candidate, cand_report
        iterations += 1
    else:
        history.append((float(np.max(np.abs(report.tau))), None))

    if not converged and history[-1][0] <= params.tol_torque:
        converged = True

    result = SolveResult(theta=theta, f=f, iterations=iterations,
                         converged=converged, residual_history=history)
    if converged:
        check = torque_residual(model, theta, f, f_ext)
        if np.max(np.abs(check.tau)) > params.tol_torque:
            result.converged = False
            raise NonConvergence("converged iterate failed independent re-verification", result)
        return result
    raise NonConvergence(
        f"no convergence after {iterations} iterations "
        f"(|tau|_inf = {history[-1][0]:.3e})", result)


def solve_fsl(model: ChainModel, l_target, params: SolverParams | None = None,
              theta0=None, u0=None, f_ext=None) -> SolveResult:
    """Equilibrium (theta, f) for prescribed tendon lengths.

    Iterates the augmented vector (theta, u) with f = kernel(u) against the
    target (tau, l_t) = (0, l_target). Tensions come out strictly positive by
    construction. Raises InfeasibleLengths when the length residual stalls
    large (the target lies outside the static workspace), NonConvergence
    otherwise.
    """
    params = params or SolverParams()
    l_target = np.asarray(l_target, dtype=float).reshape(-1)
    n, n_l = model.n_joints, model.n_tendons
    if l_target.shape != (n_l,):
        raise ValueError(f"expected {n_l} target lengths, got {l_target.shape[0]}")
    if np.any(l_target <= 0.0):
        raise ValueError("target tendon lengths must be positive")

    theta = np.zeros(n) if theta0 is None else np.asarray(theta0, dtype=float).copy()
    if u0 is None:
        u = np.full(n_l, float(kernel_inverse(1.0, params.kernel_c)))
    else:
        u = np.asarray(u0, dtype=float).copy()

    p_theta = coupling_matrix(model)
    lam = extensibility_matrix(model)
    l_0 = rest_lengths(model)

    def lengths(th, f):
        return p_theta @ th + l_0 - lam @ f

    def residuals(th, uu):
        ff = kernel_apply(uu, params.kernel_c)
        rep = torque_residual(model, th, ff, f_ext)
        dl = lengths(th, ff) - l_target
        return rep, dl, ff

    history: list = []
    report, dl, f = residuals(theta, u)
    iterations = 0
    converged = False
    stall = 0
    best_merit = math.inf
    for _ in range(params.max_iters):
        tau_norm = float(np.max(np.abs(report.tau)))
        len_norm = float(np.max(np.abs(dl)))
        history.append((tau_norm, len_norm))
        if tau_norm <= params.tol_torque and len_norm <= params.tol_length:
            converged = True
            break
        merit = math.hypot(report.norm, float(np.linalg.norm(dl)))
        if merit < best_merit - _STALL_IMPROVEMENT:
            best_merit = merit
            stall = 0
        else:
            stall += 1
            if stall >= _STALL_WINDOW:
                break

        ops = assemble_operators(model, theta)
        d_kernel = kernel_jacobian(u, params.kernel_c, params.paper_kernel_jacobian)
        jac = np.block([
            [dtau_dtheta(model, theta, f, f_ext,
                         exact_tendon_jacobian=params.exact_tendon_jacobian, ops=ops),
             dtau_df(model, theta, ops=ops) @ d_kernel],
            [p_theta, -lam @ d_kernel],
        ])
        rhs = np.concatenate([-report.tau, -dl])
        # Rank guard on the theta block only: tension co-contraction may be
        # structurally unobservable without extensible tendons.
        step = params.alpha * _equilibrated_step(jac, rhs, params.pinv_rcond, min_rank=n)
        step = step * _trust_region_scale(theta, step[:n])
        for _ in range(_MAX_BACKTRACKS):
            cand_theta = theta + step[:n]
            cand_u = np.clip(u + step[n:], -_U_LIMIT, _U_LIMIT)
            cand_report, cand_dl, cand_f = residuals(cand_theta, cand_u)
            cand_merit = math.hypot(cand_report.norm, float(np.linalg.norm(cand_dl)))
            if cand_merit <= merit or np.max(np.abs(step)) == 0.0:
                break
            step = 0.5 * step
        theta, u, report, dl, f = cand_theta, cand_u, cand_report, cand_dl, cand_f
        iterations += 1
    else:
        history.append((float(np.max(np.abs(report.tau))), float(np.max(np.abs(dl)))))

    result = SolveResult(theta=theta, f=f, iterations=iterations,
                         converged=converged, residual_history=history, u=u)
    if converged:
        check = torque_residual(model, theta, f, f_ext)
        dl_check = lengths(theta, f) - l_target
        if (np.max(np.abs(check.tau)) > params.tol_torque
                or np.max(np.abs(dl_check)) > params.tol_length):
            result.converged = False
            raise NonConvergence("converged iterate failed independent re-verification", result)
        return result

    len_norm = history[-1][1]
    if len_norm > max(1e3 * params.tol_length, 1e-7):
        raise InfeasibleLengths(
            f"length residual stalled at {len_norm:.3e} m; target lengths "
            "appear to lie outside the static workspace", result)
    raise NonConvergence(
        f"no convergence after {iterations} iterations "
        f"(|tau|_inf = {history[-1][0]:.3e}, |dl|_inf = {len_norm:.3e})", result)
