"""Command line entry points: scenario solving, result emission, derivative
verification, and the FST -> FSL round-trip study.

Exit codes: 0 success, 1 failed verification report, 2 non-convergence or
other solver failure, 3 configuration error, 4 IO error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .chain import (
    ChainModel,
    assemble_operators,
    forward_kinematics,
    relative_adjoint_block,
)
from .config import Scenario, load_model, load_scenario
from .errors import (
    ConfigError,
    NonConvergence,
    ParseError,
    SolverError,
    TendonStatError,
)
from .metrics import PoseError, pose_error
from .pcc import pcc_bead_poses, pcc_discretized_theta, pcc_tendon_lengths
from .screws import rotation_to_quaternion
from .solvers import SolverParams, kernel_apply, kernel_jacobian, solve_fsl, solve_fst
from .statics import dtau_df, dtau_dtheta, torque_residual
from .tendons import geometric_tendon_length, stacked_tendon_wrench, tendon_length

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_NONCONVERGENCE = 2
EXIT_CONFIG = 3
EXIT_IO = 4

GRADIENT_THRESHOLD = 1e-5


class ConsistencyError(TendonStatError):
    """A result bundle failed its pre-emission self check."""


@dataclass
class ResultBundle:
    """Everything one scenario run produced, ready for emission."""

    mode: str
    converged: bool
    iterations: int
    theta: Optional[np.ndarray]
    tensions: Optional[np.ndarray]
    kernel_u: Optional[np.ndarray]
    lengths: np.ndarray
    poses: list
    residual_history: list
    params: SolverParams
    metrics: Optional[PoseError] = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def arr(a):
            return None if a is None else np.asarray(a).tolist()

        beads = []
        for j, pose in enumerate(self.poses):
            beads.append({
                "index": j + 1,
                "position": pose.position.tolist(),
                "quaternion": rotation_to_quaternion(pose.rotation).tolist(),
            })
        metrics = None
        if self.metrics is not None:
            metrics = {
                "e_theta": self.metrics.e_theta,
                "eps_theta": self.metrics.eps_theta,
                "e_p": self.metrics.e_p,
                "eps_p": self.metrics.eps_p,
            }
        return {
            "format_version": 1,
            "mode": self.mode,
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "theta": arr(self.theta),
            "tensions": arr(self.tensions),
            "kernel_u": arr(self.kernel_u),
            "lengths": arr(self.lengths),
            "beads": beads,
            "residual_history": [[t, l] for t, l in self.residual_history],
            "metrics": metrics,
            "diagnostics": self.diagnostics,
            "solver": dataclasses.asdict(self.params),
        }


def run_scenario(model: ChainModel, scenario: Scenario) -> ResultBundle:
    """Dispatch one scenario to its solver and collect the bundle.

    Non-convergent solves still produce a bundle (best iterate, converged
    False); the caller decides the exit status.
    """
    params = scenario.params
    if scenario.mode == "pcc":
        poses = pcc_bead_poses(model, list(scenario.arcs))
        lengths = pcc_tendon_lengths(model, list(scenario.arcs))
        theta_diag = pcc_discretized_theta(model, list(scenario.arcs))
        discretized = [
            geometric_tendon_length(model, theta_diag, t) for t in model.tendons
        ]
        bundle = ResultBundle(
            mode="pcc", converged=True, iterations=0, theta=None, tensions=None,
            kernel_u=None, lengths=lengths, poses=poses, residual_history=[],
            params=params,
            diagnostics={"discretized_lengths": discretized},
        )
    else:
        try:
            if scenario.mode == "fst":
                result = solve_fst(model, scenario.tensions, params,
                                   f_ext=scenario.external_wrench)
            else:
                result = solve_fsl(model, scenario.lengths, params,
                                   f_ext=scenario.external_wrench)
        except NonConvergence as exc:
            result = exc.result
        poses = forward_kinematics(model, result.theta)
        bundle = ResultBundle(
            mode=scenario.mode, converged=result.converged,
            iterations=result.iterations, theta=result.theta, tensions=result.f,
            kernel_u=result.u,
            lengths=tendon_length(model, result.theta, result.f),
            poses=poses, residual_history=result.residual_history, params=params,
        )
    if scenario.reference is not None:
        home = forward_kinematics(model, np.zeros(model.n_joints))[-1]
        bundle.metrics = pose_error(bundle.poses[-1], scenario.reference, home)
    return bundle


def verify_bundle(model: ChainModel, bundle: ResultBundle) -> None:
    """Self-consistency gate run before emission.

    Recomputes the tendon lengths and the torque residual from the bundle's
    own theta/tensions; converged bundles must still satisfy the solver
    tolerances.
    """
    if bundle.theta is None:
        return
    lengths = tendon_length(model, bundle.theta, bundle.tensions)
    if np.max(np.abs(lengths - bundle.lengths), initial=0.0) > 1e-12:
        raise ConsistencyError("bundle lengths do not match recomputed l(theta, f)")
    if bundle.converged:
        tau = torque_residual(model, bundle.theta, bundle.tensions).tau
        if np.max(np.abs(tau)) > bundle.params.tol_torque:
            raise ConsistencyError(
                "bundle claims convergence but the recomputed torque residual "
                f"is {np.max(np.abs(tau)):.3e}")


def _fmt17(x: float) -> str:
    return format(float(x), ".17g")


def emit_results(model: ChainModel, bundle: ResultBundle, fmt: str, path) -> None:
    """Write the bundle as CSV (per-bead rows plus a summary block) or JSON.

    Floating point goes out with 17 significant digits so a reload is
    lossless. ``path`` None writes to stdout.
    """
    verify_bundle(model, bundle)
    if fmt == "json":
        text = json.dumps(bundle.to_dict(), indent=2)
    elif fmt == "csv":
        lines = ["index,x,y,z,qw,qx,qy,qz"]
        for j, pose in enumerate(bundle.poses):
            q = rotation_to_quaternion(pose.rotation)
            p = pose.position
            lines.append(",".join([str(j + 1)] + [_fmt17(v) for v in (*p, *q)]))
        lines.append(f"# mode={bundle.mode}")
        lines.append(f"# converged={str(bundle.converged).lower()}")
        lines.append(f"# iterations={bundle.iterations}")
        if bundle.residual_history:
            tau_n, len_n = bundle.residual_history[-1]
            lines.append(f"# tau_norm={_fmt17(tau_n)}")
            if len_n is not None:
                lines.append(f"# length_norm={_fmt17(len_n)}")
        if bundle.theta is not None:
            lines.append("# theta=" + " ".join(_fmt17(v) for v in bundle.theta))
            lines.append("# tensions=" + " ".join(_fmt17(v) for v in bundle.tensions))
        lines.append("# lengths=" + " ".join(_fmt17(v) for v in bundle.lengths))
        text = "\n".join(lines) + "\n"
    else:
        raise ConfigError("format", f"unsupported output format {fmt!r}")

    if path is None:
        sys.stdout.write(text + ("\n" if not text.endswith("\n") else ""))
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


@dataclass
class GradientReport:
    """Outcome of the finite-difference derivative sweep."""

    seed: int
    samples: int
    exact_tendon_jacobian: bool
    paper_kernel_jacobian: bool
    max_rel_errors: dict
    expected_mismatch: list
    passed: bool

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "samples": self.samples,
            "exact_tendon_jacobian": self.exact_tendon_jacobian,
            "paper_kernel_jacobian": self.paper_kernel_jacobian,
            "threshold": GRADIENT_THRESHOLD,
            "max_rel_errors": self.max_rel_errors,
            "expected_mismatch": self.expected_mismatch,
            "passed": self.passed,
        }


def check_gradients(model: ChainModel, n_samples: int = 100, seed: int = 0,
                    exact_tendon_jacobian: bool = False,
                    paper_kernel_jacobian: bool = False,
                    kernel_c: float = 1e-4) -> GradientReport:
    """Compare every analytical derivative against central finite differences.

    Draws seeded random (theta, f, u) samples and reports, per quantity, the
    maximum deviation normalized by (1 + the analytic matrix's max entry).
    The ``paper_kernel_jacobian`` variant is not the kernel's derivative, so
    running with that flag marks the kernel row as an expected mismatch
    (largest near u = 0) instead of silently passing it.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    n, n_l = model.n_joints, model.n_tendons
    h_theta, h_f, h_u = 1e-6, 1e-3, 1e-6
    errors = {"dtau_dtheta": 0.0, "dtau_df": 0.0, "dW_dtheta": 0.0,
              "kernel_jacobian": 0.0}

    for _ in range(n_samples):
        theta = rng.uniform(-0.35, 0.35, size=n)
        f = rng.uniform(0.5, 5.0, size=n_l)
        u = rng.uniform(-3.0, 8.0, size=n_l)

        ops = assemble_operators(model, theta)
        jac = dtau_dtheta(model, theta, f,
                          exact_tendon_jacobian=exact_tendon_jacobian, ops=ops)
        scale = 1.0 + np.max(np.abs(jac))
        worst = 0.0
        for j in range(n):
            dp, dm = theta.copy(), theta.copy()
            dp[j] += h_theta
            dm[j] -= h_theta
            fd = (torque_residual(model, dp, f).tau
                  - torque_residual(model, dm, f).tau) / (2 * h_theta)
            worst = max(worst, float(np.max(np.abs(jac[:, j] - fd))))
        errors["dtau_dtheta"] = max(errors["dtau_dtheta"], worst / scale)

        if n_l:
            jac_f = dtau_df(model, theta, ops=ops)
            scale = 1.0 + np.max(np.abs(jac_f))
            worst = 0.0
            for i in range(n_l):
                dp, dm = f.copy(), f.copy()
                dp[i] += h_f
                dm[i] -= h_f
                fd = (torque_residual(model, theta, dp).tau
                      - torque_residual(model, theta, dm).tau) / (2 * h_f)
                worst = max(worst, float(np.max(np.abs(jac_f[:, i] - fd))))
            errors["dtau_df"] = max(errors["dtau_df"], worst / scale)

        # dW/dtheta_j has a single nonzero block, the derivative of the j-th
        # inter-frame adjoint; every other entry of W is a structural constant
        worst = 0.0
        scale = 1.0
        for j in range(1, n):
            fd = (relative_adjoint_block(model, j, theta[j] + h_theta)
                  - relative_adjoint_block(model, j, theta[j] - h_theta)) / (2 * h_theta)
            block = ops.dW_blocks[j]
            scale = max(scale, 1.0 + np.max(np.abs(block)))
            worst = max(worst, float(np.max(np.abs(block - fd))))
        errors["dW_dtheta"] = max(errors["dW_dtheta"], worst / scale)

        if n_l:
            diag = np.diag(kernel_jacobian(u, kernel_c, paper_kernel_jacobian))
            fd = (kernel_apply(u + h_u, kernel_c)
                  - kernel_apply(u - h_u, kernel_c)) / (2 * h_u)
            errors["kernel_jacobian"] = max(
                errors["kernel_jacobian"],
                float(np.max(np.abs(diag - fd))) / (1.0 + float(np.max(np.abs(diag)))))

    expected_mismatch = ["kernel_jacobian"] if paper_kernel_jacobian else []
    passed = all(v <= GRADIENT_THRESHOLD for v in errors.values())
    return GradientReport(
        seed=seed, samples=n_samples,
        exact_tendon_jacobian=exact_tendon_jacobian,
        paper_kernel_jacobian=paper_kernel_jacobian,
        max_rel_errors=errors, expected_mismatch=expected_mismatch, passed=passed,
    )


@dataclass
class RoundTripReport:
    """FST -> FSL recovery study over random feasible tensions."""

    seed: int
    draws: list
    theta_tol: float
    tension_rel_tol: float
    tensions_observable: bool
    passed: bool

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "theta_tol": self.theta_tol,
            "tension_rel_tol": self.tension_rel_tol,
            "tensions_observable": self.tensions_observable,
            "passed": self.passed,
            "draws": self.draws,
        }


def round_trip(model: ChainModel, n_samples: int = 5, seed: int = 0,
               params: SolverParams | None = None,
               tension_range=(0.5, 5.0),
               theta_tol: float = 1e-6,
               tension_rel_tol: float = 1e-5) -> RoundTripReport:
    """Solve FST for random tensions, feed the resulting lengths to FSL, and
    score how well the configuration and tensions are recovered.

    With inextensible cables the length model carries no tension information,
    so antagonist co-contraction is structurally unobservable; tension
    recovery is then reported (and the net tendon moments checked) but not
    required for the pass verdict.
    """
    params = params or SolverParams()
    rng = np.random.default_rng(seed)
    observable = any(t.extensibility > 0.0 for t in model.tendons)
    draws = []
    passed = True
    zeros = np.zeros(model.n_joints)
    for _ in range(n_samples):
        f_hat = rng.uniform(tension_range[0], tension_range[1], size=model.n_tendons)
        entry = {"tensions": f_hat.tolist()}
        t0 = time.perf_counter()
        try:
            fst = solve_fst(model, f_hat, params)
            l_target = tendon_length(model, fst.theta, f_hat)
            fsl = solve_fsl(model, l_target, params)
        except SolverError as exc:
            entry["error"] = str(exc)
            passed = False
            draws.append(entry)
            continue
        elapsed = time.perf_counter() - t0
        theta_err = float(np.max(np.abs(fsl.theta - fst.theta)))
        f_err_rel = float(np.max(np.abs(fsl.f - f_hat) / f_hat))
        m_hat = stacked_tendon_wrench(model, zeros, f_hat)
        m_got = stacked_tendon_wrench(model, zeros, fsl.f)
        moment_err = float(np.max(np.abs(m_hat - m_got)))
        entry.update({
            "theta_error": theta_err,
            "tension_rel_error": f_err_rel,
            "moment_error": moment_err,
            "min_tension": float(np.min(fsl.f)),
            "fst_iterations": fst.iterations,
            "fsl_iterations": fsl.iterations,
            "seconds": elapsed,
        })
        ok = bool(theta_err <= theta_tol and np.all(fsl.f > 0.0))
        if observable:
            ok = ok and f_err_rel <= tension_rel_tol
        passed = bool(passed and ok)
        draws.append(entry)
    return RoundTripReport(seed=seed, draws=draws, theta_tol=theta_tol,
                           tension_rel_tol=tension_rel_tol,
                           tensions_observable=observable, passed=passed)


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--tol-torque", type=float, default=None)
    parser.add_argument("--tol-length", type=float, default=None)
    parser.add_argument("--max-iters", type=int, default=None)
    parser.add_argument("--kernel-c", type=float, default=None)
    parser.add_argument("--exact-tendon-jacobian", action="store_true", default=None)
    parser.add_argument("--paper-kernel-jacobian", action="store_true", default=None)


def _merge_params(base: SolverParams, args: argparse.Namespace) -> SolverParams:
    overrides = {}
    mapping = {
        "alpha": "alpha", "tol_torque": "tol_torque", "tol_length": "tol_length",
        "max_iters": "max_iters", "kernel_c": "kernel_c",
        "exact_tendon_jacobian": "exact_tendon_jacobian",
        "paper_kernel_jacobian": "paper_kernel_jacobian",
    }
    for arg_name, field_name in mapping.items():
        value = getattr(args, arg_name, None)
        if value is not None:
            overrides[field_name] = value
    return dataclasses.replace(base, **overrides) if overrides else base


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tendonstat",
        description="Forward statics of tendon-driven hyper-redundant chains")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in [("solve-fst", "equilibrium from tendon tensions"),
                           ("solve-fsl", "equilibrium from tendon lengths"),
                           ("pcc", "constant-curvature kinematic baseline")]:
        cmd = sub.add_parser(name, help=helptext)
        cmd.add_argument("--model", required=True)
        cmd.add_argument("--scenario", required=True)
        cmd.add_argument("--format", choices=["json", "csv"], default="json")
        cmd.add_argument("--out", default=None)
        if name != "pcc":
            _add_solver_flags(cmd)

    check = sub.add_parser("check-gradients",
                           help="verify analytical derivatives against finite differences")
    check.add_argument("--model", required=True)
    check.add_argument("--samples", type=int, default=100)
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--out", default=None)
    check.add_argument("--exact-tendon-jacobian", action="store_true", default=None)
    check.add_argument("--paper-kernel-jacobian", action="store_true", default=None)

    rt = sub.add_parser("round-trip",
                        help="FST -> FSL recovery study on random tensions")
    rt.add_argument("--model", required=True)
    rt.add_argument("--samples", type=int, default=5)
    rt.add_argument("--seed", type=int, default=0)
    rt.add_argument("--out", default=None)
    _add_solver_flags(rt)
    return parser


def _write_json(payload: dict, path) -> None:
    text = json.dumps(payload, indent=2)
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        model = load_model(args.model)
        if args.command in ("solve-fst", "solve-fsl", "pcc"):
            scenario = load_scenario(args.scenario, model)
            expected_mode = {"solve-fst": "fst", "solve-fsl": "fsl", "pcc": "pcc"}[args.command]
            if scenario.mode != expected_mode:
                raise ConfigError("scenario.mode",
                                  f"scenario is {scenario.mode!r} but the "
                                  f"command expects {expected_mode!r}")
            if args.command != "pcc":
                scenario = dataclasses.replace(
                    scenario, params=_merge_params(scenario.params, args))
            bundle = run_scenario(model, scenario)
            emit_results(model, bundle, args.format, args.out)
            return EXIT_OK if bundle.converged else EXIT_NONCONVERGENCE
        if args.command == "check-gradients":
            report = check_gradients(
                model, n_samples=args.samples, seed=args.seed,
                exact_tendon_jacobian=bool(args.exact_tendon_jacobian),
                paper_kernel_jacobian=bool(args.paper_kernel_jacobian))
            _write_json(report.to_dict(), args.out)
            return EXIT_OK if report.passed else EXIT_CHECK_FAILED
        if args.command == "round-trip":
            params = _merge_params(SolverParams(), args)
            report = round_trip(model, n_samples=args.samples, seed=args.seed,
                                params=params)
            _write_json(report.to_dict(), args.out)
            return EXIT_OK if report.passed else EXIT_NONCONVERGENCE
        raise AssertionError(f"unhandled command {args.command}")
    except (ParseError, ConfigError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ConsistencyError as exc:
        print(f"emission blocked: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
