"""Forward statics of tendon-driven, flexible-joint, hyper-redundant chains.

Static equilibria can be computed from tendon tensions (solve_fst) or tendon
lengths (solve_fsl); a piecewise-constant-curvature baseline and end-effector
error metrics support model comparisons.
"""

from .cli import (
    GradientReport,
    ResultBundle,
    RoundTripReport,
    check_gradients,
    emit_results,
    round_trip,
    run_scenario,
)
from .chain import (
    BeadSpec,
    ChainModel,
    JointSpec,
    StackedOperators,
    TendonSpec,
    assemble_operators,
    build_chain,
    cuboid_inertia,
    forward_kinematics,
    joint_transforms,
)
from .config import (
    ModelConfig,
    Scenario,
    TendonRow,
    dump_model_config,
    load_model,
    load_model_config,
    load_scenario,
    two_segment_platform,
    two_segment_platform_path,
)
from .errors import (
    AngleNearPi,
    ConfigError,
    DimensionMismatch,
    InfeasibleLengths,
    NonConvergence,
    ParseError,
    SingularJacobian,
    SolverError,
    TendonStatError,
)
from .metrics import PoseError, pose_error
from .pcc import (
    ArcParams,
    pcc_bead_poses,
    pcc_forward,
    pcc_from_tip_quaternion,
    pcc_segment_tips,
    pcc_tendon_lengths,
)
from .screws import Pose, ad, adjoint, exp_screw, exp_twist, hat, log_pose, screw_axis
from .solvers import (
    SolveResult,
    SolverParams,
    kernel_apply,
    kernel_inverse,
    kernel_jacobian,
    solve_fsl,
    solve_fst,
)
from .statics import (
    ResidualReport,
    coriolis,
    dtau_df,
    dtau_dtheta,
    gravity_torque,
    mass_matrix,
    torque_residual,
)
from .tendons import (
    coupling_matrix,
    dFt_df,
    distributed_force_oracle,
    geometric_tendon_length,
    stacked_tendon_wrench,
    tendon_length,
    tendon_moment,
)

__version__ = "0.1.0"
