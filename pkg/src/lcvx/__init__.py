"""Trajectory optimization for linear systems driven by multiple semi-continuous,
cone-constrained inputs.

Each input's magnitude is either zero or confined to a band [rho1, rho2], at
most K inputs may be active at once, and each direction is restricted to a
pointing cone. Instead of solving that mixed-integer problem, the toolkit
solves a convex second-order cone relaxation, checks a priori conditions
under which the relaxation is exact almost everywhere, and verifies the
returned trajectory's structure a posteriori. A branch-and-bound solver over
the activation binaries is included as a global-optimality oracle.
"""

from .conditions import (
    ConditionReport,
    ConditionsSummary,
    check_adjoint_observability,
    check_all,
    check_gain_nondegeneracy,
    check_gain_separation,
    check_transversality,
)
from .conic import ConicProgram, ConicSolution, SolverOptions, solve as solve_conic
from .config import ConfigError, ProblemConfig, docking_preset, load_config, save_config
from .dynamics import (
    DiscreteDynamics,
    LtiSystem,
    observability_matrix,
    observability_rank,
    pbh_observable,
    station_dynamics,
    zoh_discretize,
)
from .geometry import PointingCone, gains, interiors_disjoint, project_gain, project_onto_cone
from .micp import enumerate_binary_patterns, solve_micp_bnb
from .problem import (
    AffineTerminalCost,
    MinimumTimeCost,
    ProblemSpec,
    QuadraticTerminalCost,
    TerminalSpec,
)
from .solver import (
    AdjointTrace,
    Solution,
    VerificationReport,
    extract_primer,
    golden_time_search,
    min_time,
    solve_fixed_tf,
    summary_dict,
    verify_lossless,
    write_trajectory_csv,
)
from .transcription import Transcription, transcribe

__version__ = "0.1.0"

__all__ = [
    "AdjointTrace",
    "AffineTerminalCost",
    "ConditionReport",
    "ConditionsSummary",
    "ConfigError",
    "ConicProgram",
    "ConicSolution",
    "DiscreteDynamics",
    "LtiSystem",
    "MinimumTimeCost",
    "PointingCone",
    "ProblemConfig",
    "ProblemSpec",
    "QuadraticTerminalCost",
    "Solution",
    "SolverOptions",
    "TerminalSpec",
    "Transcription",
    "VerificationReport",
    "check_adjoint_observability",
    "check_all",
    "check_gain_nondegeneracy",
    "check_gain_separation",
    "check_transversality",
    "docking_preset",
    "enumerate_binary_patterns",
    "extract_primer",
    "gains",
    "golden_time_search",
    "interiors_disjoint",
    "load_config",
    "min_time",
    "observability_matrix",
    "observability_rank",
    "pbh_observable",
    "project_gain",
    "project_onto_cone",
    "save_config",
    "solve_conic",
    "solve_fixed_tf",
    "solve_micp_bnb",
    "station_dynamics",
    "summary_dict",
    "transcribe",
    "verify_lossless",
    "write_trajectory_csv",
    "zoh_discretize",
    "__version__",
]
