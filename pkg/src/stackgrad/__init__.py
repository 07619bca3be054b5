"""Stackelberg-game solving from inexact best responses.

The leader descends an estimated gradient assembled from positive-basis
probing of an epsilon-inexact follower oracle; companion modules provide the
quadratic ground-truth model, the proved error bound and convergence
certificate, and a seeded experiment harness.
"""

__version__ = "0.1.0"

from .analysis import AnalysisReport, condition_and_bound, constants, kappa, phi, tightness_gap
from .errors import (
    AnalysisError,
    ConfigError,
    GenerationError,
    InstanceError,
    OracleFailure,
    StackgradError,
)
from .estimator import (
    GradientEstimate,
    PositiveBasis,
    SamplingPlan,
    build_sampling_matrix,
    estimate_gradient,
    ls_solve,
)
from .games import (
    EffectiveMatrices,
    InstanceOptions,
    LeaderView,
    QuadraticGame,
    SmoothnessConstants,
    best_response,
    effective_matrices,
    generate_instance,
    leader_value_and_grad,
    load_instance,
    save_instance,
    smoothness_constants,
)
from .oracles import (
    FollowerOracle,
    IbrQuery,
    IbrResponse,
    OracleConfig,
    make_oracle,
)
from .solver import SolverConfig, SolverTrace, run, steady_state_error

__all__ = [
    "AnalysisError",
    "AnalysisReport",
    "ConfigError",
    "EffectiveMatrices",
    "FollowerOracle",
    "GenerationError",
    "GradientEstimate",
    "IbrQuery",
    "IbrResponse",
    "InstanceError",
    "InstanceOptions",
    "LeaderView",
    "OracleConfig",
    "OracleFailure",
    "PositiveBasis",
    "QuadraticGame",
    "SamplingPlan",
    "SmoothnessConstants",
    "SolverConfig",
    "SolverTrace",
    "StackgradError",
    "best_response",
    "build_sampling_matrix",
    "condition_and_bound",
    "constants",
    "effective_matrices",
    "estimate_gradient",
    "generate_instance",
    "kappa",
    "leader_value_and_grad",
    "load_instance",
    "ls_solve",
    "make_oracle",
    "phi",
    "run",
    "save_instance",
    "smoothness_constants",
    "steady_state_error",
    "tightness_gap",
]
