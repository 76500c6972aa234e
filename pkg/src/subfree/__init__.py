"""Online submodular maximization with free disposal under matroid constraints."""

from .adversaries import (
    PartitionGeneralDriver,
    PartitionMonotoneDriver,
    UniformHardnessDriver,
    make_driver,
    run_adversary,
)
from .algorithms import (
    Agent,
    AlphaConstant,
    Decision,
    NonmonotoneGeneralRun,
    NonmonotoneUniformRun,
    dispatch_uniform,
    solve_alpha,
    step_best_singleton,
    step_bipartite,
    step_general_matroid,
    step_k_uniform,
)
from .fractional import FractionalState, round_online, step_partition_fractional
from .matroid import ExplicitMatroid, Matroid, MatroidError, PartitionMatroid, UniformMatroid
from .objective import (
    ExplicitTable,
    IntervalCoverage,
    Linear,
    Objective,
    ObjectiveError,
    ThinnedObjective,
    WeightedCoverage,
    sampled_value_p,
    soft_marginal_rate,
    soft_value,
)
from .oracle import brute_force_opt, check_ckp_domination, check_f_vs_fhat, prefix_optima
from .tracker import InvariantViolation, OnlineState, TrackerError

__all__ = [
    "Agent",
    "AlphaConstant",
    "Decision",
    "ExplicitMatroid",
    "ExplicitTable",
    "FractionalState",
    "IntervalCoverage",
    "InvariantViolation",
    "Linear",
    "Matroid",
    "MatroidError",
    "NonmonotoneGeneralRun",
    "NonmonotoneUniformRun",
    "Objective",
    "ObjectiveError",
    "OnlineState",
    "PartitionGeneralDriver",
    "PartitionMatroid",
    "PartitionMonotoneDriver",
    "ThinnedObjective",
    "TrackerError",
    "UniformHardnessDriver",
    "UniformMatroid",
    "WeightedCoverage",
    "brute_force_opt",
    "check_ckp_domination",
    "check_f_vs_fhat",
    "dispatch_uniform",
    "make_driver",
    "prefix_optima",
    "round_online",
    "run_adversary",
    "sampled_value_p",
    "soft_marginal_rate",
    "soft_value",
    "solve_alpha",
    "step_best_singleton",
    "step_bipartite",
    "step_general_matroid",
    "step_k_uniform",
    "step_partition_fractional",
]
