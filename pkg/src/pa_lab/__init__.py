"""pa-lab: simulation and estimation for sublinear preferential attachment trees.

Grow trees under an arbitrary non-decreasing attachment function, estimate
the (rescaled) function from a single snapshot via degree tail ratios,
and validate against the exact branching-process limit theory.
"""

from .ctbp import (
    CTBPSimulation,
    Trajectory,
    estimate_growth_rate,
    ratio_limit_check,
    simulate_until_size,
)
from .estimator import (
    AttachmentCheckReport,
    EstimateTable,
    attachment_count_check,
    census_from_edge_list,
    estimate,
    monotonize,
    normalize_by_degree_one,
)
from .experiments import (
    ExperimentPlan,
    default_functions,
    replicate_seed,
    run_consistency_study,
    run_normality_study,
    run_variance_study,
    summarize_csv,
    summarize_rows,
    write_csv,
)
from .generator import GrowthConfig, TreeGrower, grow, replay_check
from .model import (
    AffineCert,
    BoundedCert,
    DegreeCensus,
    EvolutionLog,
    PAFunction,
    PowerBoundedCert,
    TreeSnapshot,
    census_from_snapshot,
    eval_f,
    validate_function,
)
from .rng import SplitMix64Stream, derive_seed
from .sampler import DegreeClassIndex
from .theory import (
    IdentityReport,
    MalthusianSolution,
    identity_report,
    remainder_interval,
    rescaled_preference,
    rho,
    solve_malthusian,
)

__version__ = "0.1.0"

__all__ = [
    "AffineCert",
    "AttachmentCheckReport",
    "BoundedCert",
    "CTBPSimulation",
    "DegreeCensus",
    "DegreeClassIndex",
    "EstimateTable",
    "EvolutionLog",
    "ExperimentPlan",
    "GrowthConfig",
    "IdentityReport",
    "MalthusianSolution",
    "PAFunction",
    "PowerBoundedCert",
    "Trajectory",
    "TreeGrower",
    "TreeSnapshot",
    "attachment_count_check",
    "census_from_edge_list",
    "census_from_snapshot",
    "default_functions",
    "derive_seed",
    "estimate",
    "estimate_growth_rate",
    "eval_f",
    "grow",
    "identity_report",
    "monotonize",
    "normalize_by_degree_one",
    "ratio_limit_check",
    "remainder_interval",
    "replay_check",
    "replicate_seed",
    "rescaled_preference",
    "rho",
    "run_consistency_study",
    "run_normality_study",
    "run_variance_study",
    "simulate_until_size",
    "solve_malthusian",
    "summarize_csv",
    "summarize_rows",
    "SplitMix64Stream",
    "validate_function",
    "write_csv",
]
