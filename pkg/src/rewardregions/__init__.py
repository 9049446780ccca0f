"""Discover reward-explaining hyper-spherical regions in state space.

Given trajectories labeled with terminal rewards, find the spherical
regions whose traversal best explains the rewards, by minimizing the
conditional entropy of rewards given region-visit indicators (sigmoid
relaxation, annealed multistart gradient descent, density-seeded inits).
"""

from .core import (
    Dataset,
    Region,
    Trajectory,
    assignment_indices,
    hard_membership,
    membership_matrix,
    min_sq_dist,
    soft_membership,
)
from .discovery import (
    DiscoveryConfig,
    DiscoveryReport,
    discover,
    evaluate_report,
    fit_readout,
    predict_labels,
)
from .entropy import (
    JointTable,
    RelaxedObjective,
    conditional_entropy,
    estimate_joint,
    information_gain,
    marginal_entropy,
    nats_to_bits,
    objective_with_gradient,
)
from .errors import (
    DegenerateLabelsError,
    DimensionMismatchError,
    InvalidParameterError,
    OptimizationError,
    RewardRegionsError,
    SchemaError,
    SeedingError,
)
from .estimator import RegionDiscovery, as_dataset
from .io import (
    read_corpus,
    read_report,
    read_truth,
    write_corpus,
    write_report,
    write_truth,
)
from .kde import InitConfig, kde_density, sample_center, scott_bandwidth
from .optimize import (
    AnnealSchedule,
    OptimResult,
    OptimTrace,
    epsilon_bounds,
    optimize_region,
)
from .oracle import OracleResult, grid_search
from .rewards import RewardAlphabet, discretize_rewards
from .synth import TaskSpec, generate, make_spec, true_labels

__version__ = "0.1.0"

__all__ = [
    "AnnealSchedule",
    "Dataset",
    "DegenerateLabelsError",
    "DimensionMismatchError",
    "DiscoveryConfig",
    "DiscoveryReport",
    "InitConfig",
    "InvalidParameterError",
    "JointTable",
    "OptimResult",
    "OptimTrace",
    "OptimizationError",
    "OracleResult",
    "Region",
    "RegionDiscovery",
    "RelaxedObjective",
    "RewardAlphabet",
    "RewardRegionsError",
    "SchemaError",
    "SeedingError",
    "TaskSpec",
    "Trajectory",
    "as_dataset",
    "assignment_indices",
    "conditional_entropy",
    "discover",
    "discretize_rewards",
    "epsilon_bounds",
    "estimate_joint",
    "evaluate_report",
    "fit_readout",
    "generate",
    "grid_search",
    "hard_membership",
    "information_gain",
    "kde_density",
    "make_spec",
    "marginal_entropy",
    "membership_matrix",
    "min_sq_dist",
    "nats_to_bits",
    "objective_with_gradient",
    "optimize_region",
    "predict_labels",
    "read_corpus",
    "read_report",
    "read_truth",
    "sample_center",
    "scott_bandwidth",
    "soft_membership",
    "true_labels",
    "write_corpus",
    "write_report",
    "write_truth",
]
