"""Adaptive submodular maximization under probability sampling.

Exact stochastic-instance machinery (realizations, priors, decision-tree
policies, optimal restricted policies), exhaustive checkers for three
diminishing-returns classes, sampling-gap reports and bounds, two worked
applications (independent-cascade seeding and pool-based active
learning), and a seeded experiment harness with CSV output.
"""

from .errors import (
    AdsubError,
    CapacityError,
    DuplicateEdgeError,
    EdgeListParseError,
    InvalidInstanceError,
    InvalidParameterError,
    InvalidRestrictionError,
    InvalidWitnessError,
    MalformedPolicyError,
    PolicyDomainViolationError,
    UnobservablePartialRealizationError,
)
from .model import (
    EMPTY,
    Instance,
    PartialRealization,
    Prior,
    Realization,
    TableUtility,
    base_value,
    conditional_prior,
    expected_utility,
    is_consistent,
    is_subrealization,
    marginal_item,
    marginal_policy,
)
from .policy import (
    Policy,
    PolicyValue,
    STOP,
    adaptive_greedy,
    execute,
    nonadaptive_greedy,
    optimal_restricted_policy,
    path_policy,
    random_policy,
)
from .systems import (
    CardinalitySystem,
    ExplicitSystem,
    IndependenceSystem,
    KnapsackSystem,
    PartitionMatroidSystem,
    RestrictedSystem,
    rank,
    restrict,
)
from .checkers import (
    CheckReport,
    Witness,
    check_adaptive,
    check_policy_adaptive,
    check_policywise,
    conditioned_instance,
    policy_adaptive_counterexample,
    refute_policy_adaptive_with_witness,
)
from .sampling import (
    BernoulliSampling,
    ExplicitSampling,
    GapReport,
    expected_sampled_opt,
    lower_bound_instance,
    sampling_gap,
    verify_approx_sampling_ratio,
    verify_sampled_optimum_bound,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
