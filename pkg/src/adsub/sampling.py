"""Ground-set sampling distributions and the sampling-gap machinery.

A sampling distribution draws a random subset T of the ground set with
every item included with probability at least a declared rate r. The gap
of an instance under a distribution compares the optimal policy on the
full ground set with the expected optimal policy on T; for policywise
submodular utilities the expectation is bounded below by
(1 - r) f(empty) + r f_avg(optimal), and a one-item instance attains the
matching 1/r ratio exactly.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Optional

from .errors import CapacityError, InvalidParameterError, PolicyDomainViolationError
from .model import EMPTY, Instance, Prior, Realization, TableUtility, base_value, marginal_policy
from .policy import Policy, PolicyValue, execute, optimal_restricted_policy
from .systems import ExplicitSystem, restrict

EXACT_ENUMERATION_MAX_ITEMS = 20


@dataclass(frozen=True)
class BernoulliSampling:
    """Independent inclusion with probability ``rate`` (per-item overrides
    allowed, but never below the declared rate)."""

    n: int
    rate: float
    overrides: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise InvalidParameterError(f"rate {self.rate} outside [0, 1]")
        object.__setattr__(
            self, "overrides", tuple(sorted((int(e), float(p)) for e, p in self.overrides))
        )
        for e, p in self.overrides:
            if not 0 <= e < self.n:
                raise InvalidParameterError(f"override for item {e} outside ground set")
            if not 0.0 <= p <= 1.0:
                raise InvalidParameterError(f"inclusion probability {p} outside [0, 1]")
            if p < self.rate:
                raise InvalidParameterError(
                    f"item {e} inclusion probability {p} below the declared rate {self.rate}"
                )

    def item_probability(self, item: int) -> float:
        for e, p in self.overrides:
            if e == item:
                return p
        return self.rate

    def enumerate(self) -> Iterable[tuple[frozenset[int], float]]:
        if self.n > EXACT_ENUMERATION_MAX_ITEMS:
            raise CapacityError(f"subset enumeration capped at n={EXACT_ENUMERATION_MAX_ITEMS}")
        probs = [self.item_probability(e) for e in range(self.n)]
        for size in range(self.n + 1):
            for combo in combinations(range(self.n), size):
                subset = frozenset(combo)
                weight = 1.0
                for e in range(self.n):
                    weight *= probs[e] if e in subset else (1.0 - probs[e])
                if weight > 0.0:
                    yield subset, weight

    def sample(self, rng: random.Random) -> frozenset[int]:
        return frozenset(e for e in range(self.n) if rng.random() < self.item_probability(e))


@dataclass(frozen=True)
class ExplicitSampling:
    """Arbitrary (possibly correlated) subset distribution; the declared
    rate defaults to the minimum per-item inclusion marginal and may not
    exceed it."""

    n: int
    support: tuple[tuple[frozenset[int], float], ...]
    rate: float = -1.0

    def __post_init__(self):
        support = tuple(
            (frozenset(int(e) for e in subset), float(p)) for subset, p in self.support
        )
        object.__setattr__(self, "support", support)
        if not support:
            raise InvalidParameterError("explicit sampling support is empty")
        total = math.fsum(p for _s, p in support)
        if abs(total - 1.0) > 1e-9:
            raise InvalidParameterError(f"subset probabilities sum to {total}, not 1")
        if any(p < 0.0 for _s, p in support):
            raise InvalidParameterError("subset probabilities must be nonnegative")
        marginals = [
            math.fsum(p for subset, p in support if e in subset) for e in range(self.n)
        ]
        min_marginal = min(marginals) if marginals else 1.0
        declared = self.rate
        if declared < 0.0:
            declared = min_marginal
        if declared > min_marginal + 1e-12:
            raise InvalidParameterError(
                f"declared rate {declared} exceeds the minimum inclusion marginal {min_marginal}"
            )
        object.__setattr__(self, "rate", declared)

    def enumerate(self) -> Iterable[tuple[frozenset[int], float]]:
        return iter(self.support)

    def sample(self, rng: random.Random) -> frozenset[int]:
        x = rng.random()
        acc = 0.0
        for subset, p in self.support:
            acc += p
            if x < acc:
                return subset
        return self.support[-1][0]


PolicyBuilder = Callable[[Instance, object], Policy]


def _optimal_value_for_subset(inst: Instance, subset: frozenset[int], f_empty: float, node_budget: int) -> float:
    sub = restrict(inst.system, frozenset(), subset)
    return f_empty + optimal_restricted_policy(inst, sub, EMPTY, node_budget=node_budget).value


def _builder_value_for_subset(
    inst: Instance, subset: frozenset[int], f_empty: float, builder: PolicyBuilder
) -> float:
    sub = restrict(inst.system, frozenset(), subset)
    policy = builder(inst, sub)
    for phi in inst.prior.realizations:
        selected, _ = execute(policy, phi)
        if not sub.contains(selected):
            raise PolicyDomainViolationError(
                f"built policy selected infeasible set {sorted(selected)} for subset {sorted(subset)}"
            )
    return f_empty + marginal_policy(inst, EMPTY, policy)


def expected_sampled_opt(
    inst: Instance,
    dist,
    mode: str = "exact",
    trials: int = 10_000,
    seed: int = 0,
    policy_builder: Optional[PolicyBuilder] = None,
    node_budget: int = 1_000_000,
) -> float:
    """E_T[f_avg(optimal policy restricted to T)], absolute (includes f(empty)).

    Exact mode enumerates the subset distribution; Monte-Carlo mode averages
    over seeded draws. A policy builder substitutes a (feasible) heuristic
    policy per subset, making the result a lower-bound estimate.
    """
    f_empty = base_value(inst)

    def value_of(subset: frozenset[int]) -> float:
        if policy_builder is None:
            return _optimal_value_for_subset(inst, subset, f_empty, node_budget)
        return _builder_value_for_subset(inst, subset, f_empty, policy_builder)

    cache: dict[frozenset[int], float] = {}

    def cached(subset: frozenset[int]) -> float:
        v = cache.get(subset)
        if v is None:
            v = value_of(subset)
            cache[subset] = v
        return v

    if mode == "exact":
        return math.fsum(p * cached(subset) for subset, p in dist.enumerate())
    if mode == "mc":
        if trials < 1:
            raise InvalidParameterError("trials must be at least 1")
        rng = random.Random(seed)
        return math.fsum(cached(dist.sample(rng)) for _ in range(trials)) / trials
    raise InvalidParameterError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class GapReport:
    """Full-versus-sampled comparison for one instance and distribution."""

    rate: float
    full_value: float
    expected_sampled_value: float
    gap: Optional[float]
    bound_rhs: float
    degenerate: bool
    mode: str = "exact"
    lower_bound_estimate: bool = False


def sampling_gap(
    inst: Instance,
    dist,
    mode: str = "exact",
    trials: int = 10_000,
    seed: int = 0,
    policy_builder: Optional[PolicyBuilder] = None,
) -> GapReport:
    """Gap report: the ratio full / sampled is undefined (degenerate) when the
    sampled expectation is not positive, which negative-valued utilities
    permit."""
    f_empty = base_value(inst)
    full_system = restrict(inst.system, frozenset(), frozenset(range(inst.n)))
    full_value = f_empty + optimal_restricted_policy(inst, full_system, EMPTY).value
    expected = expected_sampled_opt(
        inst, dist, mode=mode, trials=trials, seed=seed, policy_builder=policy_builder
    )
    degenerate = not expected > 0.0
    gap = None if degenerate else full_value / expected
    rate = dist.rate
    return GapReport(
        rate=rate,
        full_value=full_value,
        expected_sampled_value=expected,
        gap=gap,
        bound_rhs=(1.0 - rate) * f_empty + rate * full_value,
        degenerate=degenerate,
        mode=mode,
        lower_bound_estimate=policy_builder is not None,
    )


@dataclass(frozen=True)
class SampledOptimumBoundResult:
    holds: bool
    expected_sampled_value: float
    bound_rhs: float
    margin: float


def verify_sampled_optimum_bound(inst: Instance, dist, tol: float = 1e-9) -> SampledOptimumBoundResult:
    """Check E_T[f_avg(opt_T)] >= (1 - r) f(empty) + r f_avg(opt_V) by exact
    enumeration; valid whenever the utility is policywise submodular for
    the instance's system (the caller asserts that hypothesis)."""
    report = sampling_gap(inst, dist, mode="exact")
    margin = report.expected_sampled_value - report.bound_rhs
    return SampledOptimumBoundResult(
        holds=margin >= -tol,
        expected_sampled_value=report.expected_sampled_value,
        bound_rhs=report.bound_rhs,
        margin=margin,
    )


@dataclass(frozen=True)
class ApproxSamplingRatioResult:
    holds: bool
    ratio: Optional[float]
    limit: float
    full_value: float
    expected_approx_value: float


def verify_approx_sampling_ratio(
    inst: Instance,
    dist,
    policy_builder: PolicyBuilder,
    alpha: float,
    tol: float = 1e-9,
) -> ApproxSamplingRatioResult:
    """Check f_avg(opt_V) / E_T[f_avg(approx_T)] <= 1 / (alpha r) for a
    builder producing alpha-approximate feasible policies per subset."""
    if not 0.0 < alpha <= 1.0:
        raise InvalidParameterError(f"alpha {alpha} outside (0, 1]")
    report = sampling_gap(inst, dist, mode="exact", policy_builder=policy_builder)
    limit = 1.0 / (alpha * dist.rate)
    if report.expected_sampled_value > 0.0:
        ratio = report.full_value / report.expected_sampled_value
        holds = ratio <= limit + tol
    else:
        ratio = None
        # A nonpositive denominator can only satisfy the ratio bound when the
        # numerator is nonpositive as well.
        holds = report.full_value <= tol
    return ApproxSamplingRatioResult(
        holds=holds,
        ratio=ratio,
        limit=limit,
        full_value=report.full_value,
        expected_approx_value=report.expected_sampled_value,
    )


def lower_bound_instance() -> Instance:
    """The extremal one-item instance: a single state, f(empty) = 0 and
    f({item}) = 1, feasibility {empty, {item}}. Its gap under Bernoulli
    sampling at rate r is exactly 1/r."""
    prior = Prior(realizations=(Realization((0,)),), probabilities=(1.0,))
    utility = TableUtility.from_aligned(
        {frozenset(): (0.0,), frozenset({0}): (1.0,)}, prior.realizations
    )
    system = ExplicitSystem(1, [frozenset(), frozenset({0})])
    return Instance(n=1, state_count=1, prior=prior, utility=utility, system=system)
