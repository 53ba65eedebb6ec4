"""Reusable verification batches behind the ``verify`` CLI subcommand.

Each batch returns a list of named pass/fail lines; the test suite runs
the same functions, so CLI output and pytest agree by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from .checkers import (
    check_adaptive,
    check_policy_adaptive,
    check_policywise,
    conditioned_instance,
    observable_partials,
    policy_adaptive_counterexample,
    refute_policy_adaptive_with_witness,
)
from .fixtures import random_independent_instance
from .model import marginal_policy
from .policy import SupportIndex
from .sampling import BernoulliSampling, lower_bound_instance, sampling_gap, verify_sampled_optimum_bound
from .systems import (
    CardinalitySystem,
    ExplicitSystem,
    IndependenceSystem,
    KnapsackSystem,
    PartitionMatroidSystem,
    restrict,
)

TOL = 1e-9


@dataclass(frozen=True)
class CheckLine:
    name: str
    passed: bool
    detail: str = ""


def built_systems_catalog(n: int = 6) -> list[tuple[str, IndependenceSystem]]:
    """One representative per constructor at ground size n."""
    explicit = ExplicitSystem(
        n, [frozenset({0, 1}), frozenset({2, 3}), frozenset({1, 4})], close=True
    )
    blocks = (tuple(range(0, n // 2)), tuple(range(n // 2, n)))
    return [
        ("cardinality", CardinalitySystem(n=n, k=max(1, n // 2))),
        ("knapsack", KnapsackSystem(costs=tuple(1.0 + 0.5 * i for i in range(n)), budget=4.0)),
        ("partition", PartitionMatroidSystem(blocks=blocks, limits=(1, 2))),
        ("explicit", explicit),
    ]


def _feasible_sets(system: IndependenceSystem) -> list[frozenset[int]]:
    out = []
    for size in range(system.n + 1):
        for combo in combinations(range(system.n), size):
            s = frozenset(combo)
            if system.contains(s):
                out.append(s)
    return out


def restriction_axioms_hold(system: IndependenceSystem) -> bool:
    """For every valid (selected, pool) pair the restriction contains the
    empty set, is downward-closed, and only holds sets feasible in the base."""
    n = system.n
    ground = frozenset(range(n))
    for selected in _feasible_sets(system):
        rest = sorted(ground - selected)
        for size in range(len(rest) + 1):
            for pool_tuple in combinations(rest, size):
                pool = frozenset(pool_tuple)
                sub = restrict(system, selected, pool)
                if not sub.contains(frozenset()):
                    return False
                for a_size in range(len(pool_tuple) + 1):
                    for a in combinations(pool_tuple, a_size):
                        aset = frozenset(a)
                        if not sub.contains(aset):
                            continue
                        if not system.contains(aset):
                            return False
                        for e in aset:
                            if not sub.contains(aset - {e}):
                                return False
    return True


def singleton_restriction_drops_rank(system: IndependenceSystem) -> bool:
    """Restricting by one feasible item strictly lowers the rank."""
    r = system.rank()
    if r == 0:
        return True
    ground = frozenset(range(system.n))
    for e in range(system.n):
        if not system.contains(frozenset({e})):
            continue
        sub = restrict(system, frozenset({e}), ground - {e})
        if not sub.rank() < r:
            return False
    return True


def restriction_antitone_in_selected(system: IndependenceSystem) -> bool:
    """Shrinking the already-selected set only enlarges the restriction."""
    n = system.n
    ground = frozenset(range(n))
    for selected in _feasible_sets(system):
        sel = sorted(selected)
        rest = sorted(ground - selected)
        for r_size in range(len(rest) + 1):
            for pool_tuple in combinations(rest, r_size):
                pool = frozenset(pool_tuple)
                sub = restrict(system, selected, pool)
                feasible_in_sub = [
                    frozenset(a)
                    for a_size in range(len(pool_tuple) + 1)
                    for a in combinations(pool_tuple, a_size)
                    if sub.contains(frozenset(a))
                ]
                for s_size in range(len(sel) + 1):
                    for smaller in combinations(sel, s_size):
                        weaker = restrict(system, frozenset(smaller), pool)
                        if not all(weaker.contains(a) for a in feasible_in_sub):
                            return False
    return True


def conditioning_preserves_policywise(inst, include_empty: bool = False) -> bool:
    """Committing to any observable, feasible observation set keeps the
    conditioned instance in the optimal-policy diminishing-returns class."""
    index = SupportIndex(inst.prior, inst.n)
    for psi, _mask in observable_partials(inst, index):
        if not psi.observations and not include_empty:
            continue
        if not inst.system.contains(psi.domain_set):
            continue
        conditioned = conditioned_instance(inst, psi)
        if not check_policywise(conditioned).holds:
            return False
    return True


def implication_chain_holds(inst) -> bool:
    """Whole-policy class membership must imply both weaker classes."""
    if not check_policy_adaptive(inst).holds:
        return True
    return check_adaptive(inst).holds and check_policywise(inst).holds


def run_restriction_laws(n: int = 6) -> list[CheckLine]:
    lines = []
    for name, system in built_systems_catalog(n):
        lines.append(
            CheckLine(f"restriction-axioms[{name}]", restriction_axioms_hold(system))
        )
        lines.append(
            CheckLine(
                f"singleton-restriction-rank-drop[{name}]",
                singleton_restriction_drops_rank(system),
            )
        )
        lines.append(
            CheckLine(
                f"restriction-antitone[{name}]", restriction_antitone_in_selected(system)
            )
        )
    fixtures = [random_independent_instance(seed, max_items=3, max_states=2) for seed in range(6)]
    lines.append(
        CheckLine(
            "conditioning-preserves-policywise",
            all(conditioning_preserves_policywise(i) for i in fixtures),
        )
    )
    lines.append(
        CheckLine(
            "implication-chain",
            all(implication_chain_holds(i) for i in fixtures),
        )
    )
    return lines


def run_sampling_bound(num_instances: int = 20) -> list[CheckLine]:
    lines = []
    inst = lower_bound_instance()
    grid_ok = True
    worst = 0.0
    for i in range(1, 11):
        rate = i / 10.0
        report = sampling_gap(inst, BernoulliSampling(n=1, rate=rate))
        dev = abs((report.gap or math.inf) - 1.0 / rate)
        worst = max(worst, dev)
        if dev > TOL:
            grid_ok = False
    lines.append(CheckLine("one-item-gap-equals-inverse-rate", grid_ok, f"max dev {worst:.2e}"))
    bound_ok = True
    for seed in range(num_instances):
        fixture = random_independent_instance(seed)
        for rate in (0.25, 0.5, 0.75):
            result = verify_sampled_optimum_bound(
                fixture, BernoulliSampling(n=fixture.n, rate=rate)
            )
            if not result.holds:
                bound_ok = False
    lines.append(
        CheckLine(f"sampled-optimum-bound[{num_instances} instances x 3 rates]", bound_ok)
    )
    return lines


def run_counterexample() -> list[CheckLine]:
    inst, psi_a, psi_b, policy = policy_adaptive_counterexample()
    lhs = marginal_policy(inst, psi_a, policy)
    rhs = marginal_policy(inst, psi_b, policy)
    lines = [
        CheckLine("witness-marginal-under-observation", abs(rhs - 5.0) <= TOL, f"{rhs!r}"),
        CheckLine("witness-marginal-unconditioned", abs(lhs - 2.5) <= TOL, f"{lhs!r}"),
    ]
    refute = refute_policy_adaptive_with_witness(inst, psi_a, psi_b, policy)
    lines.append(CheckLine("witness-refutes-whole-policy-class", not refute.holds))
    full = check_policy_adaptive(inst)
    lines.append(CheckLine("whole-policy-check-fails", not full.holds))
    lines.append(CheckLine("single-item-check-passes", check_adaptive(inst).holds))
    lines.append(CheckLine("optimal-policy-check-passes", check_policywise(inst).holds))
    return lines


SCOPES = ("laws", "bound", "counterexample", "all")


def run_verify(scope: str) -> list[CheckLine]:
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}; expected one of {SCOPES}")
    lines: list[CheckLine] = []
    if scope in ("laws", "all"):
        lines.extend(run_restriction_laws())
    if scope in ("bound", "all"):
        lines.extend(run_sampling_bound())
    if scope in ("counterexample", "all"):
        lines.extend(run_counterexample())
    return lines
