"""Exhaustive desk-scale checkers for the three diminishing-returns classes.

``check_adaptive`` compares single-item conditional marginals across nested
observation sets; ``check_policy_adaptive`` quantifies over every
deterministic policy on the remaining items (via an exact max-gap dynamic
program over observation histories, equivalent to enumerating all decision
trees); ``check_policywise`` compares optimal restricted-policy values.
All quantification ranges only over observable partial realizations,
because conditioning on zero-mass observations is undefined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

from .errors import CapacityError, InvalidWitnessError
from .model import (
    EMPTY,
    Instance,
    PartialRealization,
    conditional_prior,
    is_subrealization,
    marginal_policy,
)
from .policy import STOP, Policy, SupportIndex, optimal_restricted_policy
from .systems import CardinalitySystem, RestrictedSystem, restrict

TOL = 1e-9
DEFAULT_PAIR_CAP = 10_000_000


@dataclass(frozen=True)
class Witness:
    """A violating comparison: the two nested observation sets, the item or
    policy whose marginals were compared, and both side values."""

    psi_a: PartialRealization
    psi_b: PartialRealization
    lhs: float
    rhs: float
    item: Optional[int] = None
    policy: Optional[Policy] = None
    lhs_policy: Optional[Policy] = None
    rhs_policy: Optional[Policy] = None


@dataclass(frozen=True)
class CheckReport:
    holds: bool
    witness: Optional[Witness] = None
    comparisons: int = 0

    def __post_init__(self):
        if not self.holds and self.witness is None:
            raise InvalidWitnessError("failing report requires a witness")


def observable_partials(inst: Instance, index: SupportIndex) -> list[tuple[PartialRealization, int]]:
    """All positive-mass observation sets, in canonical order: domain size,
    then domain, then observed states."""
    out: list[tuple[PartialRealization, int]] = []
    for size in range(inst.n + 1):
        for dom in combinations(range(inst.n), size):
            variants = sorted({phi.restrict(dom).observations for phi in inst.prior.realizations})
            for obs in variants:
                psi = PartialRealization(obs)
                out.append((psi, index.mask(psi)))
    return out


def _sub_partials(psi: PartialRealization) -> list[PartialRealization]:
    dom = psi.domain
    out = []
    for size in range(len(dom) + 1):
        for keep in combinations(dom, size):
            out.append(psi.restrict_to(keep))
    return out


class _MarginalCache:
    """Mask-based conditional item marginals, memoized per observation set."""

    def __init__(self, inst: Instance, index: SupportIndex):
        self.inst = inst
        self.index = index
        self._fvals: dict[tuple[frozenset[int], int], float] = {}
        self._marginals: dict[tuple[tuple, int], float] = {}

    def fval(self, items: frozenset[int], i: int) -> float:
        key = (items, i)
        v = self._fvals.get(key)
        if v is None:
            v = self.inst.utility.evaluate(items, self.inst.prior.realizations[i])
            self._fvals[key] = v
        return v

    def marginal(self, psi: PartialRealization, mask: int, item: int) -> float:
        key = (psi.observations, item)
        v = self._marginals.get(key)
        if v is None:
            probs = self.inst.prior.probabilities
            idx = self.index.indices(mask)
            total = math.fsum(probs[i] for i in idx)
            dom = psi.domain_set
            dom_e = dom | {item}
            v = math.fsum(
                probs[i] * (self.fval(dom_e, i) - self.fval(dom, i)) for i in idx
            ) / total
            self._marginals[key] = v
        return v


def check_adaptive(inst: Instance, tol: float = TOL, cap: int = DEFAULT_PAIR_CAP) -> CheckReport:
    """Single-item diminishing returns: growing the observation set never
    increases any remaining item's conditional marginal."""
    if (2 ** inst.n) * len(inst.prior) > cap:
        raise CapacityError("adaptive-submodularity enumeration exceeds the configured cap")
    index = SupportIndex(inst.prior, inst.n)
    cache = _MarginalCache(inst, index)
    comparisons = 0
    for psi_b, mask_b in observable_partials(inst, index):
        dom_b = psi_b.domain_set
        subs = _sub_partials(psi_b)
        for psi_a in subs:
            mask_a = index.mask(psi_a)
            for e in range(inst.n):
                if e in dom_b:
                    continue
                lhs = cache.marginal(psi_a, mask_a, e)
                rhs = cache.marginal(psi_b, mask_b, e)
                comparisons += 1
                if lhs < rhs - tol:
                    return CheckReport(
                        holds=False,
                        witness=Witness(psi_a=psi_a, psi_b=psi_b, item=e, lhs=lhs, rhs=rhs),
                        comparisons=comparisons,
                    )
    return CheckReport(holds=True, comparisons=comparisons)


def _max_policy_gap(
    inst: Instance,
    index: SupportIndex,
    cache: _MarginalCache,
    psi_a: PartialRealization,
    psi_b: PartialRealization,
    cap: int,
) -> tuple[float, Policy]:
    """Maximize f_avg(pi | psi_b) - f_avg(pi | psi_a) over every deterministic
    policy on items outside dom(psi_b).

    Exact over the full tree space: two realizations sharing an observation
    history must share the continuation, so a memoized recursion over
    canonical histories attains the same maximum as literal tree
    enumeration. Returns the gap and one argmax tree (ties prefer stopping,
    then the lowest item id).
    """
    probs = inst.prior.probabilities
    mask_a = index.mask(psi_a)
    mask_b = index.mask(psi_b)
    za = math.fsum(probs[i] for i in index.indices(mask_a))
    zb = math.fsum(probs[i] for i in index.indices(mask_b))
    dom_a = psi_a.domain_set
    dom_b = psi_b.domain_set
    items = [e for e in range(inst.n) if e not in dom_b]
    if (2 ** len(items)) * len(inst.prior) > cap:
        raise CapacityError("policy-space maximization exceeds the configured cap")

    base_a = {i: cache.fval(dom_a, i) for i in index.indices(mask_a)}
    base_b = {i: cache.fval(dom_b, i) for i in index.indices(mask_b)}

    memo: dict[tuple, tuple[float, Optional[int], tuple]] = {}

    def best(obs: tuple, alive: int) -> float:
        hit = memo.get(obs)
        if hit is not None:
            return hit[0]
        chosen = frozenset(e for e, _ in obs)
        set_a = dom_a | chosen
        set_b = dom_b | chosen
        stop_terms = []
        for i in index.indices(alive):
            bit = 1 << i
            if mask_b & bit:
                stop_terms.append((probs[i] / zb) * (cache.fval(set_b, i) - base_b[i]))
            stop_terms.append(-(probs[i] / za) * (cache.fval(set_a, i) - base_a[i]))
        best_value = math.fsum(stop_terms)
        best_item: Optional[int] = None
        best_children: tuple = ()
        for e in items:
            if e in chosen:
                continue
            children = []
            parts = []
            for state, sub in index.groups(alive, e):
                child_obs = tuple(sorted(obs + ((e, state),)))
                parts.append(best(child_obs, sub))
                children.append((state, child_obs))
            value = math.fsum(parts)
            if value > best_value:
                best_value = value
                best_item = e
                best_children = tuple(children)
        memo[obs] = (best_value, best_item, best_children)
        return best_value

    gap = best((), mask_a)

    built: dict[tuple, Policy] = {}

    def build(obs: tuple) -> Policy:
        node = built.get(obs)
        if node is not None:
            return node
        _v, item, children = memo[obs]
        if item is None:
            node = STOP
        else:
            node = Policy.select(item, {state: build(child) for state, child in children})
        built[obs] = node
        return node

    return gap, build(())


def check_policy_adaptive(inst: Instance, tol: float = TOL, cap: int = DEFAULT_PAIR_CAP) -> CheckReport:
    """Whole-policy diminishing returns: for every nested observable pair and
    every deterministic policy over the remaining items, the conditional
    marginal of the policy must not grow with the observation set."""
    index = SupportIndex(inst.prior, inst.n)
    cache = _MarginalCache(inst, index)
    comparisons = 0
    for psi_b, _mask_b in observable_partials(inst, index):
        for psi_a in _sub_partials(psi_b):
            gap, tree = _max_policy_gap(inst, index, cache, psi_a, psi_b, cap)
            comparisons += 1
            if gap > tol:
                lhs = marginal_policy(inst, psi_a, tree)
                rhs = marginal_policy(inst, psi_b, tree)
                return CheckReport(
                    holds=False,
                    witness=Witness(psi_a=psi_a, psi_b=psi_b, policy=tree, lhs=lhs, rhs=rhs),
                    comparisons=comparisons,
                )
    return CheckReport(holds=True, comparisons=comparisons)


def refute_policy_adaptive_with_witness(
    inst: Instance,
    psi_a: PartialRealization,
    psi_b: PartialRealization,
    policy: Policy,
    tol: float = TOL,
) -> CheckReport:
    """Evaluate the whole-policy inequality for one supplied witness only."""
    if not is_subrealization(psi_a, psi_b):
        raise InvalidWitnessError("psi_a must be a subrealization of psi_b")
    conditional_prior(inst.prior, psi_b)  # raises if unobservable
    lhs = marginal_policy(inst, psi_a, policy)
    rhs = marginal_policy(inst, psi_b, policy)
    holds = not lhs < rhs - tol
    witness = Witness(psi_a=psi_a, psi_b=psi_b, policy=policy, lhs=lhs, rhs=rhs)
    return CheckReport(holds=holds, witness=witness, comparisons=1)


def check_policywise(
    inst: Instance,
    tol: float = TOL,
    cap: int = DEFAULT_PAIR_CAP,
    node_budget: int = 1_000_000,
) -> CheckReport:
    """Optimal-policy diminishing returns: for every nested observable pair
    with independent dom(psi_b) and every candidate pool disjoint from it,
    the optimal restricted policy's conditional marginal must not grow."""
    system = inst.system
    index = SupportIndex(inst.prior, inst.n)
    if (8 ** inst.n) * len(inst.prior) > cap:
        raise CapacityError("policywise enumeration exceeds the configured cap")
    values: dict[tuple, "object"] = {}

    def opt(selected: frozenset[int], pool: frozenset[int], psi: PartialRealization):
        key = (selected, pool, psi.observations)
        hit = values.get(key)
        if hit is None:
            sub = RestrictedSystem(base=system, selected=selected, pool=pool)
            hit = optimal_restricted_policy(inst, sub, psi, node_budget=node_budget)
            values[key] = hit
        return hit

    comparisons = 0
    for psi_b, _mask_b in observable_partials(inst, index):
        dom_b = psi_b.domain_set
        if not system.contains(dom_b):
            continue
        rest = sorted(set(range(inst.n)) - dom_b)
        subs = _sub_partials(psi_b)
        for psi_a in subs:
            for size in range(len(rest) + 1):
                for pool_tuple in combinations(rest, size):
                    pool_full = frozenset(pool_tuple)
                    # Items never extendable from dom_b do not change the family.
                    pool = frozenset(
                        e for e in pool_full if system.contains(dom_b | {e})
                    )
                    lhs_pv = opt(dom_b, pool, psi_a)
                    rhs_pv = opt(dom_b, pool, psi_b)
                    comparisons += 1
                    if lhs_pv.value < rhs_pv.value - tol:
                        return CheckReport(
                            holds=False,
                            witness=Witness(
                                psi_a=psi_a,
                                psi_b=psi_b,
                                lhs=lhs_pv.value,
                                rhs=rhs_pv.value,
                                lhs_policy=lhs_pv.policy,
                                rhs_policy=rhs_pv.policy,
                            ),
                            comparisons=comparisons,
                        )
    return CheckReport(holds=True, comparisons=comparisons)


@dataclass(frozen=True)
class ConditionedUtility:
    """f conditioned on a fixed observation set: g(S, phi) = f(S + dom, phi) - f(dom, phi)."""

    base: object
    conditioning_domain: frozenset[int]

    def evaluate(self, items: frozenset[int], realization) -> float:
        dom = self.conditioning_domain
        return self.base.evaluate(frozenset(items) | dom, realization) - self.base.evaluate(
            dom, realization
        )


def conditioned_instance(inst: Instance, psi: PartialRealization) -> Instance:
    """The instance seen after committing to psi: conditional prior, marginal
    utility on top of dom(psi), and the system restricted to the remaining
    items with dom(psi) already selected."""
    dom = psi.domain_set
    rest = frozenset(range(inst.n)) - dom
    return Instance(
        n=inst.n,
        state_count=inst.state_count,
        prior=conditional_prior(inst.prior, psi),
        utility=ConditionedUtility(base=inst.utility, conditioning_domain=dom),
        system=restrict(inst.system, dom, rest),
    )


def policy_adaptive_counterexample() -> tuple[Instance, PartialRealization, PartialRealization, Policy]:
    """A seven-node cascade instance separating the whole-policy class from
    the optimal-policy class.

    One random edge (node 1 -> node 2, probability 0.1) sits behind a
    deterministic edge 0 -> 1; a disjoint deterministic chain 3 -> 4 -> 5 -> 6
    provides a large fallback. The returned policy selects node 0 and adds
    node 3 only when the random edge is observed live. Conditioning on the
    lucky observation raises the policy's marginal (5.0) above its marginal
    under no observations (2.5), refuting the whole-policy inequality, while
    the instance still satisfies the single-item and optimal-policy classes.
    """
    from .viral import Graph, ic_instance

    graph = Graph(
        n=7,
        edges=((0, 1, 1.0), (1, 2, 0.1), (3, 4, 1.0), (4, 5, 1.0), (5, 6, 1.0)),
    )
    inst = ic_instance(graph, system=CardinalitySystem(n=7, k=2))
    views = inst.utility.views
    live_phi = None
    blocked_phi = None
    for phi in inst.prior.realizations:
        if views[phi.states[1]][1] == 1:
            live_phi = phi
        else:
            blocked_phi = phi
    assert live_phi is not None and blocked_phi is not None
    psi_b = PartialRealization(((1, live_phi.states[1]),))
    psi_a = EMPTY
    live_branch = Policy.select(3, {live_phi.states[3]: STOP})
    policy = Policy.select(
        0,
        {
            live_phi.states[0]: live_branch,
            blocked_phi.states[0]: STOP,
        },
    )
    return inst, psi_a, psi_b, policy
