"""Decision-tree policies and the four solvers built on them.

A policy is a deterministic tree: each internal node names the item to
select next and branches on its observed state; leaves stop. The exact
optimal restricted policy is computed by memoized recursion over
canonical observation sets; greedy and random baselines return the same
tree type so every policy is evaluated by the same exact machinery.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional

from .errors import CapacityError, MalformedPolicyError, UnobservablePartialRealizationError
from .model import (
    EMPTY,
    Instance,
    PartialRealization,
    Prior,
    Realization,
    marginal_item,
)

DEFAULT_NODE_BUDGET = 1_000_000


@dataclass(frozen=True)
class Policy:
    """Immutable decision tree; ``item is None`` marks a stop leaf.

    Children are kept as a state-sorted tuple of (state, subtree) pairs so
    structurally equal trees compare equal and serialize identically.
    """

    item: Optional[int] = None
    children: tuple[tuple[int, "Policy"], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(sorted(self.children)))
        if self.item is None and self.children:
            raise MalformedPolicyError("stop leaf cannot have children")

    @classmethod
    def stop(cls) -> "Policy":
        return STOP

    @classmethod
    def select(cls, item: int, children: Mapping[int, "Policy"]) -> "Policy":
        return cls(item=int(item), children=tuple((int(s), c) for s, c in children.items()))

    @property
    def is_stop(self) -> bool:
        return self.item is None

    def child_for(self, state: int) -> Optional["Policy"]:
        for s, child in self.children:
            if s == state:
                return child
        return None


STOP = Policy()


@dataclass(frozen=True)
class PolicyValue:
    value: float
    policy: Policy


def execute(policy: Policy, phi: Realization) -> tuple[frozenset[int], PartialRealization]:
    """Run the tree on a realization; returns (selected items, observation trace)."""
    selected: list[int] = []
    trace: list[tuple[int, int]] = []
    node = policy
    while not node.is_stop:
        item = node.item
        state = phi.state_of(item)
        selected.append(item)
        trace.append((item, state))
        child = node.child_for(state)
        if child is None:
            raise MalformedPolicyError(f"no branch for state {state} of item {item}")
        node = child
    return frozenset(selected), PartialRealization(tuple(trace))


def validate_no_repeats(policy: Policy, seen: frozenset[int] = frozenset()) -> None:
    if policy.is_stop:
        return
    if policy.item in seen:
        raise MalformedPolicyError(f"item {policy.item} repeats on a root-to-leaf path")
    below = seen | {policy.item}
    for _state, child in policy.children:
        validate_no_repeats(child, below)


def selected_sets(inst: Instance, policy: Policy) -> list[frozenset[int]]:
    return [execute(policy, phi)[0] for phi in inst.prior.realizations]


def is_feasible_policy(inst: Instance, system, policy: Policy) -> bool:
    return all(system.contains(s) for s in selected_sets(inst, policy))


class SupportIndex:
    """Bitmask index over a prior's support for fast consistency filtering."""

    def __init__(self, prior: Prior, n: int):
        self.prior = prior
        self.n = n
        self.full_mask = (1 << len(prior)) - 1
        self._state_masks: list[dict[int, int]] = [dict() for _ in range(n)]
        for i, phi in enumerate(prior.realizations):
            for e, s in enumerate(phi.states):
                self._state_masks[e][s] = self._state_masks[e].get(s, 0) | (1 << i)

    def mask(self, psi: PartialRealization) -> int:
        m = self.full_mask
        for e, s in psi.observations:
            m &= self._state_masks[e].get(s, 0)
            if not m:
                return 0
        return m

    def groups(self, mask: int, item: int) -> list[tuple[int, int]]:
        """Split a consistency mask by the given item's state; sorted by state."""
        out = []
        for state, smask in self._state_masks[item].items():
            sub = mask & smask
            if sub:
                out.append((state, sub))
        out.sort()
        return out

    def indices(self, mask: int) -> list[int]:
        out = []
        while mask:
            low = mask & -mask
            out.append(low.bit_length() - 1)
            mask ^= low
        return out

    def mass(self, mask: int) -> float:
        probs = self.prior.probabilities
        return math.fsum(probs[i] for i in self.indices(mask))


def optimal_restricted_policy(
    inst: Instance,
    system,
    psi: PartialRealization = EMPTY,
    *,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> PolicyValue:
    """Exact optimal policy value on top of psi under the given system.

    Recursion over observation sets: at each node the policy either stops
    (value 0, always feasible since the empty set is independent) or picks
    a feasible item, collecting its conditional marginal plus the expected
    value of the optimal continuation per observed state. Memoized on the
    canonical observation set, since the value is order-independent. Ties
    break toward stopping, then toward the lowest item id. The returned
    value is the marginal on top of psi, not the absolute expected utility.
    """
    index = SupportIndex(inst.prior, inst.n)
    root_mask = index.mask(psi)
    if not root_mask:
        raise UnobservablePartialRealizationError(
            f"no support realization is consistent with {psi.observations}"
        )
    dom0 = psi.domain_set
    pool = [
        e
        for e in range(inst.n)
        if e not in dom0 and system.contains(frozenset((e,)))
    ]
    probs = inst.prior.probabilities
    support = inst.prior.realizations
    utility = inst.utility

    fcache: dict[tuple[frozenset[int], int], float] = {}

    def fval(items: frozenset[int], i: int) -> float:
        key = (items, i)
        v = fcache.get(key)
        if v is None:
            v = utility.evaluate(items, support[i])
            fcache[key] = v
        return v

    # memo: canonical observations -> (value, chosen item or None, ((state, child key), ...))
    memo: dict[tuple, tuple[float, Optional[int], tuple]] = {}

    def solve(obs: tuple, mask: int) -> float:
        hit = memo.get(obs)
        if hit is not None:
            return hit[0]
        if len(memo) >= node_budget:
            raise CapacityError(f"optimal-policy recursion exceeded {node_budget} states")
        dom = frozenset(e for e, _ in obs)
        sel = dom - dom0
        idx = index.indices(mask)
        total = math.fsum(probs[i] for i in idx)
        best_value = 0.0
        best_item: Optional[int] = None
        best_children: tuple = ()
        for e in pool:
            if e in dom:
                continue
            if not system.contains(sel | {e}):
                continue
            dom_e = dom | {e}
            gain = math.fsum(probs[i] * (fval(dom_e, i) - fval(dom, i)) for i in idx) / total
            parts = [gain]
            children = []
            for state, sub in index.groups(mask, e):
                child_obs = tuple(sorted(obs + ((e, state),)))
                weight = math.fsum(probs[i] for i in index.indices(sub)) / total
                parts.append(weight * solve(child_obs, sub))
                children.append((state, child_obs))
            value = math.fsum(parts)
            if value > best_value:
                best_value = value
                best_item = e
                best_children = tuple(children)
        memo[obs] = (best_value, best_item, best_children)
        return best_value

    root_obs = psi.observations
    value = solve(root_obs, root_mask)

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

    return PolicyValue(value=value, policy=build(root_obs))


Estimator = Callable[[Instance, PartialRealization, int], float]


def exact_marginal_estimator(inst: Instance, psi: PartialRealization, item: int) -> float:
    return marginal_item(inst, psi, item)


def adaptive_greedy(
    inst: Instance,
    system,
    estimator: Optional[Estimator] = None,
    *,
    stop_at_nonpositive: bool = False,
) -> Policy:
    """Greedy tree: at each node select the feasible item with the largest
    estimated conditional marginal (ties to the lowest id), branch on its
    observed state, and continue until no feasible item remains.

    With ``stop_at_nonpositive`` the tree also stops once the best estimate
    drops to zero or below; the default keeps selecting, which matches
    budget-exhausting experiment protocols.
    """
    est = estimator or exact_marginal_estimator
    index = SupportIndex(inst.prior, inst.n)

    def expand(psi: PartialRealization, mask: int, sel: frozenset[int]) -> Policy:
        best_item = None
        best_score = -math.inf
        for e in range(inst.n):
            if psi.has(e) or not system.contains(sel | {e}):
                continue
            score = est(inst, psi, e)
            if score > best_score:
                best_score = score
                best_item = e
        if best_item is None:
            return STOP
        if stop_at_nonpositive and best_score <= 0.0:
            return STOP
        children = {}
        for state, sub in index.groups(mask, best_item):
            children[state] = expand(
                psi.with_observation(best_item, state), sub, sel | {best_item}
            )
        return Policy.select(best_item, children)

    return expand(EMPTY, index.full_mask, frozenset())


SetEstimator = Callable[[Instance, frozenset[int], int], float]


def exact_set_marginal(inst: Instance, items: frozenset[int], item: int) -> float:
    """Unconditioned expected gain of adding one item to a fixed set."""
    with_item = items | {item}
    return math.fsum(
        p * (inst.utility.evaluate(with_item, phi) - inst.utility.evaluate(items, phi))
        for phi, p in inst.prior.items()
    )


def nonadaptive_greedy(
    inst: Instance,
    system,
    set_estimator: Optional[SetEstimator] = None,
    *,
    stop_at_nonpositive: bool = False,
) -> Policy:
    """Greedy on expected set value with no conditioning; the resulting
    policy selects the same items under every realization."""
    est = set_estimator or exact_set_marginal
    order: list[int] = []
    chosen: frozenset[int] = frozenset()
    while True:
        best_item = None
        best_score = -math.inf
        for e in range(inst.n):
            if e in chosen or not system.contains(chosen | {e}):
                continue
            score = est(inst, chosen, e)
            if score > best_score:
                best_score = score
                best_item = e
        if best_item is None:
            break
        if stop_at_nonpositive and best_score <= 0.0:
            break
        order.append(best_item)
        chosen = chosen | {best_item}
    return path_policy(inst, order)


def random_policy(inst: Instance, system, k: int, seed: int) -> Policy:
    """Seeded random baseline: scan a uniform permutation, keep items while
    they stay feasible and fewer than k are chosen."""
    rng = random.Random(seed)
    perm = list(range(inst.n))
    rng.shuffle(perm)
    chosen: list[int] = []
    fs: frozenset[int] = frozenset()
    for e in perm:
        if len(chosen) >= k:
            break
        if system.contains(fs | {e}):
            chosen.append(e)
            fs = fs | {e}
    return path_policy(inst, sorted(chosen))


def path_policy(inst: Instance, items: Iterable[int]) -> Policy:
    """A path-shaped tree selecting the given items in order regardless of
    observations, branching only to stay executable on every support
    realization."""
    order = list(items)
    index = SupportIndex(inst.prior, inst.n)

    def build(i: int, mask: int) -> Policy:
        if i == len(order):
            return STOP
        e = order[i]
        children = {
            state: build(i + 1, sub) for state, sub in index.groups(mask, e)
        }
        return Policy.select(e, children)

    return build(0, index.full_mask)
