"""Seeded fixture generators shared by the test suite and the verify CLI.

The independent-state fixtures draw utilities from three families
(additive, budget-truncated additive, max-of-weights over nonnegative
state weights). Each family has nonincreasing single-item marginals in
the already-observed base value, so with independent states the fixtures
satisfy the optimal-policy diminishing-returns hypothesis by construction;
the checkers re-certify a sample of them in the tests.
"""

from __future__ import annotations

import math
import random
from itertools import combinations, product
from typing import Optional

from .active_learning import ActiveLearningInstance, generate_al_instance
from .model import Instance, Prior, Realization, TableUtility
from .systems import (
    CardinalitySystem,
    ExplicitSystem,
    IndependenceSystem,
    KnapsackSystem,
    PartitionMatroidSystem,
)
from .viral import Graph, ic_instance

UTILITY_FAMILIES = ("additive", "truncated", "max")


def random_system(rng: random.Random, n: int) -> IndependenceSystem:
    kind = rng.choice(("cardinality", "knapsack", "partition", "explicit"))
    if kind == "cardinality":
        return CardinalitySystem(n=n, k=rng.randint(1, n))
    if kind == "knapsack":
        costs = tuple(rng.uniform(0.5, 2.0) for _ in range(n))
        budget = rng.uniform(min(costs), sum(costs))
        return KnapsackSystem(costs=costs, budget=budget)
    if kind == "partition":
        items = list(range(n))
        rng.shuffle(items)
        cut = rng.randint(1, n - 1) if n > 1 else 1
        blocks = (tuple(items[:cut]), tuple(items[cut:])) if cut < n else (tuple(items),)
        limits = tuple(rng.randint(1, max(1, len(b))) for b in blocks)
        return PartitionMatroidSystem(blocks=blocks, limits=limits)
    seeds = [frozenset(rng.sample(range(n), rng.randint(0, n))) for _ in range(3)]
    return ExplicitSystem(n, seeds + [frozenset()], close=True)


def _independent_prior(rng: random.Random, n: int, states: int) -> Prior:
    dists = []
    for _ in range(n):
        raw = [rng.uniform(0.1, 1.0) for _ in range(states)]
        total = math.fsum(raw)
        dists.append([x / total for x in raw])
    realizations = []
    probabilities = []
    for combo in product(range(states), repeat=n):
        p = 1.0
        for e, s in enumerate(combo):
            p *= dists[e][s]
        realizations.append(Realization(combo))
        probabilities.append(p)
    return Prior(realizations=tuple(realizations), probabilities=tuple(probabilities))


def _table_from_function(n: int, prior: Prior, fn) -> TableUtility:
    values = {}
    for size in range(n + 1):
        for combo in combinations(range(n), size):
            key = frozenset(combo)
            values[key] = tuple(fn(key, phi) for phi in prior.realizations)
    return TableUtility.from_aligned(values, prior.realizations)


def random_independent_instance(
    seed: int,
    max_items: int = 4,
    max_states: int = 3,
    family: Optional[str] = None,
    system: Optional[IndependenceSystem] = None,
) -> Instance:
    """Independent-state instance whose utility family guarantees
    single-item diminishing returns (hence, by independence, the
    optimal-policy class as well)."""
    rng = random.Random(seed)
    n = rng.randint(2, max_items)
    states = rng.randint(2, max_states)
    prior = _independent_prior(rng, n, states)
    weights = [[rng.uniform(0.0, 1.0) for _ in range(states)] for _ in range(n)]
    fam = family or rng.choice(UTILITY_FAMILIES)
    if fam == "additive":
        fn = lambda S, phi: math.fsum(weights[e][phi.states[e]] for e in S)
    elif fam == "truncated":
        cap = rng.uniform(0.4, 0.9) * math.fsum(max(w) for w in weights)
        fn = lambda S, phi: min(cap, math.fsum(weights[e][phi.states[e]] for e in S))
    elif fam == "max":
        fn = lambda S, phi: max((weights[e][phi.states[e]] for e in S), default=0.0)
    else:
        raise ValueError(f"unknown utility family {fam!r}")
    utility = _table_from_function(n, prior, fn)
    return Instance(
        n=n,
        state_count=states,
        prior=prior,
        utility=utility,
        system=system if system is not None else random_system(rng, n),
    )


def random_table_instance(seed: int, max_items: int = 3, max_states: int = 2) -> Instance:
    """Fully random utility table over an independent prior; no structure
    guaranteed (used to exercise failing checker paths)."""
    rng = random.Random(seed)
    n = rng.randint(2, max_items)
    states = rng.randint(2, max_states)
    prior = _independent_prior(rng, n, states)
    utility = _table_from_function(
        n, prior, lambda S, phi: rng.uniform(-1.0, 2.0) if S else 0.0
    )
    return Instance(
        n=n,
        state_count=states,
        prior=prior,
        utility=utility,
        system=random_system(rng, n),
    )


def gbs_fixture(seed: int, num_queries: int = 4, labels: int = 2, k: int = 2) -> ActiveLearningInstance:
    rng = random.Random(seed)
    return generate_al_instance(
        num_hypotheses=rng.randint(4, 8),
        num_points=rng.randint(3, 4),
        num_queries=num_queries,
        labels_per_point=labels,
        k=k,
        seed=seed,
    )


def tiny_ic_fixture(seed: int, k: int = 2) -> Instance:
    """Small cascade instance with at most three random edges (the rest are
    deterministic), materialized exactly."""
    rng = random.Random(seed)
    n = rng.randint(3, 5)
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    rng.shuffle(pairs)
    num_random = rng.randint(1, 3)
    num_det = rng.randint(0, 2)
    edges = []
    for u, v in pairs[:num_random]:
        edges.append((u, v, rng.uniform(0.2, 0.8)))
    for u, v in pairs[num_random : num_random + num_det]:
        edges.append((u, v, 1.0))
    graph = Graph(n=n, edges=tuple(edges))
    return ic_instance(graph, system=CardinalitySystem(n=n, k=k))
