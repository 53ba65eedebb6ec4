"""Adaptive viral marketing under the independent-cascade model.

A ground-truth realization is one Bernoulli outcome per edge; the state a
node exposes when selected is a derived view: the status of every
out-going edge of every node it reaches through live edges ('?' for the
rest). Tiny graphs materialize the exact outcome prior; larger graphs run
through seeded Monte-Carlo estimation only.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    CapacityError,
    DuplicateEdgeError,
    EdgeListParseError,
    InvalidParameterError,
)
from .model import Instance, PartialRealization, Prior, Realization
from .seeding import derive_seed

UNOBSERVED = -1

DEFAULT_EDGE_PROB = 0.01
DEFAULT_SUPPORT_BUDGET = 4096


@dataclass(frozen=True)
class Graph:
    """Directed graph with per-edge propagation probabilities."""

    n: int
    edges: tuple[tuple[int, int, float], ...]
    id_map: Optional[tuple[tuple[str, int], ...]] = None

    def __post_init__(self):
        edges = tuple((int(u), int(v), float(p)) for u, v, p in self.edges)
        object.__setattr__(self, "edges", edges)
        seen = set()
        for u, v, p in edges:
            if u == v:
                raise InvalidParameterError(f"self-loop on node {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidParameterError(f"edge ({u}, {v}) outside node range")
            if not 0.0 <= p <= 1.0:
                raise InvalidParameterError(f"edge probability {p} outside [0, 1]")
            if (u, v) in seen:
                raise DuplicateEdgeError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
        out: list[list[int]] = [[] for _ in range(self.n)]
        for idx, (u, _v, _p) in enumerate(edges):
            out[u].append(idx)
        object.__setattr__(self, "out_edges", tuple(tuple(o) for o in out))

    @property
    def m(self) -> int:
        return len(self.edges)

    def probabilities(self) -> np.ndarray:
        return np.array([p for _u, _v, p in self.edges], dtype=float)


def parse_edge_list(text: str, default_prob: float = DEFAULT_EDGE_PROB) -> Graph:
    """Parse "u v" / "u v p" lines ('#' starts a comment line).

    Node ids may be arbitrary tokens; they are compacted to dense indices
    in order of first appearance and the mapping is kept on the graph.
    """
    if not 0.0 <= default_prob <= 1.0:
        raise InvalidParameterError(f"default probability {default_prob} outside [0, 1]")
    ids: dict[str, int] = {}
    edges: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise EdgeListParseError(f"line {lineno}: expected 'u v' or 'u v p', got {raw!r}")
        u_tok, v_tok = parts[0], parts[1]
        if len(parts) == 3:
            try:
                p = float(parts[2])
            except ValueError:
                raise EdgeListParseError(f"line {lineno}: bad probability {parts[2]!r}") from None
        else:
            p = default_prob
        if u_tok == v_tok:
            raise EdgeListParseError(f"line {lineno}: self-loop on {u_tok!r}")
        u = ids.setdefault(u_tok, len(ids))
        v = ids.setdefault(v_tok, len(ids))
        if (u, v) in seen:
            raise DuplicateEdgeError(f"line {lineno}: duplicate edge {u_tok} -> {v_tok}")
        seen.add((u, v))
        edges.append((u, v, p))
    return Graph(n=len(ids), edges=tuple(edges), id_map=tuple(sorted(ids.items(), key=lambda kv: kv[1])))


def live_reachable(graph: Graph, sources: Iterable[int], outcome: Sequence[int]) -> frozenset[int]:
    """Nodes reachable from the sources through live edges (sources included)."""
    visited = set(sources)
    stack = sorted(visited)
    while stack:
        u = stack.pop()
        for ei in graph.out_edges[u]:
            if outcome[ei]:
                v = graph.edges[ei][1]
                if v not in visited:
                    visited.add(v)
                    stack.append(v)
    return frozenset(visited)


def derive_view(graph: Graph, node: int, outcome: Sequence[int]) -> tuple[int, ...]:
    """Per-edge view exposed by selecting a node under a fixed outcome:
    statuses of out-edges of every node it live-reaches, '?' elsewhere."""
    reach = live_reachable(graph, (node,), outcome)
    view = [UNOBSERVED] * graph.m
    for u in reach:
        for ei in graph.out_edges[u]:
            view[ei] = int(outcome[ei])
    return tuple(view)


@dataclass(frozen=True)
class CascadeUtility:
    """Seed-set value under a realization: seeds plus every node some seed's
    view marks as the head of a live edge (set semantics, no double count)."""

    graph: Graph
    views: tuple[tuple[int, ...], ...]
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def evaluate(self, items: frozenset[int], realization: Realization) -> float:
        items = frozenset(items)
        if not items:
            return 0.0
        key = (items, realization.states)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        activated = set(items)
        for u in items:
            view = self.views[realization.states[u]]
            for ei, status in enumerate(view):
                if status == 1:
                    activated.add(self.graph.edges[ei][1])
        value = float(len(activated))
        self._cache[key] = value
        return value


def ic_instance(
    graph: Graph,
    system,
    materialize: bool = True,
    support_budget: int = DEFAULT_SUPPORT_BUDGET,
) -> Instance:
    """Materialize the exact instance for a tiny graph: one prior atom per
    outcome of the random edges (deterministic edges are fixed), with node
    states indexed into a registry of derived views."""
    if not materialize:
        raise InvalidParameterError("non-materialized instances are handled by the harness")
    random_edges = [ei for ei, (_u, _v, p) in enumerate(graph.edges) if 0.0 < p < 1.0]
    if 2 ** len(random_edges) > support_budget:
        raise CapacityError(
            f"{len(random_edges)} random edges exceed the materialization budget"
        )
    fixed = [int(p >= 1.0) for _u, _v, p in graph.edges]

    registry: dict[tuple[int, ...], int] = {}
    realizations: list[Realization] = []
    probabilities: list[float] = []
    for bits in product((0, 1), repeat=len(random_edges)):
        outcome = list(fixed)
        prob = 1.0
        for ei, bit in zip(random_edges, bits):
            outcome[ei] = bit
            p = graph.edges[ei][2]
            prob *= p if bit else (1.0 - p)
        if prob <= 0.0:
            continue
        states = []
        for u in range(graph.n):
            view = derive_view(graph, u, outcome)
            state = registry.setdefault(view, len(registry))
            states.append(state)
        realizations.append(Realization(tuple(states)))
        probabilities.append(prob)
    views = tuple(sorted(registry, key=registry.get))
    utility = CascadeUtility(graph=graph, views=views)
    prior = Prior(realizations=tuple(realizations), probabilities=tuple(probabilities))
    return Instance(
        n=graph.n,
        state_count=len(views),
        prior=prior,
        utility=utility,
        system=system,
    )


def revealed_statuses(utility: CascadeUtility, psi: PartialRealization) -> dict[int, int]:
    """Edge statuses jointly revealed by an observation set (views agree on
    overlaps because they derive from one outcome)."""
    revealed: dict[int, int] = {}
    for _item, state in psi.observations:
        view = utility.views[state]
        for ei, status in enumerate(view):
            if status != UNOBSERVED:
                revealed[ei] = status
    return revealed


def activated_nodes(utility: CascadeUtility, psi: PartialRealization) -> frozenset[int]:
    """Nodes already activated under an observation set: the selected seeds
    plus every head of a revealed live edge."""
    active = set(psi.domain)
    for ei, status in revealed_statuses(utility, psi).items():
        if status == 1:
            active.add(utility.graph.edges[ei][1])
    return frozenset(active)


def simulate_cascade(
    graph: Graph, seeds: Iterable[int], rng: random.Random
) -> tuple[frozenset[int], dict[int, int]]:
    """One diffusion: each newly activated node flips each out-edge once.

    Returns the activated set and the statuses of every edge flipped, which
    under full-adoption feedback is exactly the out-edges of activated
    nodes. Nodes are processed in sorted order so a fixed seed fixes the
    outcome.
    """
    activated = sorted(set(seeds))
    active_set = set(activated)
    statuses: dict[int, int] = {}
    frontier = list(activated)
    while frontier:
        next_frontier = []
        for u in frontier:
            for ei in graph.out_edges[u]:
                if ei in statuses:
                    continue
                p = graph.edges[ei][2]
                live = 1 if rng.random() < p else 0
                statuses[ei] = live
                if live:
                    v = graph.edges[ei][1]
                    if v not in active_set:
                        active_set.add(v)
                        next_frontier.append(v)
        frontier = sorted(next_frontier)
    return frozenset(active_set), statuses


def conditional_gains(
    graph: Graph,
    activated: frozenset[int],
    candidates: Sequence[int],
    trials: int,
    rng: np.random.Generator,
) -> dict[int, float]:
    """Monte-Carlo conditional marginals for seed candidates.

    Conditioning pins the revealed edges; under full-adoption feedback the
    revealed edges are exactly the out-edges of activated nodes, so the
    gain of a candidate is the expected count of newly reached nodes when
    only out-edges of unactivated nodes are resampled. One sample matrix is
    shared by all candidates (common random numbers).
    """
    if trials < 1:
        raise InvalidParameterError("trials must be at least 1")
    unrev = [ei for ei, (u, _v, _p) in enumerate(graph.edges) if u not in activated]
    probs = np.array([graph.edges[ei][2] for ei in unrev], dtype=float)
    live = rng.random((trials, len(unrev))) < probs if unrev else np.zeros((trials, 0), bool)
    src = [graph.edges[ei][0] for ei in unrev]
    dst = [graph.edges[ei][1] for ei in unrev]
    # Which candidates have at least one live out-edge, per trial.
    cols_of: dict[int, list[int]] = {}
    for j, u in enumerate(src):
        cols_of.setdefault(u, []).append(j)
    has_live = {}
    for c in candidates:
        cols = cols_of.get(c)
        has_live[c] = live[:, cols].any(axis=1) if cols else np.zeros(trials, bool)

    totals = {c: 0.0 for c in candidates}
    base = {c: (0.0 if c in activated else 1.0) for c in candidates}
    for t in range(trials):
        row = live[t]
        idx = np.nonzero(row)[0]
        adj: dict[int, list[int]] = {}
        for j in idx:
            adj.setdefault(src[j], []).append(dst[j])
        for c in candidates:
            if not has_live[c][t]:
                totals[c] += base[c]
                continue
            seen = {c}
            stack = [c]
            while stack:
                u = stack.pop()
                for v in adj.get(u, ()):
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            totals[c] += len(seen - activated)
    return {c: totals[c] / trials for c in candidates}


def set_extension_gains(
    graph: Graph,
    current: frozenset[int],
    candidates: Sequence[int],
    trials: int,
    rng: np.random.Generator,
) -> dict[int, float]:
    """Unconditioned expected gains of adding one seed to a fixed seed set,
    with all edges resampled each trial (non-adaptive greedy inner loop)."""
    if trials < 1:
        raise InvalidParameterError("trials must be at least 1")
    probs = graph.probabilities()
    live = rng.random((trials, graph.m)) < probs if graph.m else np.zeros((trials, 0), bool)
    src = [u for u, _v, _p in graph.edges]
    dst = [v for _u, v, _p in graph.edges]
    totals = {c: 0.0 for c in candidates}
    for t in range(trials):
        idx = np.nonzero(live[t])[0]
        adj: dict[int, list[int]] = {}
        for j in idx:
            adj.setdefault(src[j], []).append(dst[j])

        def reach(sources):
            seen = set(sources)
            stack = list(seen)
            while stack:
                u = stack.pop()
                for v in adj.get(u, ()):
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            return seen

        covered = reach(current) if current else set()
        for c in candidates:
            if c in covered:
                continue
            totals[c] += len(reach((c,)) - covered)
    return {c: totals[c] / trials for c in candidates}


def estimate_spread(
    graph: Graph, seeds: frozenset[int], trials: int, rng: np.random.Generator
) -> float:
    """Monte-Carlo expected cascade size of a fixed seed set."""
    if not seeds:
        return 0.0
    probs = graph.probabilities()
    live = rng.random((trials, graph.m)) < probs if graph.m else np.zeros((trials, 0), bool)
    src = [u for u, _v, _p in graph.edges]
    dst = [v for _u, v, _p in graph.edges]
    total = 0.0
    for t in range(trials):
        idx = np.nonzero(live[t])[0]
        adj: dict[int, list[int]] = {}
        for j in idx:
            adj.setdefault(src[j], []).append(dst[j])
        seen = set(seeds)
        stack = list(seen)
        while stack:
            u = stack.pop()
            for v in adj.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        total += len(seen)
    return total / trials


@dataclass
class MonteCarloMarginalEstimator:
    """Plug-in estimator for the adaptive greedy tree on materialized
    cascade instances: conditions on the edges revealed by the current
    observation set and resamples the rest.

    Per-call rng seeds derive from (seed, revealed edges, candidate), so
    estimates are bit-reproducible and order-insensitive.
    """

    graph: Graph
    trials: int
    seed: int

    def __call__(self, inst: Instance, psi: PartialRealization, item: int) -> float:
        utility = inst.utility
        if not isinstance(utility, CascadeUtility):
            raise InvalidParameterError("estimator requires a cascade instance")
        revealed = revealed_statuses(utility, psi)
        activated = activated_nodes(utility, psi)
        call_seed = derive_seed(self.seed, "ic-marginal", tuple(sorted(revealed.items())), item)
        rng = np.random.default_rng(call_seed)
        return conditional_gains(self.graph, activated, [item], self.trials, rng)[item]


def mc_marginal_estimator(graph: Graph, trials: int, seed: int) -> MonteCarloMarginalEstimator:
    if trials < 1:
        raise InvalidParameterError("trials must be at least 1")
    return MonteCarloMarginalEstimator(graph=graph, trials=trials, seed=seed)


def synthetic_graph(
    n: int = 50,
    hubs: int = 5,
    hub_out_degree: int = 15,
    base_out_degree: int = 3,
    edge_prob: float = 0.05,
    seed: int = 0,
) -> Graph:
    """Seeded directed graph with a few high-out-degree hubs; the skew gives
    greedy seed selection a real signal over random baselines."""
    if hubs > n or hub_out_degree >= n or base_out_degree >= n:
        raise InvalidParameterError("degrees must be below the node count")
    rng = random.Random(seed)
    edges = []
    for u in range(n):
        degree = hub_out_degree if u < hubs else base_out_degree
        others = [v for v in range(n) if v != u]
        for v in sorted(rng.sample(others, degree)):
            edges.append((u, v, edge_prob))
    return Graph(n=n, edges=tuple(edges))
