"""Pool-based active learning instances with the version-space-reduction
(generalized binary search) utility.

Hypotheses label a pool of data points; query items cover one or two
points and reveal the covered labels jointly. The utility of a query set
under a realization is the prior mass of hypotheses ruled out by the
observed answers, so the empty set is worth exactly zero and full
identification is worth one minus the mass of the surviving hypotheses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError
from .model import Instance, PartialRealization, Prior, Realization
from .systems import CardinalitySystem


@dataclass(frozen=True)
class Hypothesis:
    """A candidate labeling of every data point, with its prior mass."""

    labels: tuple[int, ...]
    mass: float

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(int(x) for x in self.labels))
        if self.mass <= 0.0:
            raise InvalidParameterError("hypothesis mass must be positive")


@dataclass(frozen=True)
class QueryItem:
    """A query covering one or two data points; its answer reveals the
    covered labels jointly."""

    points: tuple[int, ...]

    def __post_init__(self):
        pts = tuple(int(p) for p in self.points)
        if not 1 <= len(pts) <= 2:
            raise InvalidParameterError("a query covers one or two points")
        if len(set(pts)) != len(pts):
            raise InvalidParameterError("a query's covered points must be distinct")
        object.__setattr__(self, "points", pts)


def answer_of(hypothesis: Hypothesis, query: QueryItem, label_counts: Sequence[int]) -> int:
    """Encode the hypothesis's answer to a query as one state id."""
    pts = query.points
    if len(pts) == 1:
        return hypothesis.labels[pts[0]]
    i, j = pts
    return hypothesis.labels[i] * label_counts[j] + hypothesis.labels[j]


def query_state_count(query: QueryItem, label_counts: Sequence[int]) -> int:
    pts = query.points
    if len(pts) == 1:
        return label_counts[pts[0]]
    return label_counts[pts[0]] * label_counts[pts[1]]


@dataclass(frozen=True)
class VersionSpaceUtility:
    """1 minus the surviving version-space mass, computed as the mass of
    hypotheses inconsistent with the observed answers (exactly zero for the
    empty query set)."""

    answers: np.ndarray  # (hypotheses, queries) encoded answers
    masses: np.ndarray

    def evaluate(self, items: frozenset[int], realization: Realization) -> float:
        if not items:
            return 0.0
        cols = sorted(items)
        want = np.array([realization.states[q] for q in cols])
        consistent = (self.answers[:, cols] == want).all(axis=1)
        return float(self.masses[~consistent].sum())


def version_space(
    hypotheses: Sequence[Hypothesis],
    queries: Sequence[QueryItem],
    label_counts: Sequence[int],
    psi: PartialRealization,
) -> tuple[list[Hypothesis], float]:
    """Hypotheses consistent with every observed answer, and their mass."""
    surviving = [
        h
        for h in hypotheses
        if all(answer_of(h, queries[q], label_counts) == s for q, s in psi.observations)
    ]
    return surviving, math.fsum(h.mass for h in surviving)


def gbs_utility(
    hypotheses: Sequence[Hypothesis],
    queries: Sequence[QueryItem],
    label_counts: Sequence[int],
) -> tuple[VersionSpaceUtility, Prior]:
    """Build the utility and the realization prior induced by pushing the
    hypothesis masses through their answer vectors.

    Hypotheses with identical answer vectors merge into one prior atom but
    stay separate inside the utility's mass bookkeeping.
    """
    if not hypotheses:
        raise InvalidParameterError("hypothesis set is empty")
    total = math.fsum(h.mass for h in hypotheses)
    if abs(total - 1.0) > 1e-9:
        raise InvalidParameterError(f"hypothesis masses sum to {total}, not 1")
    answers = np.array(
        [[answer_of(h, q, label_counts) for q in queries] for h in hypotheses], dtype=int
    )
    masses = np.array([h.mass for h in hypotheses], dtype=float)
    utility = VersionSpaceUtility(answers=answers, masses=masses)
    grouped: dict[tuple[int, ...], list[float]] = {}
    for row, h in zip(answers, hypotheses):
        grouped.setdefault(tuple(int(a) for a in row), []).append(h.mass)
    realizations = []
    probabilities = []
    for states in sorted(grouped):
        realizations.append(Realization(states))
        probabilities.append(math.fsum(grouped[states]))
    prior = Prior(realizations=tuple(realizations), probabilities=tuple(probabilities))
    return utility, prior


@dataclass(frozen=True)
class ActiveLearningInstance:
    """An Instance plus the hypothesis-level structure behind it."""

    instance: Instance
    hypotheses: tuple[Hypothesis, ...]
    queries: tuple[QueryItem, ...]
    label_counts: tuple[int, ...]


def generate_al_instance(
    num_hypotheses: int,
    num_points: int,
    num_queries: int,
    labels_per_point,
    k: int,
    seed: int,
) -> ActiveLearningInstance:
    """Seeded random pool: hypothesis masses drawn uniformly from (0, 1) and
    normalized, labels uniform per point, each query covering one or two
    uniformly chosen points, cardinality budget k on the queries.

    ``labels_per_point`` is either one integer for a uniform label count or
    a per-point list (mixed pools).
    """
    if min(num_hypotheses, num_points, num_queries) < 1 or k < 0:
        raise InvalidParameterError("generator sizes must be positive")
    if isinstance(labels_per_point, int):
        label_counts = tuple([labels_per_point] * num_points)
    else:
        label_counts = tuple(int(x) for x in labels_per_point)
        if len(label_counts) != num_points:
            raise InvalidParameterError("one label count per point required")
    if any(c < 2 for c in label_counts):
        raise InvalidParameterError("each point needs at least two labels")

    rng = np.random.default_rng(seed)
    raw = rng.uniform(0.0, 1.0, size=num_hypotheses)
    masses = raw / raw.sum()
    labels = np.stack(
        [rng.integers(0, label_counts[p], size=num_hypotheses) for p in range(num_points)],
        axis=1,
    )
    hypotheses = tuple(
        Hypothesis(labels=tuple(int(x) for x in labels[h]), mass=float(masses[h]))
        for h in range(num_hypotheses)
    )
    queries = []
    for _ in range(num_queries):
        size = int(rng.integers(1, 3))
        pts = tuple(int(p) for p in rng.choice(num_points, size=size, replace=False))
        queries.append(QueryItem(points=pts))
    queries = tuple(queries)

    utility, prior = gbs_utility(hypotheses, queries, label_counts)
    state_count = max(query_state_count(q, label_counts) for q in queries)
    instance = Instance(
        n=num_queries,
        state_count=state_count,
        prior=prior,
        utility=utility,
        system=CardinalitySystem(n=num_queries, k=k),
    )
    return ActiveLearningInstance(
        instance=instance,
        hypotheses=hypotheses,
        queries=queries,
        label_counts=label_counts,
    )
