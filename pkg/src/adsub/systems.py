"""Independence systems: downward-closed feasibility structures over item subsets.

Provides the closed-form constructors (cardinality, knapsack, partition
matroid), explicit set families for adversarial tests, the restriction
operator, and rank. Feasibility queries on the closed-form constructors
are O(|A|); rank falls back to exhaustive search only for explicit and
restricted systems.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .errors import CapacityError, InvalidParameterError, InvalidRestrictionError

RANK_ENUMERATION_CAP = 20


def _as_frozenset(items: Iterable[int]) -> frozenset[int]:
    return items if isinstance(items, frozenset) else frozenset(items)


class IndependenceSystem:
    """Base class; subclasses implement ``contains`` and usually ``rank``."""

    n: int

    def contains(self, items: Iterable[int]) -> bool:
        raise NotImplementedError

    def rank(self) -> int:
        return _exhaustive_rank(self, range(self.n))

    def feasible_sets(self) -> Iterable[frozenset[int]]:
        """All feasible subsets; exhaustive, for tests and tiny instances."""
        if self.n > RANK_ENUMERATION_CAP:
            raise CapacityError(f"feasible-set enumeration capped at n={RANK_ENUMERATION_CAP}")
        for k in range(self.n + 1):
            for combo in combinations(range(self.n), k):
                s = frozenset(combo)
                if self.contains(s):
                    yield s


def _exhaustive_rank(system: IndependenceSystem, pool: Iterable[int]) -> int:
    pool = sorted(pool)
    if len(pool) > RANK_ENUMERATION_CAP:
        raise CapacityError(f"rank enumeration capped at {RANK_ENUMERATION_CAP} items")
    best = 0

    # Downward closure lets us grow feasible sets one item at a time.
    def grow(current: frozenset[int], start: int):
        nonlocal best
        best = max(best, len(current))
        for j in range(start, len(pool)):
            cand = current | {pool[j]}
            if system.contains(cand):
                grow(cand, j + 1)

    if not system.contains(frozenset()):
        raise InvalidParameterError("system does not contain the empty set")
    grow(frozenset(), 0)
    return best


@dataclass(frozen=True)
class CardinalitySystem(IndependenceSystem):
    n: int
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise InvalidParameterError(f"negative cardinality bound {self.k}")
        if self.n < 0:
            raise InvalidParameterError(f"negative ground size {self.n}")

    def contains(self, items: Iterable[int]) -> bool:
        s = _as_frozenset(items)
        return len(s) <= self.k and all(0 <= e < self.n for e in s)

    def rank(self) -> int:
        return min(self.n, self.k)


@dataclass(frozen=True)
class KnapsackSystem(IndependenceSystem):
    costs: tuple[float, ...]
    budget: float

    def __post_init__(self):
        object.__setattr__(self, "costs", tuple(float(c) for c in self.costs))
        if any(c <= 0 for c in self.costs):
            raise InvalidParameterError("knapsack costs must be positive")
        if self.budget < 0:
            raise InvalidParameterError("knapsack budget must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.costs)

    def contains(self, items: Iterable[int]) -> bool:
        s = _as_frozenset(items)
        if not all(0 <= e < self.n for e in s):
            return False
        return sum(self.costs[e] for e in s) <= self.budget

    def rank(self) -> int:
        # Cheapest-first fill maximizes cardinality under a budget.
        total, count = 0.0, 0
        for c in sorted(self.costs):
            if total + c > self.budget:
                break
            total += c
            count += 1
        return count


@dataclass(frozen=True)
class PartitionMatroidSystem(IndependenceSystem):
    blocks: tuple[tuple[int, ...], ...]
    limits: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(e) for e in b)) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "limits", tuple(int(x) for x in self.limits))
        if len(blocks) != len(self.limits):
            raise InvalidParameterError("one limit per block required")
        if any(x < 0 for x in self.limits):
            raise InvalidParameterError("block limits must be nonnegative")
        seen: set[int] = set()
        for b in blocks:
            for e in b:
                if e in seen:
                    raise InvalidParameterError(f"item {e} appears in two blocks")
                seen.add(e)
        n = (max(seen) + 1) if seen else 0
        if seen != set(range(n)):
            raise InvalidParameterError("blocks must partition a dense item range [0, n)")
        object.__setattr__(self, "_block_of", tuple(_block_index(blocks, n)))

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def contains(self, items: Iterable[int]) -> bool:
        s = _as_frozenset(items)
        if not all(0 <= e < self.n for e in s):
            return False
        counts = [0] * len(self.blocks)
        for e in s:
            counts[self._block_of[e]] += 1
        return all(c <= lim for c, lim in zip(counts, self.limits))

    def rank(self) -> int:
        return sum(min(len(b), lim) for b, lim in zip(self.blocks, self.limits))


def _block_index(blocks, n):
    idx = [0] * n
    for bi, b in enumerate(blocks):
        for e in b:
            idx[e] = bi
    return idx


@dataclass(frozen=True)
class ExplicitSystem(IndependenceSystem):
    """A listed downward-closed family.

    By default the listed family must already be downward-closed (and hence
    contain the empty set); ``close=True`` instead takes the downward
    closure of whatever was listed.
    """

    n: int
    sets: frozenset[frozenset[int]]

    def __init__(self, n: int, sets: Iterable[Iterable[int]], close: bool = False):
        family = {frozenset(int(e) for e in s) for s in sets}
        for s in family:
            if any(not 0 <= e < n for e in s):
                raise InvalidParameterError(f"set {sorted(s)} outside ground range [0, {n})")
        if close:
            family = _downward_closure(family)
        else:
            if frozenset() not in family:
                raise InvalidParameterError("explicit family must contain the empty set")
            for s in family:
                for e in s:
                    if s - {e} not in family:
                        raise InvalidParameterError(
                            f"family is not downward-closed: missing {sorted(s - {e})}"
                        )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "sets", frozenset(family))

    def contains(self, items: Iterable[int]) -> bool:
        return _as_frozenset(items) in self.sets

    def rank(self) -> int:
        return max(len(s) for s in self.sets)


def _downward_closure(family: set[frozenset[int]]) -> set[frozenset[int]]:
    closed: set[frozenset[int]] = set()
    stack = list(family) + [frozenset()]
    while stack:
        s = stack.pop()
        if s in closed:
            continue
        closed.add(s)
        for e in s:
            stack.append(s - {e})
    return closed


@dataclass(frozen=True)
class RestrictedSystem(IndependenceSystem):
    """Feasible continuations: subsets A of ``pool`` with A + selected feasible in base."""

    base: IndependenceSystem
    selected: frozenset[int]
    pool: frozenset[int]

    def __post_init__(self):
        selected = _as_frozenset(self.selected)
        pool = _as_frozenset(self.pool)
        object.__setattr__(self, "selected", selected)
        object.__setattr__(self, "pool", pool)
        if selected & pool:
            raise InvalidRestrictionError(
                f"selected and pool overlap on {sorted(selected & pool)}"
            )
        if not self.base.contains(selected):
            raise InvalidRestrictionError(f"selected set {sorted(selected)} infeasible in base")

    @property
    def n(self) -> int:
        return self.base.n

    def contains(self, items: Iterable[int]) -> bool:
        s = _as_frozenset(items)
        return s <= self.pool and self.base.contains(s | self.selected)

    def rank(self) -> int:
        return _exhaustive_rank(self, self.pool)


def restrict(base: IndependenceSystem, selected: Iterable[int], pool: Iterable[int]) -> RestrictedSystem:
    """The family of subsets of ``pool`` whose union with ``selected`` stays feasible."""
    return RestrictedSystem(base=base, selected=frozenset(selected), pool=frozenset(pool))


def rank(system: IndependenceSystem) -> int:
    return system.rank()
