"""Feasibility constructors, the restriction operator, and rank."""

import random
from itertools import combinations

import pytest

from adsub.errors import InvalidParameterError, InvalidRestrictionError
from adsub.fixtures import random_system
from adsub.systems import (
    CardinalitySystem,
    ExplicitSystem,
    KnapsackSystem,
    PartitionMatroidSystem,
    rank,
    restrict,
)


class TestCardinality:
    def test_within_budget(self):
        sys = CardinalitySystem(n=3, k=2)
        assert sys.contains({0, 1})

    def test_over_budget(self):
        sys = CardinalitySystem(n=3, k=2)
        assert not sys.contains({0, 1, 2})

    def test_zero_budget_keeps_empty_set(self):
        assert CardinalitySystem(n=3, k=0).contains(frozenset())

    def test_negative_budget_rejected(self):
        with pytest.raises(InvalidParameterError):
            CardinalitySystem(n=3, k=-1)

    def test_rank(self):
        assert rank(CardinalitySystem(n=5, k=3)) == 3


class TestKnapsack:
    def test_examples(self):
        sys = KnapsackSystem(costs=(1, 1, 3), budget=2)
        assert sys.contains({0, 1})
        assert not sys.contains({2})
        assert KnapsackSystem(costs=(1, 1, 3), budget=0).contains(frozenset())

    def test_nonpositive_cost_rejected(self):
        with pytest.raises(InvalidParameterError):
            KnapsackSystem(costs=(1, 0), budget=2)

    def test_rank_is_cheapest_fill(self):
        assert KnapsackSystem(costs=(3, 1, 1, 5), budget=4.5).rank() == 2


class TestPartition:
    def test_examples(self):
        sys = PartitionMatroidSystem(blocks=((0, 1), (2,)), limits=(1, 1))
        assert sys.contains({0, 2})
        assert not sys.contains({0, 1})
        assert sys.contains(frozenset())

    def test_missing_items_rejected(self):
        with pytest.raises(InvalidParameterError):
            PartitionMatroidSystem(blocks=((0, 2),), limits=(1,))

    def test_rank(self):
        sys = PartitionMatroidSystem(blocks=((0, 1, 2), (3,)), limits=(2, 5))
        assert sys.rank() == 3


class TestExplicit:
    def test_closure_mode(self):
        sys = ExplicitSystem(3, [{0, 1}], close=True)
        assert sys.contains({0}) and sys.contains(frozenset())
        assert not sys.contains({2})

    def test_non_closed_input_rejected(self):
        with pytest.raises(InvalidParameterError):
            ExplicitSystem(3, [frozenset(), frozenset({0, 1})])

    def test_single_item_family(self):
        sys = ExplicitSystem(1, [frozenset(), frozenset({0})])
        assert sys.rank() == 1


class TestRestrict:
    def test_full_restriction_collapses_to_base(self):
        base = CardinalitySystem(n=4, k=2)
        sub = restrict(base, frozenset(), frozenset(range(4)))
        for size in range(5):
            for combo in combinations(range(4), size):
                assert sub.contains(frozenset(combo)) == base.contains(frozenset(combo))

    def test_cardinality_example(self):
        # With item 0 already selected under k=2, one more of {1,2} fits but
        # not both.
        base = CardinalitySystem(n=3, k=2)
        sub = restrict(base, {0}, {1, 2})
        assert sub.contains({1})
        assert not sub.contains({1, 2})

    def test_single_item_system_fully_restricted(self):
        base = ExplicitSystem(1, [frozenset(), frozenset({0})])
        sub = restrict(base, {0}, frozenset())
        assert sub.contains(frozenset())
        assert not sub.contains({0})
        assert sub.rank() == 0

    def test_overlap_rejected(self):
        with pytest.raises(InvalidRestrictionError):
            restrict(CardinalitySystem(n=3, k=2), {0}, {0, 1})

    def test_infeasible_selected_rejected(self):
        with pytest.raises(InvalidRestrictionError):
            restrict(CardinalitySystem(n=3, k=1), {0, 1}, {2})

    def test_restricted_rank_drops(self):
        base = CardinalitySystem(n=5, k=3)
        sub = restrict(base, {0}, frozenset(range(1, 5)))
        assert sub.rank() == 2


@pytest.mark.parametrize(
    "system",
    [
        CardinalitySystem(n=12, k=5),
        KnapsackSystem(costs=tuple(0.5 + 0.25 * i for i in range(12)), budget=3.0),
        PartitionMatroidSystem(
            blocks=(tuple(range(0, 4)), tuple(range(4, 9)), tuple(range(9, 12))),
            limits=(2, 1, 3),
        ),
    ],
)
def test_downward_closure_exhaustive(system):
    n = system.n
    for bits in range(1 << n):
        s = frozenset(e for e in range(n) if bits >> e & 1)
        if system.contains(s):
            for e in s:
                assert system.contains(s - {e})


def test_random_explicit_systems_downward_closed():
    for seed in range(10):
        rng = random.Random(seed)
        sys = random_system(rng, 6)
        for bits in range(1 << 6):
            s = frozenset(e for e in range(6) if bits >> e & 1)
            if sys.contains(s):
                for e in s:
                    assert sys.contains(s - {e})
        assert sys.contains(frozenset())
