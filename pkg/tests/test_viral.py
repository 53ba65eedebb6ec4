"""Cascade graphs: parsing, derived node views, the seed-set utility,
simulation, and the Monte-Carlo marginal estimator."""

import math
import random

import numpy as np
import pytest

from adsub.checkers import check_adaptive, check_policywise
from adsub.errors import DuplicateEdgeError, EdgeListParseError, InvalidParameterError
from adsub.fixtures import tiny_ic_fixture
from adsub.model import EMPTY, PartialRealization, marginal_item
from adsub.systems import CardinalitySystem
from adsub.viral import (
    UNOBSERVED,
    Graph,
    activated_nodes,
    conditional_gains,
    derive_view,
    estimate_spread,
    ic_instance,
    live_reachable,
    mc_marginal_estimator,
    parse_edge_list,
    revealed_statuses,
    simulate_cascade,
    synthetic_graph,
)

TOL = 1e-9


def counterexample_graph():
    return Graph(
        n=7,
        edges=((0, 1, 1.0), (1, 2, 0.1), (3, 4, 1.0), (4, 5, 1.0), (5, 6, 1.0)),
    )


class TestParsing:
    def test_default_probability(self):
        g = parse_edge_list("0 1\n1 2\n")
        assert g.n == 3 and g.m == 2
        assert all(p == 0.01 for _u, _v, p in g.edges)

    def test_comment_and_explicit_probability(self):
        g = parse_edge_list("# c\n0 1 0.5\n")
        assert g.m == 1
        assert g.edges[0][2] == 0.5

    def test_self_loop_rejected(self):
        with pytest.raises(EdgeListParseError):
            parse_edge_list("0 0\n")

    def test_duplicate_edge_rejected(self):
        with pytest.raises(DuplicateEdgeError):
            parse_edge_list("0 1\n0 1 0.3\n")

    def test_malformed_line_reports_number(self):
        with pytest.raises(EdgeListParseError, match="line 2"):
            parse_edge_list("0 1\n0 1 2 3\n")

    def test_id_map_compacts_tokens(self):
        g = parse_edge_list("a b\nb c 0.2\n")
        assert g.n == 3
        assert g.id_map == (("a", 0), ("b", 1), ("c", 2))

    def test_graph_validation(self):
        with pytest.raises(InvalidParameterError):
            Graph(n=2, edges=((0, 1, 1.5),))
        with pytest.raises(DuplicateEdgeError):
            Graph(n=2, edges=((0, 1, 0.5), (0, 1, 0.2)))


class TestViews:
    def test_view_reveals_reachable_out_edges_only(self):
        g = counterexample_graph()
        outcome = [1, 1, 1, 1, 1]
        view = derive_view(g, 0, outcome)
        # Node 0 reaches {0, 1, 2}; edges 0 and 1 are visible, 2..4 are not.
        assert view[0] == 1 and view[1] == 1
        assert view[2] == view[3] == view[4] == UNOBSERVED

    def test_blocked_edge_cuts_visibility(self):
        g = counterexample_graph()
        outcome = [1, 0, 1, 1, 1]
        view = derive_view(g, 0, outcome)
        assert view[1] == 0
        assert view[2] == UNOBSERVED

    @pytest.mark.parametrize("seed", range(5))
    def test_view_nonblank_iff_source_reachable(self, seed):
        inst = tiny_ic_fixture(seed)
        utility = inst.utility
        g = utility.graph
        # Recompute reachability independently per (node, realization).
        for phi in inst.prior.realizations:
            full_view_of = {u: utility.views[phi.states[u]] for u in range(g.n)}
            # Recover the underlying outcome from the union of views.
            outcome = {}
            for u in range(g.n):
                for ei, s in enumerate(full_view_of[u]):
                    if s != UNOBSERVED:
                        outcome[ei] = s
            for u in range(g.n):
                reach = {u}
                changed = True
                while changed:
                    changed = False
                    for ei, (a, b, _p) in enumerate(g.edges):
                        if a in reach and outcome.get(ei) == 1 and b not in reach:
                            reach.add(b)
                            changed = True
                for ei, (a, _b, _p) in enumerate(g.edges):
                    visible = full_view_of[u][ei] != UNOBSERVED
                    assert visible == (a in reach)


class TestUtility:
    def test_empty_seed_set_is_zero(self):
        inst = ic_instance(counterexample_graph(), system=CardinalitySystem(7, 2))
        for phi in inst.prior.realizations:
            assert inst.utility.evaluate(frozenset(), phi) == 0.0

    def test_live_branch_value(self):
        inst = ic_instance(counterexample_graph(), system=CardinalitySystem(7, 2))
        live = next(
            phi for phi in inst.prior.realizations
            if inst.utility.views[phi.states[1]][1] == 1
        )
        assert inst.utility.evaluate(frozenset({0, 3}), live) == 7.0

    def test_blocked_branch_value(self):
        inst = ic_instance(counterexample_graph(), system=CardinalitySystem(7, 2))
        blocked = next(
            phi for phi in inst.prior.realizations
            if inst.utility.views[phi.states[1]][1] == 0
        )
        assert inst.utility.evaluate(frozenset({0}), blocked) == 2.0

    def test_value_counts_seeds_and_reached(self):
        inst = tiny_ic_fixture(3)
        from itertools import combinations

        for phi in inst.prior.realizations:
            for size in range(1, inst.n + 1):
                for combo in combinations(range(inst.n), size):
                    s = frozenset(combo)
                    v = inst.utility.evaluate(s, phi)
                    assert v >= len(s)
                    for e in range(inst.n):
                        if e in s:
                            continue
                        assert inst.utility.evaluate(s | {e}, phi) >= v - TOL

    def test_materialization_budget(self):
        from adsub.errors import CapacityError

        g = synthetic_graph(n=20, hubs=2, hub_out_degree=5, base_out_degree=2, seed=0)
        with pytest.raises(CapacityError):
            ic_instance(g, system=CardinalitySystem(20, 3))


class TestCascadeSimulation:
    def test_all_blocked(self):
        g = Graph(n=3, edges=((0, 1, 0.0), (1, 2, 0.0)))
        activated, statuses = simulate_cascade(g, {0}, random.Random(0))
        assert activated == frozenset({0})
        assert statuses == {0: 0}

    def test_all_live(self):
        g = Graph(n=4, edges=((0, 1, 1.0), (1, 2, 1.0), (3, 0, 1.0)))
        activated, _ = simulate_cascade(g, {0}, random.Random(0))
        assert activated == frozenset({0, 1, 2})

    def test_forced_live_random_edge(self):
        g = counterexample_graph()
        # Find a seed whose draw makes the single random edge live.
        for s in range(200):
            rng = random.Random(s)
            activated, statuses = simulate_cascade(g, {0}, rng)
            if statuses.get(1) == 1:
                assert activated == frozenset({0, 1, 2})
                break
        else:
            pytest.fail("no seed produced a live random edge in 200 draws")

    def test_revealed_edges_are_out_edges_of_activated(self):
        g = synthetic_graph(n=15, hubs=2, hub_out_degree=4, base_out_degree=2, seed=3)
        activated, statuses = simulate_cascade(g, {0, 5}, random.Random(7))
        expected = {ei for u in activated for ei in g.out_edges[u]}
        assert set(statuses) == expected


class TestEstimator:
    def test_deterministic_graph_matches_exact(self):
        g = Graph(n=4, edges=((0, 1, 1.0), (1, 2, 1.0), (2, 3, 0.0)))
        inst = ic_instance(g, system=CardinalitySystem(4, 2))
        est = mc_marginal_estimator(g, trials=3, seed=0)
        for e in range(4):
            assert est(inst, EMPTY, e) == pytest.approx(
                marginal_item(inst, EMPTY, e), abs=TOL
            )

    def test_counterexample_first_pick_value(self):
        # Exact expectation for seeding node 0: 0.9 * 2 + 0.1 * 3 = 2.1.
        g = counterexample_graph()
        inst = ic_instance(g, system=CardinalitySystem(7, 2))
        exact = marginal_item(inst, EMPTY, 0)
        assert exact == pytest.approx(2.1, abs=1e-12)
        est = mc_marginal_estimator(g, trials=100_000, seed=5)
        estimate = est(inst, EMPTY, 0)
        se = math.sqrt(0.1 * 0.9 / 100_000)  # one Bernoulli away from exact
        assert abs(estimate - exact) <= 3 * se

    def test_bit_reproducible(self):
        g = counterexample_graph()
        inst = ic_instance(g, system=CardinalitySystem(7, 2))
        a = mc_marginal_estimator(g, trials=500, seed=9)(inst, EMPTY, 3)
        b = mc_marginal_estimator(g, trials=500, seed=9)(inst, EMPTY, 3)
        assert a == b

    def test_conditioning_pins_revealed_edges(self):
        g = counterexample_graph()
        inst = ic_instance(g, system=CardinalitySystem(7, 2))
        live = next(
            phi for phi in inst.prior.realizations
            if inst.utility.views[phi.states[1]][1] == 1
        )
        psi = PartialRealization(((0, live.states[0]),))
        assert activated_nodes(inst.utility, psi) == frozenset({0, 1, 2})
        est = mc_marginal_estimator(g, trials=64, seed=2)
        # Node 3's chain is deterministic: exactly 4 new nodes.
        assert est(inst, psi, 3) == pytest.approx(4.0, abs=TOL)
        assert est(inst, psi, 1) == pytest.approx(0.0, abs=TOL)

    def test_error_shrinks_with_trials(self):
        g = counterexample_graph()
        inst = ic_instance(g, system=CardinalitySystem(7, 2))
        exact = marginal_item(inst, EMPTY, 0)
        errors = []
        for trials in (100, 1600, 25_600):
            devs = []
            for seed in (1, 2, 3):
                est = mc_marginal_estimator(g, trials=trials, seed=seed)
                devs.append(abs(est(inst, EMPTY, 0) - exact))
            errors.append(sum(devs) / 3)
        assert errors[2] < errors[0]

    def test_gains_against_exact_on_random_tiny_graphs(self):
        for seed in range(4):
            inst = tiny_ic_fixture(seed)
            g = inst.utility.graph
            rng = np.random.default_rng(seed)
            gains = conditional_gains(g, frozenset(), list(range(g.n)), 40_000, rng)
            for e in range(g.n):
                exact = marginal_item(inst, EMPTY, e)
                assert gains[e] == pytest.approx(exact, abs=0.05)


class TestTinyInstanceCertification:
    @pytest.mark.parametrize("seed", range(4))
    def test_tiny_cascade_instances_certify(self, seed):
        inst = tiny_ic_fixture(seed)
        assert check_adaptive(inst).holds
        assert check_policywise(inst).holds


def test_estimate_spread_matches_exact_on_deterministic_chain():
    g = Graph(n=5, edges=((0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)))
    rng = np.random.default_rng(0)
    assert estimate_spread(g, frozenset({0}), 16, rng) == pytest.approx(4.0, abs=TOL)
    assert estimate_spread(g, frozenset(), 16, rng) == 0.0


def test_live_reachable_includes_source():
    g = counterexample_graph()
    assert live_reachable(g, (2,), [0, 0, 0, 0, 0]) == frozenset({2})
