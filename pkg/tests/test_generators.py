import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothnet.generators import (
    GENERATOR_KEYS,
    WALK_ENDPOINTS,
    build_dynamic,
    clique_plus_isolate_graph,
    dynamic_star,
    lollipop_graph,
    path_graph,
    spool_graph,
    spooling_dynamic,
    stable_pairing_process,
    star_graph,
)
from smoothnet.graph import GraphError, is_connected, is_matching


def test_spool_example():
    # 1-based labels {1,2}, {3,4,5}: star on 1..2 centered 2, star on 3..5 centered 3, edge 2-3.
    g = spool_graph(5, 2)
    assert g.edges == frozenset({(0, 1), (1, 2), (2, 3), (2, 4)})


@pytest.mark.parametrize("n", [3, 8, 33])
def test_spools_are_trees(n):
    for i in range(1, n):
        g = spool_graph(n, i)
        assert len(g.edges) == n - 1 and is_connected(g)


def test_spooling_advances_then_freezes():
    h = spooling_dynamic(10)
    assert h[3] == spool_graph(10, 3)
    assert h[9] == h[50] == spool_graph(10, 9)
    with pytest.raises(GraphError):
        spool_graph(10, 10)


def test_dynamic_star_schedule():
    h = dynamic_star(6)
    assert h.period == 5
    for t in range(1, 12):
        g = h[t]
        centre = t % 5
        assert g.degree(centre) == 5 and all(g.degree(x) == 1 for x in range(6) if x != centre)
        assert g.self_loops == frozenset(range(6))
    # The target node n-1 is never the centre.
    assert all(h[t].degree(5) == 1 for t in range(1, 20))


def test_star_without_loops():
    assert star_graph(4, 1, self_loops=False).self_loops == frozenset()


def test_lollipop_structure():
    g = lollipop_graph(8)
    assert len(g.edges) == 6 + 3 + 1
    assert all(g.has_edge(a, b) for a in range(4) for b in range(a + 1, 4))
    assert g.has_edge(0, 4) and g.has_edge(6, 7) and g.degree(7) == 1
    with pytest.raises(GraphError):
        lollipop_graph(7)


def test_clique_plus_isolate():
    g = clique_plus_isolate_graph(6)
    assert g.degree(5) == 0 and len(g.edges) == 10 and not is_connected(g)


def test_registry():
    for key in GENERATOR_KEYS:
        if key != "stable_pairing":
            h = build_dynamic(key, 8)
            assert h.n == 8 and h[1].n == 8
            u, v = WALK_ENDPOINTS[key](8)
            assert u != v
    with pytest.raises(ValueError):
        build_dynamic("nope", 8)
    assert path_graph(4).edges == frozenset({(0, 1), (1, 2), (2, 3)})


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 4, 8, 16, 64]), st.integers(1, 3), st.integers(0, 2**31))
def test_stable_pairing_invariants(n, alpha, seed):
    inst = stable_pairing_process(n, alpha, random.Random(seed))
    ell = n // 2
    assert len(inst.graphs) == alpha * (int(math.log2(ell)) + 1)
    assert all(is_matching(g) for g in inst.graphs)
    # Rounds are constant within a block of alpha.
    for b in range(0, len(inst.graphs), alpha):
        assert len(set(inst.graphs[b : b + alpha])) == 1
    # One selected node per initial pair, then halving to a single root.
    assert len(inst.selected) == ell
    assert all(len(inst.selected & {a, b}) == 1 for a, b in inst.initial_pairs)
    sizes = [len(s) for s in inst.phase_sets]
    assert sizes == [ell >> p for p in range(len(sizes))] and sizes[-1] == 1
    for p, pairs in enumerate(inst.phase_pairs, start=1):
        g = inst.graphs[p * alpha]
        assert all(g.has_edge(a, b) for a, b in pairs)
        # Unselected nodes sit out after the first block.
        assert all(g.degree(x) == 0 for x in range(n) if x not in inst.selected)
    assert inst.root in inst.selected
    assert inst.phase_of_round(1) == 0 and inst.phase_of_round(alpha + 1) == 1


def test_stable_pairing_validation():
    with pytest.raises(GraphError):
        stable_pairing_process(12, 1, random.Random(0))
    with pytest.raises(GraphError):
        stable_pairing_process(8, 0, random.Random(0))
