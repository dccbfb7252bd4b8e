import pytest
from hypothesis import given, settings, strategies as st

from poset_lca.errors import ComponentTooLarge, UnknownEdge
from poset_lca.matching import (
    LineGraph,
    MatchingLCA,
    greedy_matching_reference,
    is_maximal_matching,
    line_graph_neighbors,
    matching_partner,
)
from poset_lca.mis import WorkGraph, random_bounded_graph
from poset_lca.tape import RandomTape, derive_seed


def sweep(g, seed, tau=None, cap=4096):
    lca = MatchingLCA(g, RandomTape(seed), tau, 0, cap)
    return {v: lca.partner(v) for v in g.vertices}


def edges_of(g):
    return [(u, v) for u in g.vertices for v in g.adjacency[u] if u < v]


def test_line_graph_triangle():
    g = WorkGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    assert line_graph_neighbors(g, (0, 1)) == {(1, 2), (0, 2)}


def test_line_graph_perfect_matching_isolated():
    g = WorkGraph.from_edges(4, [(0, 1), (2, 3)])
    assert line_graph_neighbors(g, (0, 1)) == set()


def test_line_graph_star():
    g = WorkGraph.from_edges(5, [(0, i) for i in range(1, 5)])
    assert line_graph_neighbors(g, (0, 1)) == {(0, 2), (0, 3), (0, 4)}


def test_line_graph_unknown_edge():
    g = WorkGraph.from_edges(3, [(0, 1)])
    with pytest.raises(UnknownEdge):
        line_graph_neighbors(g, (0, 2))


def test_line_graph_costs_two_probes():
    g = WorkGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    lg = LineGraph(g)
    lg.neighbors((1, 2))
    assert g.probes == 2


def test_line_graph_edge_ids_lexicographic():
    g = WorkGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    lg = LineGraph(g)
    assert lg.edge(2, 1) == (1, 2)
    assert sorted([(2, 3), (0, 1), (1, 2)], key=lg.order_key) == [(0, 1), (1, 2), (2, 3)]
    assert lg.key((0, 1)) < lg.key((1, 2)) < lg.key((2, 3))


def test_isolated_vertex_partner_is_itself():
    g = WorkGraph.from_edges(2, [])
    assert matching_partner(g, 0, RandomTape(1)) == 0


def test_single_edge_always_matched():
    g = WorkGraph.from_edges(2, [(0, 1)])
    for seed in range(50):
        assert sweep(g, seed) == {0: 1, 1: 0}


def test_path3_exactly_one_edge():
    g = WorkGraph.from_edges(3, [(0, 1), (1, 2)])
    for seed in range(300):
        lam = sweep(g, seed)
        matched = {(min(a, b), max(a, b)) for a, b in lam.items() if a != b}
        assert len(matched) == 1


def test_greedy_reference_examples():
    assert greedy_matching_reference([(1, 2), (0, 1), (2, 3)]) == [(1, 2)]
    assert greedy_matching_reference([(0, 1), (1, 2), (0, 2)]) == [(0, 1)]
    assert greedy_matching_reference([]) == []


def test_line_graph_size_accounting():
    g = WorkGraph.from_edges(50, random_bounded_graph(50, 5, 200, 3))
    lg = LineGraph(g)
    e = edges_of(g)
    assert len(e) <= g.n_vertices * g.degree_bound // 2 == lg.work_graph.n_vertices
    assert max(len(lg.neighbors(x)) for x in e) <= lg.work_graph.degree_bound == 2 * g.degree_bound - 2


def test_random_graphs_valid_matchings():
    ok = 0
    for i in range(200):
        g = WorkGraph.from_edges(120, random_bounded_graph(120, 8, 500, derive_seed(21, i)))
        try:
            lam = sweep(g, derive_seed(22, i))
        except ComponentTooLarge:
            continue
        pairs = {(a, b) for a, b in lam.items() if a < b}
        assert all(lam[lam[v]] == v for v in lam)
        assert all(b in g.adjacency[a] for a, b in pairs)
        assert is_maximal_matching(pairs, edges_of(g))
        ok += 1
    assert ok >= 190


@settings(max_examples=40)
@given(st.integers(2, 30), st.integers(1, 5), st.integers(0, 2**40), st.integers(0, 2**40))
def test_involution_and_order_independence(n, deg, gseed, tseed):
    g = WorkGraph.from_edges(n, random_bounded_graph(n, deg, 3 * n, gseed))
    a = sweep(g, tseed)
    lca = MatchingLCA(g, RandomTape(tseed))
    b = {v: lca.partner(v) for v in reversed(range(n))}
    assert a == b
    assert all(a[a[v]] == v for v in a)
    pairs = {(u, v) for u, v in a.items() if u < v}
    assert is_maximal_matching(pairs, edges_of(g))
