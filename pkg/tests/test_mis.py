import math
import statistics

import pytest
from hypothesis import given, settings, strategies as st

from poset_lca.errors import ComponentTooLarge
from poset_lca.mis import (
    MISLCA,
    Decided,
    WorkGraph,
    default_tau,
    greedy_mis_reference,
    is_independent,
    is_maximal_independent,
    mis_member,
    random_bounded_graph,
    read_graph,
    simulate_rounds,
    undecided_component,
)
from poset_lca.tape import RandomTape, derive_seed, gf64_mul, pack_address


class ScriptedTape(RandomTape):
    """Marks come from a table {vertex: set of rounds}; everything else is unmarked."""

    def __init__(self, marks):
        super().__init__(0)
        self.marks = marks

    def marked(self, stage, rnd, key, j):
        self.reads += 1
        return rnd in self.marks.get(key, ())


def path(n):
    return WorkGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def full_sweep(graph, seed, tau, cap=4096, mode="prf"):
    lca = MISLCA(graph, RandomTape(seed, mode), tau, 0, cap)
    return {v for v in graph.vertices if lca.member(v)}


def test_isolated_vertex_joins_when_first_marked():
    g = WorkGraph.from_edges(1, [])
    rounds = []
    for seed in range(2000):
        fate = simulate_rounds(g, 0, 64, RandomTape(seed))
        assert fate is not None and fate.in_mis
        rounds.append(fate.round)
    # geometric with p = 1/2: mean 2, standard error ~ 0.03
    assert statistics.mean(rounds) == pytest.approx(2.0, abs=0.12)


def test_single_edge_never_both():
    g = WorkGraph.from_edges(2, [(0, 1)])
    for seed in range(300):
        lca = MISLCA(g, RandomTape(seed), 64)
        a, b = lca.simulate(0), lca.simulate(1)
        assert a is not None and b is not None
        assert a.in_mis != b.in_mis and a.round == b.round


def test_triangle_exactly_one():
    g = WorkGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    for seed in range(1000):
        assert len(full_sweep(g, seed, 64)) == 1


def test_undecided_component_of_decided_vertex_is_empty():
    g = WorkGraph.from_edges(1, [])
    assert undecided_component(g, 0, 8, ScriptedTape({0: {1}})) == set()


def test_undecided_isolated_in_decided_neighbourhood():
    # 0 joins in round 1 and knocks out 1; 2 is never marked
    g = path(3)
    comp = undecided_component(g, 2, 6, ScriptedTape({0: {1}}))
    assert comp == {2}


def test_undecided_middle_of_path():
    # 0 and 6 join in round 1, removing 1 and 5; 2, 3, 4 never get marked
    g = path(7)
    tape = ScriptedTape({0: {1}, 6: {1}})
    lca = MISLCA(g, tape, 6)
    assert lca.simulate(0) == Decided(True, 1) and lca.simulate(1) == Decided(False, 1)
    assert lca.undecided_component(3) == {2, 3, 4}
    assert [lca.member(v) for v in range(7)] == [True, False, True, False, True, False, True]


def test_component_cap_raises():
    g = path(10)
    with pytest.raises(ComponentTooLarge):
        MISLCA(g, ScriptedTape({}), 4, 0, max_component=5).member(5)


def test_empty_graph_all_in():
    g = WorkGraph.from_edges(10, [])
    assert all(mis_member(g, v, 8, RandomTape(3)) == 1 for v in range(10))


def test_star_center_or_all_leaves():
    g = WorkGraph.from_edges(6, [(0, i) for i in range(1, 6)])
    for seed in range(200):
        s = full_sweep(g, seed, 40)
        assert s == {0} or s == {1, 2, 3, 4, 5}


def test_greedy_reference_examples():
    k3 = [[1, 2], [0, 2], [0, 1]]
    assert greedy_mis_reference(k3, [2, 0, 1]) == {2}
    assert greedy_mis_reference([[] for _ in range(4)], range(4)) == {0, 1, 2, 3}
    p4 = [[1], [0, 2], [1, 3], [2]]
    assert greedy_mis_reference(p4, range(4)) == {0, 2}


def test_random_graphs_sound():
    # N=200, max degree 6, tau = 8 ceil(log2 6) = 24
    ok = 0
    for i in range(200):
        g = WorkGraph.from_edges(200, random_bounded_graph(200, 6, 600, derive_seed(11, i)))
        try:
            s = full_sweep(g, derive_seed(12, i), 8 * math.ceil(math.log2(6)))
        except ComponentTooLarge:
            continue
        assert is_maximal_independent(g.adjacency, s, g.vertices)
        ok += 1
    assert ok >= 190


@settings(max_examples=40)
@given(st.integers(2, 40), st.integers(1, 6), st.integers(0, 2**40), st.integers(0, 2**40))
def test_query_order_independence(n, deg, gseed, tseed):
    g = WorkGraph.from_edges(n, random_bounded_graph(n, deg, 3 * n, gseed))
    tau = default_tau(g.degree_bound)
    forward = MISLCA(g, RandomTape(tseed), tau)
    a = [forward.member(v) for v in range(n)]
    backward = MISLCA(g, RandomTape(tseed), tau)
    b = [backward.member(v) for v in reversed(range(n))][::-1]
    single = [MISLCA(g, RandomTape(tseed), tau).member(v) for v in range(n)]
    assert a == b == single
    chosen = {v for v in range(n) if a[v]}
    assert is_maximal_independent(g.adjacency, chosen, range(n))


@given(st.integers(2, 30), st.integers(0, 2**40))
def test_desire_levels_dyadic(n, seed):
    g = WorkGraph.from_edges(n, random_bounded_graph(n, 5, 4 * n, seed))
    lca = MISLCA(g, RandomTape(seed), 12)
    for v in range(n):
        lca.simulate(v)
        for p in lca.desire_levels(v):
            assert p <= 0.5 and math.log2(p) == int(math.log2(p))
    assert lca.desire_levels(0)[0] == 0.5


def test_marking_frequency_kwise():
    draws = 10_000
    for j in (1, 2, 3):
        hits = sum(RandomTape(derive_seed(77, j, s), "kwise", 16).marked(0, 1, 5, j) for s in range(draws))
        p = 2.0**-j
        sigma = math.sqrt(draws * p * (1 - p))
        assert abs(hits - draws * p) <= 3 * sigma


def test_kwise_tape_deterministic_and_addressed():
    a, b = RandomTape(5, "kwise"), RandomTape(5, "kwise")
    assert a.word(1, 2, 3, 0) == b.word(1, 2, 3, 0)
    assert a.word(1, 2, 3, 0) != a.word(1, 2, 4, 0)
    with pytest.raises(ValueError):
        pack_address(32, 0, 0, 0)


def test_gf64_field_laws():
    x, y, z = 0xDEADBEEF12345678, 0x0123456789ABCDEF, 0xFFFFFFFFFFFFFFFF
    assert gf64_mul(x, 1) == x
    assert gf64_mul(x, y) == gf64_mul(y, x)
    assert gf64_mul(x, y ^ z) == gf64_mul(x, y) ^ gf64_mul(x, z)
    assert gf64_mul(gf64_mul(x, y), z) == gf64_mul(x, gf64_mul(y, z))
    # x^64 reduces to x^4 + x^3 + x + 1
    assert gf64_mul(1 << 63, 2) == 0x1B


def test_read_graph(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("4\n0 1\n1 2\n")
    g = read_graph(f)
    assert g.n_vertices == 4 and g.adjacency[1] == (0, 2) and g.degree_bound == 2
