"""Maximal matching LCA: the MIS LCA run on the line graph."""
from __future__ import annotations

from typing import Hashable, Iterable, Optional, Sequence

from .errors import UnknownEdge
from .mis import MISLCA, WorkGraph, default_tau
from .tape import RandomTape


class LineGraph:
    """All-neighbours access to the line graph of a base WorkGraph.

    A line-graph vertex is a base edge ``(a, b)`` with ``a`` before ``b`` in
    the base graph's ``order_key``; edge IDs are therefore ordered
    lexicographically by endpoint. Each line-graph neighbour query costs two
    base neighbour queries.
    """

    def __init__(self, base: WorkGraph):
        self.base = base
        self._nbrs: dict = {}
        bound = base.key_bound if base.key_bound is not None else base.n_vertices
        self.key_bound = bound
        delta = base.degree_bound
        self.work_graph = WorkGraph(
            self.neighbors,
            degree_bound=max(2 * delta - 2, 0),
            n_vertices=base.n_vertices * delta // 2,
            key=self.key,
            order_key=self.order_key,
            key_bound=bound * bound,
        )

    def base_neighbors(self, v) -> Sequence:
        nb = self._nbrs.get(v)
        if nb is None:
            nb = self._nbrs[v] = tuple(self.base.all_neighbors(v))
        return nb

    def edge(self, a, b) -> tuple:
        ok = self.base.order_key
        return (a, b) if ok(a) <= ok(b) else (b, a)

    def key(self, e) -> int:
        a, b = e
        return self.base.key(a) * self.key_bound + self.base.key(b)

    def order_key(self, e):
        a, b = e
        return self.base.order_key(a), self.base.order_key(b)

    def neighbors(self, e) -> list:
        a, b = e
        na, nb = self.base_neighbors(a), self.base_neighbors(b)
        if b not in na:
            raise UnknownEdge(e)
        out = [self.edge(a, c) for c in na if c != b]
        out.extend(self.edge(b, c) for c in nb if c != a)
        return out


def line_graph_neighbors(graph: WorkGraph, e: tuple) -> set:
    lg = LineGraph(graph)
    return set(lg.neighbors(lg.edge(*e)))


class MatchingLCA:
    """Partner queries for one maximal matching fixed by (graph, tape, tau, stage)."""

    def __init__(self, graph: WorkGraph, tape: RandomTape, tau: Optional[int] = None, stage: int = 0, max_component: Optional[int] = 4096):
        self.graph = graph
        self.line = LineGraph(graph)
        if tau is None:
            tau = default_tau(self.line.work_graph.degree_bound)
        self.tau = tau
        self.mis = MISLCA(self.line.work_graph, tape, tau, stage, max_component)

    def matched(self, a, b) -> bool:
        return self.mis.member(self.line.edge(a, b))

    def partner(self, x):
        """The vertex matched to x, or x itself when unmatched."""
        for y in sorted(self.line.base_neighbors(x), key=self.graph.order_key):
            if self.mis.member(self.line.edge(x, y)):
                return y
        return x


def matching_partner(graph: WorkGraph, x, tape: RandomTape, tau: Optional[int] = None, stage: int = 0, max_component: Optional[int] = 4096):
    return MatchingLCA(graph, tape, tau, stage, max_component).partner(x)


def greedy_matching_reference(edges: Iterable[tuple]) -> list[tuple]:
    """Sequential greedy matching over ``edges`` in the given order."""
    used: set = set()
    out = []
    for u, v in edges:
        if u not in used and v not in used:
            out.append((u, v))
            used.add(u)
            used.add(v)
    return out


def is_maximal_matching(pairs: Iterable[tuple], edges: Iterable[tuple]) -> bool:
    seen: set = set()
    for u, v in pairs:
        if u in seen or v in seen or u == v:
            return False
        seen.update((u, v))
    return all(u in seen or v in seen for u, v in edges)


def partner_map(pairs: Iterable[tuple], vertices: Iterable[Hashable]) -> dict:
    lam = {v: v for v in vertices}
    for u, v in pairs:
        lam[u], lam[v] = v, u
    return lam
