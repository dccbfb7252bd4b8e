"""Maximal independent set LCA driven by desire-level marking dynamics.

A query simulates ``tau`` synchronous rounds of the dynamics around the
queried vertex. Vertices whose fate is still open after ``tau`` rounds are
resolved by a greedy pass (in ID order) over their connected component of
undecided vertices, which is what makes the union of all answers a maximal
independent set for any tape.

Round ``r`` (1-based), for every vertex still alive at its start:

* ``u`` is marked with probability ``2**-j_r(u)`` (``j`` tape bits all zero);
* a marked vertex with no marked live neighbour joins the MIS, and it and its
  neighbours are removed at the end of the round;
* survivors update ``j``: up by one if the live neighbours' desire levels sum
  to at least 2, otherwise down by one (floor 1, i.e. ``p <= 1/2``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, NamedTuple, Optional, Sequence

from .errors import ComponentTooLarge
from .tape import RandomTape


def _identity(v):
    return v


@dataclass
class WorkGraph:
    """Undirected graph behind an all-neighbours oracle.

    ``key`` maps a vertex to the integer used to address tape bits;
    ``order_key`` orders vertices for the greedy tie-break.
    """

    neighbors: Callable[[Hashable], Sequence[Hashable]]
    degree_bound: int
    n_vertices: int
    key: Callable[[Hashable], int] = _identity
    order_key: Callable[[Hashable], object] = _identity
    key_bound: Optional[int] = None
    probes: int = field(default=0, init=False)

    def all_neighbors(self, v) -> Sequence:
        self.probes += 1
        return self.neighbors(v)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "WorkGraph":
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            adj[u].add(v)
            adj[v].add(u)
        lists = [tuple(sorted(a)) for a in adj]
        g = cls(lists.__getitem__, max((len(a) for a in lists), default=0), n, key_bound=n)
        g.adjacency = lists
        g.vertices = range(n)
        return g


class Decided(NamedTuple):
    in_mis: bool
    round: int


def default_tau(degree_bound: int, c: float = 2.0) -> int:
    return math.ceil(4 * c * math.log2(degree_bound + 2))


class MISLCA:
    """Memoised MIS oracle for one (graph, tape, tau, stage).

    Answers are a pure function of those four; the memo only saves work.
    ``max_component=None`` disables the cap on undecided components.
    """

    def __init__(self, graph: WorkGraph, tape: RandomTape, tau: int, stage: int = 0, max_component: Optional[int] = 4096):
        if tau < 1:
            raise ValueError("tau must be at least 1")
        self.graph = graph
        self.tape = tape
        self.tau = tau
        self.stage = stage
        self.max_component = max_component
        self._nbrs: dict = {}
        # exponent j_r(v) for rounds 1..len; len == number of rounds v has been resolved through
        self._levels: dict = {}
        self._fate: dict = {}
        self._marks: dict = {}
        self._joined: dict = {}
        self._answers: dict = {}
        self.simulated = 0
        self.largest_component = 0

    def neighbors(self, v) -> Sequence:
        nb = self._nbrs.get(v)
        if nb is None:
            nb = self._nbrs[v] = tuple(self.graph.all_neighbors(v))
        return nb

    # -- dynamics ---------------------------------------------------------

    def _live(self, v, r: int) -> bool:
        """Alive at the start of round r (requires v resolved through r - 1)."""
        fate = self._fate.get(v)
        return fate is None or fate.round >= r

    def _marked(self, v, r: int) -> bool:
        m = self._marks.get((v, r))
        if m is None:
            j = self._levels[v][r - 1]
            m = self._marks[(v, r)] = self.tape.marked(self.stage, r, self.graph.key(v), j)
        return m

    def _joins(self, u, r: int) -> bool:
        if not self._live(u, r) or not self._marked(u, r):
            return False
        j = self._joined.get((u, r))
        if j is None:
            j = self._joined[(u, r)] = not any(self._live(w, r) and self._marked(w, r) for w in self.neighbors(u))
        return j

    def _step(self, v, r: int) -> None:
        """Resolve round r for live v; neighbours (2-ball) are resolved through r - 1."""
        levels = self._levels[v]
        if self._joins(v, r):
            self._fate[v] = Decided(True, r)
            return
        live_nbrs = [u for u in self.neighbors(v) if self._live(u, r)]
        if any(self._joins(u, r) for u in live_nbrs):
            self._fate[v] = Decided(False, r)
            return
        j = levels[r - 1]
        if live_nbrs:
            top = max(self._levels[u][r - 1] for u in live_nbrs)
            pressure = sum(1 << (top - self._levels[u][r - 1]) for u in live_nbrs)
            heavy = pressure >= 2 << top
        else:
            heavy = False
        levels.append(j + 1 if heavy else max(j - 1, 1))

    def _advance(self, v, rounds: int) -> None:
        # Round t of a vertex needs its 2-ball resolved through t - 1. entry[u] is
        # the highest round u has to be resolved through for this call.
        levels, fate = self._levels, self._fate
        entry = {v: rounds}
        spread: dict = {}  # w -> level at which N(w) was pulled in
        bucket = [v]
        for t in range(rounds, 0, -1):
            fresh = []
            for u in bucket:
                if u in fate or len(levels.get(u, ())) > t:
                    continue
                for w in self.neighbors(u):
                    if w not in entry:
                        entry[w] = t - 1
                        fresh.append(w)
                    if spread.get(w, -1) < t - 1:
                        spread[w] = t - 1
                        for z in self.neighbors(w):
                            if z not in entry:
                                entry[z] = t - 1
                                fresh.append(z)
            bucket = fresh
        order = sorted(entry, key=entry.__getitem__, reverse=True)
        for u in order:
            if u not in levels:
                levels[u] = [1]
        active = [u for u in order if u not in fate and len(levels[u]) <= entry[u]]
        for t in range(1, rounds + 1):
            keep = []
            for u in active:
                if entry[u] < t:
                    break
                if u in fate:
                    continue
                if len(levels[u]) == t:
                    self._step(u, t)
                    self.simulated += 1
                keep.append(u)
            active = keep

    def simulate(self, v) -> Optional[Decided]:
        """Fate of v within tau rounds, or None if still undecided."""
        fate = self._fate.get(v)
        if fate is not None:
            return fate
        if v not in self._levels:
            self._levels[v] = [1]
        target = 1
        while True:
            target = min(self.tau, max(target, len(self._levels[v])) * 2)
            self._advance(v, target)
            fate = self._fate.get(v)
            if fate is not None or target >= self.tau:
                return fate

    def desire_levels(self, v) -> list[float]:
        """Desire levels 2^-j used by v in the rounds simulated so far."""
        return [2.0**-j for j in self._levels.get(v, [])]

    # -- LCA --------------------------------------------------------------

    def undecided_component(self, v) -> set:
        if self.simulate(v) is not None:
            return set()
        comp = {v}
        frontier = [v]
        while frontier:
            u = frontier.pop()
            for w in self.neighbors(u):
                if w not in comp and self.simulate(w) is None:
                    comp.add(w)
                    if self.max_component is not None and len(comp) > self.max_component:
                        raise ComponentTooLarge(v, len(comp), self.max_component)
                    frontier.append(w)
        self.largest_component = max(self.largest_component, len(comp))
        return comp

    def member(self, v) -> bool:
        ans = self._answers.get(v)
        if ans is not None:
            return ans
        fate = self.simulate(v)
        if fate is not None:
            self._answers[v] = fate.in_mis
            return fate.in_mis
        comp = self.undecided_component(v)
        joined = set()
        for u in sorted(comp, key=self.graph.order_key):
            nbrs = self.neighbors(u)
            if any(w in joined for w in nbrs):
                continue
            # undecided vertices are live, so no neighbour can already be in
            if any(w not in comp and self._fate[w].in_mis for w in nbrs if w in self._fate):
                continue
            joined.add(u)
        for u in comp:
            self._answers[u] = u in joined
        return v in joined


# -- functional surface ---------------------------------------------------


def simulate_rounds(graph: WorkGraph, v, tau: int, tape: RandomTape, stage: int = 0) -> Optional[Decided]:
    return MISLCA(graph, tape, tau, stage).simulate(v)


def undecided_component(graph: WorkGraph, v, tau: int, tape: RandomTape, stage: int = 0, max_component: Optional[int] = 4096) -> set:
    return MISLCA(graph, tape, tau, stage, max_component).undecided_component(v)


def mis_member(graph: WorkGraph, v, tau: int, tape: RandomTape, stage: int = 0, max_component: Optional[int] = 4096) -> int:
    return int(MISLCA(graph, tape, tau, stage, max_component).member(v))


def greedy_mis_reference(adjacency: Sequence[Sequence[int]] | Callable, order: Iterable) -> set:
    """Sequential greedy MIS over ``order``."""
    nbrs = adjacency if callable(adjacency) else adjacency.__getitem__
    chosen: set = set()
    blocked: set = set()
    for v in order:
        if v not in blocked:
            chosen.add(v)
            blocked.add(v)
            blocked.update(nbrs(v))
    return chosen


def is_independent(adjacency, members: set) -> bool:
    nbrs = adjacency if callable(adjacency) else adjacency.__getitem__
    return all(w not in members for v in members for w in nbrs(v))


def is_maximal_independent(adjacency, members: set, vertices: Iterable) -> bool:
    nbrs = adjacency if callable(adjacency) else adjacency.__getitem__
    if not is_independent(adjacency, members):
        return False
    return all(v in members or any(w in members for w in nbrs(v)) for v in vertices)


def read_graph(path) -> WorkGraph:
    with open(path) as fh:
        rows = [ln.split() for ln in fh if ln.strip() and not ln.startswith("#")]
    n = int(rows[0][0])
    return WorkGraph.from_edges(n, [(int(a), int(b)) for a, b in rows[1:]])


def random_bounded_graph(n: int, max_degree: int, edge_attempts: int, seed: int) -> list[tuple[int, int]]:
    """Random simple graph with every degree at most ``max_degree``."""
    import random

    rng = random.Random(seed)
    deg = [0] * n
    edges = set()
    for _ in range(edge_attempts):
        u, v = rng.randrange(n), rng.randrange(n)
        if u == v:
            continue
        e = (min(u, v), max(u, v))
        if e in edges or deg[u] >= max_degree or deg[v] >= max_degree:
            continue
        edges.add(e)
        deg[u] += 1
        deg[v] += 1
    return sorted(edges)
