"""Finite posets stored as Hasse diagrams.

Elements are dense integer IDs ``0..N-1``. ``dist`` is the *longest* directed
path length between comparable elements, which is what the violation graphs
of the sorter are built on.
"""
from __future__ import annotations

import math
import random
from functools import cached_property
from itertools import combinations
from typing import Iterable, Iterator, Optional, Sequence

from .errors import CycleError, PosetError, RedundantEdgeError, SizeError

UP = 1
DOWN = -1

MAX_MATERIALIZED = 1 << 20
MAX_IMPLICIT_DIM = 24


class Poset:
    """Immutable poset given by its Hasse diagram.

    Query methods are read-only; the internal caches are filled idempotently,
    so concurrent readers see the same values.
    """

    def __init__(self, n_elements: int, hasse_up: Sequence[Sequence[int]], hasse_down: Sequence[Sequence[int]]):
        self._n = n_elements
        self.hasse_up = tuple(tuple(s) for s in hasse_up)
        self.hasse_down = tuple(tuple(s) for s in hasse_down)
        self._dists: dict[tuple[int, int], dict[int, int]] = {}
        # Hasse-list reads, for probe accounting.
        self.probes = 0

    def __len__(self) -> int:
        return self._n

    def __repr__(self) -> str:
        return f"{type(self).__name__}(N={len(self)}, height={self.height})"

    def elements(self) -> Iterable[int]:
        return range(self._n)

    def __contains__(self, x) -> bool:
        return isinstance(x, int) and 0 <= x < self._n

    def up(self, x: int) -> tuple[int, ...]:
        self.probes += 1
        return self.hasse_up[x]

    def down(self, x: int) -> tuple[int, ...]:
        self.probes += 1
        return self.hasse_down[x]

    def key(self, x: int) -> int:
        """Integer key used to address random-tape bits for element ``x``."""
        return x

    @property
    def key_bound(self) -> int:
        return self._n

    @cached_property
    def topo_index(self) -> list[int]:
        order = _topological_order(self._n, self.hasse_up)
        index = [0] * self._n
        for i, x in enumerate(order):
            index[x] = i
        return index

    @cached_property
    def height(self) -> int:
        longest = [0] * self._n
        order = sorted(range(self._n), key=self.topo_index.__getitem__, reverse=True)
        for x in order:
            for y in self.hasse_up[x]:
                longest[x] = max(longest[x], longest[y] + 1)
        return max(longest, default=0)

    @cached_property
    def degree_bound(self) -> int:
        """Max over elements of the number of ALL predecessors or successors."""
        best = 0
        for x in self.elements():
            best = max(best, len(self.dists_from(x, UP)), len(self.dists_from(x, DOWN)))
        return best

    def dists_from(self, x: int, direction: int) -> dict[int, int]:
        """Longest-path distance from ``x`` to every element above (``UP``) or below (``DOWN``) it."""
        cached = self._dists.get((x, direction))
        if cached is not None:
            return cached
        nbrs = self.up if direction == UP else self.down
        seen = {x}
        stack = [x]
        adjacency = {}
        while stack:
            u = stack.pop()
            adjacency[u] = nbrs(u)
            for v in adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        sign = 1 if direction == UP else -1
        order = sorted(seen, key=lambda u: sign * self.topo_index[u])
        best = {x: 0}
        for u in order:
            du = best.get(u)
            if du is None:
                continue
            for v in adjacency[u]:
                if best.get(v, -1) < du + 1:
                    best[v] = du + 1
        del best[x]
        self._dists[(x, direction)] = best
        return best

    def successors(self, x: int) -> frozenset[int]:
        return frozenset(self.dists_from(x, UP))

    def predecessors(self, x: int) -> frozenset[int]:
        return frozenset(self.dists_from(x, DOWN))

    def dist(self, x: int, y: int) -> Optional[int]:
        """Longest directed path length between comparable ``x`` and ``y``; ``None`` if incomparable."""
        if x == y:
            return 0
        d = self.dists_from(x, UP).get(y)
        if d is None:
            d = self.dists_from(x, DOWN).get(y)
        return d

    def less(self, x: int, y: int) -> bool:
        """True iff x strictly precedes y."""
        return y in self.dists_from(x, UP)

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in self.elements():
            for v in self.hasse_up[u]:
                yield u, v

    def comparable_pairs(self) -> Iterator[tuple[int, int, int]]:
        """All ``(lower, upper, dist)`` triples with lower < upper."""
        for x in self.elements():
            for y, d in self.dists_from(x, UP).items():
                yield x, y, d


def _topological_order(n: int, up: Sequence[Sequence[int]]) -> list[int]:
    indeg = [0] * n
    for u in range(n):
        for v in up[u]:
            indeg[v] += 1
    ready = [u for u in range(n) if indeg[u] == 0]
    ready.reverse()
    order = []
    while ready:
        u = ready.pop()
        order.append(u)
        for v in up[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    if len(order) != n:
        raise CycleError("edge set contains a directed cycle")
    return order


def _adjacency(edges: Iterable[tuple[int, int]], n: Optional[int]) -> tuple[int, list[list[int]]]:
    edges = [(int(u), int(v)) for u, v in edges]
    if n is None:
        n = 1 + max((max(u, v) for u, v in edges), default=-1)
    up: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise PosetError(f"edge ({u}, {v}) references an element outside 0..{n - 1}")
        if u == v:
            raise CycleError(f"self-loop at {u}")
        up[u].append(v)
    return n, up


def _reach_bitsets(n: int, up: Sequence[Sequence[int]]) -> list[int]:
    order = _topological_order(n, up)
    reach = [0] * n
    for u in reversed(order):
        r = 0
        for v in up[u]:
            r |= reach[v] | (1 << v)
        reach[u] = r
    return reach


def build_poset(hasse_edges: Iterable[tuple[int, int]], n_elements: Optional[int] = None) -> Poset:
    """Validate a Hasse edge list and build the poset.

    Raises CycleError on a directed cycle and RedundantEdgeError when an edge is
    implied by a longer path (or duplicated).
    """
    n, up = _adjacency(hasse_edges, n_elements)
    reach = _reach_bitsets(n, up)
    for u in range(n):
        if len(set(up[u])) != len(up[u]):
            raise RedundantEdgeError(f"duplicate edge out of {u}")
        for v in up[u]:
            others = 0
            for w in up[u]:
                if w != v:
                    others |= reach[w]
            if others >> v & 1:
                raise RedundantEdgeError(f"edge ({u}, {v}) is implied by a longer path")
    down: list[list[int]] = [[] for _ in range(n)]
    for u in range(n):
        for v in up[u]:
            down[v].append(u)
    return Poset(n, [sorted(s) for s in up], [sorted(s) for s in down])


def transitive_reduce(edges: Iterable[tuple[int, int]], n_elements: Optional[int] = None) -> list[tuple[int, int]]:
    """Drop every edge implied by a longer path (and duplicates)."""
    n, up = _adjacency(edges, n_elements)
    up = [sorted(set(s)) for s in up]
    reach = _reach_bitsets(n, up)
    kept = []
    for u in range(n):
        via = 0
        for w in up[u]:
            via |= reach[w]
        kept.extend((u, v) for v in up[u] if not via >> v & 1)
    return sorted(kept)


def random_dag(n: int, edge_prob: float, seed: int) -> list[tuple[int, int]]:
    """Random Hasse diagram: edges oriented low-ID to high-ID, then reduced."""
    rng = random.Random(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < edge_prob]
    return transitive_reduce(edges, n)


def random_poset(n: int, edge_prob: float, seed: int) -> Poset:
    return build_poset(random_dag(n, edge_prob, seed), n)


def chain(n: int) -> Poset:
    return build_poset([(i, i + 1) for i in range(n - 1)], n)


def antichain(n: int) -> Poset:
    return build_poset([], n)


# ---------------------------------------------------------------------------
# Boolean hypercube family


def truncation_threshold(n: int, eps: float) -> float:
    """Half-width of the retained weight band: sqrt((n/2) ln(2/eps))."""
    if not 0 < eps < 2:
        raise ValueError(f"truncation parameter must lie in (0, 2), got {eps}")
    return math.sqrt(n / 2 * math.log(2 / eps))


def weight_band(n: int, eps: Optional[float]) -> tuple[int, int]:
    """Inclusive ``(lo, hi)`` Hamming weights retained in the truncated cube."""
    if eps is None:
        return 0, n
    t = truncation_threshold(n, eps)
    # absorb float noise at exact boundaries
    lo = max(0, math.ceil(n / 2 - t - 1e-9))
    hi = min(n, math.floor(n / 2 + t + 1e-9))
    return lo, hi


def excluded_fraction(n: int, eps: float) -> float:
    lo, hi = weight_band(n, eps)
    kept = sum(math.comb(n, w) for w in range(lo, hi + 1))
    return 1 - kept / 2**n


class CubePoset(Poset):
    """The Boolean hypercube ``{0,1}^n`` or its middle weight band.

    With ``materialize=True`` element IDs are dense indices into ``points``
    (bitmasks in increasing numeric order). With ``materialize=False`` the
    element IDs are the bitmasks themselves and nothing is stored, which is
    how the band is used for n up to 24.

    Distances are weight differences: every maximal chain inside the band
    flips one bit per step.
    """

    def __init__(self, n: int, lo: int = 0, hi: Optional[int] = None, materialize: bool = True):
        if n < 1:
            raise ValueError("dimension must be at least 1")
        hi = n if hi is None else hi
        size = sum(math.comb(n, w) for w in range(lo, hi + 1))
        if materialize and size > MAX_MATERIALIZED:
            raise SizeError(f"{size} elements exceeds materialization budget {MAX_MATERIALIZED}")
        if not materialize and n > MAX_IMPLICIT_DIM:
            raise SizeError(f"implicit cube limited to n <= {MAX_IMPLICIT_DIM}")
        self.n = n
        self.lo = lo
        self.hi = hi
        self.materialized = materialize
        self._size = size
        self._dists = {}
        self.probes = 0
        if materialize:
            self.points = [m for m in range(1 << n) if lo <= m.bit_count() <= hi] if size < (1 << n) else list(range(1 << n))
            self.index = {m: i for i, m in enumerate(self.points)}
        else:
            self.points = None
            self.index = None

    def __len__(self) -> int:
        return self._size

    def __repr__(self) -> str:
        return f"CubePoset(n={self.n}, weights={self.lo}..{self.hi}, N={len(self)})"

    def mask(self, x: int) -> int:
        return self.points[x] if self.materialized else x

    def element(self, mask: int) -> int:
        """Element ID of a bitmask (KeyError if outside the band)."""
        if self.materialized:
            return self.index[mask]
        if not self.lo <= mask.bit_count() <= self.hi:
            raise KeyError(mask)
        return mask

    def elements(self) -> Iterable[int]:
        if self.materialized:
            return range(self._size)
        return (m for m in range(1 << self.n) if self.lo <= m.bit_count() <= self.hi)

    def __contains__(self, x) -> bool:
        if self.materialized:
            return isinstance(x, int) and 0 <= x < self._size
        return isinstance(x, int) and 0 <= x < (1 << self.n) and self.lo <= x.bit_count() <= self.hi

    def key(self, x: int) -> int:
        return x

    @property
    def key_bound(self) -> int:
        return self._size if self.materialized else 1 << self.n

    def weight(self, x: int) -> int:
        return self.mask(x).bit_count()

    def up(self, x: int) -> tuple[int, ...]:
        self.probes += 1
        m = self.mask(x)
        if m.bit_count() >= self.hi:
            return ()
        return tuple(self.element(m | 1 << i) for i in range(self.n) if not m >> i & 1)

    def down(self, x: int) -> tuple[int, ...]:
        self.probes += 1
        m = self.mask(x)
        if m.bit_count() <= self.lo:
            return ()
        return tuple(self.element(m & ~(1 << i)) for i in range(self.n) if m >> i & 1)

    @property
    def hasse_up(self):
        return tuple(self.up(x) for x in self.elements())

    @property
    def hasse_down(self):
        return tuple(self.down(x) for x in self.elements())

    @cached_property
    def height(self) -> int:
        return self.hi - self.lo

    @cached_property
    def degree_bound(self) -> int:
        # the bottom-weight element has the most successors (and symmetrically the top)
        def count(free: int, span: int) -> int:
            return sum(math.comb(free, j) for j in range(1, span + 1))

        return max(count(self.n - self.lo, self.hi - self.lo), count(self.hi, self.hi - self.lo))

    def dists_from(self, x: int, direction: int) -> dict[int, int]:
        cached = self._dists.get((x, direction))
        if cached is not None:
            return cached
        m = self.mask(x)
        w = m.bit_count()
        # one Hasse read per element of the explored up/down set
        if direction == UP:
            free = [1 << i for i in range(self.n) if not m >> i & 1]
            span = self.hi - w
        else:
            free = [1 << i for i in range(self.n) if m >> i & 1]
            span = w - self.lo
        out = {}
        for j in range(1, span + 1):
            for bits in combinations(free, j):
                delta = sum(bits)
                out[self.element(m | delta if direction == UP else m & ~delta)] = j
        self.probes += len(out) + 1
        self._dists[(x, direction)] = out
        return out

    def dist(self, x: int, y: int) -> Optional[int]:
        a, b = self.mask(x), self.mask(y)
        if a & b == a:
            return b.bit_count() - a.bit_count()
        if a & b == b:
            return a.bit_count() - b.bit_count()
        return None

    def less(self, x: int, y: int) -> bool:
        a, b = self.mask(x), self.mask(y)
        return a != b and a & b == a

    @cached_property
    def topo_index(self) -> list[int]:
        if not self.materialized:
            raise SizeError("topological index requires a materialized cube")
        # weight-major order is a linear extension
        return [(m.bit_count() << self.n) | m for m in self.points]


def hypercube(n: int, materialize: bool = True) -> CubePoset:
    return CubePoset(n, 0, n, materialize=materialize)


def truncated_hypercube(n: int, eps: float, materialize: bool = True) -> CubePoset:
    lo, hi = weight_band(n, eps)
    cube = CubePoset(n, lo, hi, materialize=materialize)
    cube.eps = eps
    return cube


# ---------------------------------------------------------------------------
# text formats


def read_poset(path) -> Poset:
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip() and not ln.startswith("#")]
    n = int(lines[0][0])
    return build_poset([(int(a), int(b)) for a, b in lines[1:]], n)


def format_poset(n: int, edges: Iterable[tuple[int, int]]) -> str:
    out = [str(n)]
    out.extend(f"{u} {v}" for u, v in sorted(edges))
    return "\n".join(out) + "\n"


def write_poset(path, poset: Poset) -> None:
    with open(path, "w") as fh:
        fh.write(format_poset(len(poset), poset.edges()))
