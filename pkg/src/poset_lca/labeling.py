"""Binary labelings of posets: oracles, violations, and distances."""
from __future__ import annotations

import math
import random
import threading
from fractions import Fraction
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import SizeError
from .poset import DOWN, UP, CubePoset, Poset

MAX_EXACT_ELEMENTS = 1 << 14
MAX_BRUTE_FORCE_ELEMENTS = 20


class LabelOracle:
    """Point-queryable 0/1 labeling with a probe counter.

    By default a repeated query at the same element is served from a memo and
    costs nothing; ``strict=True`` counts every call.
    """

    def __init__(self, fn: Callable[[int], int], descriptor: str = "stored-array", strict: bool = False):
        self._fn = fn
        self.descriptor = descriptor
        self.strict = strict
        self._memo: dict[int, int] = {}
        self._lock = threading.Lock()
        self.probes = 0

    @classmethod
    def from_array(cls, values: Sequence[int], descriptor: str = "stored-array", strict: bool = False) -> "LabelOracle":
        values = [int(v) for v in values]
        return cls(values.__getitem__, descriptor, strict)

    def __call__(self, x: int) -> int:
        bit = self._memo.get(x)
        with self._lock:
            if bit is None:
                bit = self._memo[x] = int(self._fn(x))
                self.probes += 1
            elif self.strict:
                self.probes += 1
        return bit

    def peek(self, x: int) -> int:
        """Evaluate without touching the probe counter."""
        bit = self._memo.get(x)
        return int(self._fn(x)) if bit is None else bit

    def reset(self) -> None:
        with self._lock:
            self._memo.clear()
            self.probes = 0

    def table(self, poset: Poset) -> list[int]:
        return [self.peek(x) for x in poset.elements()]

    def __repr__(self) -> str:
        return f"LabelOracle({self.descriptor}, probes={self.probes})"


class ViolationPair(NamedTuple):
    upper: int
    lower: int


def _bits(f) -> Callable[[int], int]:
    if isinstance(f, LabelOracle):
        return f.peek
    if callable(f):
        return f
    return f.__getitem__


def is_monotone(poset: Poset, f) -> bool:
    g = _bits(f)
    return all(g(u) <= g(v) for u in poset.elements() for v in poset.up(u))


def violation_pairs(poset: Poset, f) -> set[ViolationPair]:
    g = _bits(f)
    out = set()
    for w in poset.elements():
        if g(w) == 1:
            out.update(ViolationPair(v, w) for v in poset.dists_from(w, UP) if g(v) == 0)
    return out


def k_violation_neighbors(x: int, poset: Poset, f, k: int) -> set[int]:
    """Neighbours of ``x`` in the k-violation graph of ``f``."""
    g = _bits(f)
    bit = g(x)
    direction = UP if bit == 1 else DOWN
    return {y for y, d in poset.dists_from(x, direction).items() if d >= k and g(y) != bit}


def labeling_distance(poset: Poset, f, g) -> Fraction:
    a, b = _bits(f), _bits(g)
    n = len(poset)
    return Fraction(sum(a(x) != b(x) for x in poset.elements()), n) if n else Fraction(0)


def distance_to_monotone_exact(poset: Poset, f, limit: int = MAX_EXACT_ELEMENTS) -> Fraction:
    """Exact distance to monotonicity.

    Minimum vertex cover of the bipartite violation graph (1-labelled lower
    ends vs 0-labelled upper ends), which by Konig's theorem is the size of a
    maximum matching.
    """
    n = len(poset)
    if n > limit:
        raise SizeError(f"exact distance limited to {limit} elements, got {n}")
    if n == 0:
        return Fraction(0)
    g = _bits(f)
    rows, cols = [], []
    for w in poset.elements():
        if g(w) == 1:
            for v in poset.dists_from(w, UP):
                if g(v) == 0:
                    rows.append(w)
                    cols.append(v)
    if not rows:
        return Fraction(0)
    ids = {x: i for i, x in enumerate(poset.elements())}
    r = np.fromiter((ids[w] for w in rows), dtype=np.int64, count=len(rows))
    c = np.fromiter((ids[v] for v in cols), dtype=np.int64, count=len(cols))
    graph = csr_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(n, n))
    match = maximum_bipartite_matching(graph, perm_type="column")
    return Fraction(int(np.count_nonzero(match >= 0)), n)


def distance_to_monotone_bruteforce(poset: Poset, f, limit: int = MAX_BRUTE_FORCE_ELEMENTS) -> Fraction:
    """Search over monotone labelings (branch and bound); small posets only."""
    n = len(poset)
    if n > limit:
        raise SizeError(f"brute force limited to {limit} elements, got {n}")
    if n == 0:
        return Fraction(0)
    g = _bits(f)
    elems = list(poset.elements())
    order = sorted(elems, key=poset.topo_index.__getitem__)
    target = [g(x) for x in order]
    pos = {x: i for i, x in enumerate(order)}
    preds = [[pos[p] for p in poset.hasse_down[x]] for x in order]
    labels = [0] * n
    best = sum(target)  # all-zero labeling is monotone

    def search(i: int, cost: int) -> None:
        nonlocal best
        if cost >= best:
            return
        if i == n:
            best = cost
            return
        forced = any(labels[p] for p in preds[i])
        choices = (1,) if forced else (target[i], 1 - target[i])
        for b in choices:
            labels[i] = b
            search(i + 1, cost + (b != target[i]))
        labels[i] = 0

    search(0, 0)
    return Fraction(best, n)


def count_ones(poset: Poset, f) -> int:
    g = _bits(f)
    return sum(g(x) for x in poset.elements())


def random_labeling(poset: Poset, p: float, seed: int) -> list[int]:
    rng = random.Random(seed)
    return [int(rng.random() < p) for _ in poset.elements()]


def random_monotone(poset: Poset, seed: int) -> list[int]:
    """Indicator of the up-closure of a random generating set."""
    rng = random.Random(seed)
    density = rng.random()
    elems = list(poset.elements())
    labels = dict.fromkeys(elems, 0)
    for x in elems:
        if rng.random() < density * 0.5 and not labels[x]:
            labels[x] = 1
            for y in poset.dists_from(x, UP):
                labels[y] = 1
    return [labels[x] for x in elems]


# ---------------------------------------------------------------------------
# functions on {0,1}^n, addressed by bitmask


def _seeded_random_table(n: int, p: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return (rng.random(1 << n) < p).astype(np.int8)


def cube_function(spec: str, n: int, seed: int = 0) -> Callable[[int], int]:
    """Parse a function spec into a map from bitmask to bit.

    Specs: ``majority`` (ties to 0), ``antimajority``, ``parity``,
    ``threshold:k`` (weight >= k), ``dictator:i``, ``antidictator:i``,
    ``and:i,j``, ``weighted:s`` (positive weights drawn from seed s, threshold
    at half their sum), ``random:p``, ``const:b``. A suffix ``+flip:q`` flips each
    point independently with probability q (seeded).
    """
    base, _, noise = spec.partition("+flip:")
    name, _, arg = base.partition(":")
    half = n / 2
    if name == "majority":
        fn = lambda m: int(m.bit_count() > half)
    elif name == "antimajority":
        fn = lambda m: int(m.bit_count() < half)
    elif name == "parity":
        fn = lambda m: m.bit_count() & 1
    elif name == "threshold":
        t = int(arg)
        fn = lambda m: int(m.bit_count() >= t)
    elif name == "dictator":
        i = int(arg or 0)
        fn = lambda m: m >> i & 1
    elif name == "antidictator":
        i = int(arg or 0)
        fn = lambda m: 1 - (m >> i & 1)
    elif name == "and":
        idx = [int(a) for a in arg.split(",")]
        mask = sum(1 << i for i in idx)
        fn = lambda m: int(m & mask == mask)
    elif name == "weighted":
        rng = np.random.default_rng(int(arg or 0))
        w = rng.uniform(0.2, 1.0, n)
        theta = w.sum() / 2 + rng.uniform(-0.5, 0.5)
        bits = [1 << i for i in range(n)]
        fn = lambda m: int(sum(wi for wi, b in zip(w, bits) if m & b) >= theta)
    elif name == "random":
        table = _seeded_random_table(n, float(arg), seed)
        fn = lambda m: int(table[m])
    elif name == "const":
        b = int(arg)
        fn = lambda m: b
    else:
        raise ValueError(f"unknown function spec {spec!r}")
    if noise:
        flips = _seeded_random_table(n, float(noise), seed ^ 0x5F1A)
        inner = fn
        fn = lambda m: inner(m) ^ int(flips[m])
    return fn


def cube_truth_table(fn: Callable[[int], int], n: int) -> np.ndarray:
    return np.fromiter((fn(m) for m in range(1 << n)), dtype=np.int8, count=1 << n)


def oracle_on(poset: Poset, fn: Callable[[int], int], descriptor: str = "stored-array", strict: bool = False) -> LabelOracle:
    """LabelOracle over a poset's element IDs from a function of bitmasks (cubes) or IDs."""
    if isinstance(poset, CubePoset):
        mask = poset.mask
        return LabelOracle(lambda x: fn(mask(x)), descriptor, strict)
    return LabelOracle(fn, descriptor, strict)


def poset_function(spec: str, poset: Poset, seed: int = 0) -> LabelOracle:
    """Function spec for an arbitrary poset: cube specs on cubes, ``random:p`` anywhere."""
    if isinstance(poset, CubePoset):
        return oracle_on(poset, cube_function(spec, poset.n, seed))
    name, _, arg = spec.partition(":")
    if name == "random":
        return LabelOracle.from_array(random_labeling(poset, float(arg), seed))
    if name == "const":
        return LabelOracle(lambda x: int(arg))
    raise ValueError(f"function spec {spec!r} needs a hypercube poset")


def read_labels(path, n: Optional[int] = None) -> list[int]:
    pairs = {}
    with open(path) as fh:
        for ln in fh:
            if ln.strip() and not ln.startswith("#"):
                a, b = ln.split()
                pairs[int(a)] = int(b)
    n = len(pairs) if n is None else n
    missing = [x for x in range(n) if x not in pairs]
    if missing:
        raise ValueError(f"label file misses elements {missing[:5]}")
    return [pairs[x] for x in range(n)]


def format_labels(values: Iterable[int]) -> str:
    return "".join(f"{i} {int(b)}\n" for i, b in enumerate(values))


def hoeffding_samples(additive: float, failure: float) -> int:
    """Samples so that an empirical mean is within ``additive`` w.p. >= 1 - failure."""
    return math.ceil(math.log(2 / failure) / (2 * additive**2))
