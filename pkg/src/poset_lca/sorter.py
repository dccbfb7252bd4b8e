"""Sorting 0/1 labels on a poset by staged swaps of violating pairs.

Stage ``i`` (``i = 0 .. ceil(log2 h)``) builds the violation graph of the
current labels restricted to pairs at distance at least
``k_i = ceil(h / 2**(i+1))``, picks a maximal matching of it and swaps every
matched pair. Each stage at least halves the longest violated distance, so the
labels are sorted after the last stage.

``global_sort`` runs the stages over the whole poset with any matcher.
``LocalSorter`` answers point queries to the same output, evaluating every
stage lazily: the label of ``x`` after stage ``i`` is the label of its stage-i
partner before it, partners come from the matching LCA on the violation graph,
and the violation graph reads only the labels of elements comparable to the
queried one.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .config import SorterConfig
from .errors import ComponentTooLarge, MatcherFailure, StageFailure
from .labeling import LabelOracle, _bits
from .matching import MatchingLCA, greedy_matching_reference, is_maximal_matching, partner_map
from .mis import WorkGraph
from .poset import DOWN, UP, Poset
from .tape import RandomTape, derive_seed


def stage_count(height: int, extra_stage: bool = False) -> int:
    if height == 0:
        return 0
    return math.ceil(math.log2(height)) + 1 + int(extra_stage)


def cutoff(height: int, stage: int) -> int:
    """k for stage i: ceil(h / 2^(i+1)), never below 1."""
    return max(1, -(-height // (1 << (stage + 1))))


def stage_tau(poset: Poset, config: SorterConfig) -> int:
    """Round budget for every stage's matching LCA.

    Uses only poset-level bounds, so the local and global runs agree on it.
    The constant is raised to log(1/delta') / log(N_line) when the per-stage
    failure budget delta' = delta / stages asks for more than ``config.c``.
    """
    delta_deg = poset.degree_bound
    line_degree = max(2 * delta_deg - 2, 0)
    line_vertices = max(len(poset) * delta_deg // 2, 2)
    stages = max(stage_count(poset.height, config.extra_stage), 1)
    delta_stage = config.delta / stages
    c = max(config.c, math.log(1 / delta_stage) / math.log(line_vertices))
    return math.ceil(4 * c * math.log2(line_degree + 2))


def comparable_arrays(poset: Poset):
    """``(lower, upper, dist)`` arrays over all comparable pairs, cached on the poset."""
    cached = getattr(poset, "_pair_arrays", None)
    if cached is None:
        lo, up, dd = [], [], []
        for w in poset.elements():
            ds = poset.dists_from(w, UP)
            lo.extend([w] * len(ds))
            up.extend(ds.keys())
            dd.extend(ds.values())
        cached = (np.array(lo, dtype=np.int64), np.array(up, dtype=np.int64), np.array(dd, dtype=np.int64))
        poset._pair_arrays = cached
    return cached


def _label_array(poset: Poset, labels) -> np.ndarray:
    if isinstance(labels, (list, tuple, np.ndarray)):
        return np.asarray(labels, dtype=np.int8)
    g = _bits(labels)
    return np.array([g(x) for x in poset.elements()], dtype=np.int8)


def _violations(poset: Poset, labels):
    lo, up, dd = comparable_arrays(poset)
    lab = _label_array(poset, labels)
    hit = (lab[lo] == 1) & (lab[up] == 0)
    return lo[hit], up[hit], dd[hit]


def violation_graph_edges(poset: Poset, labels, k: int) -> list[tuple[int, int, int]]:
    """``(upper, lower, dist)`` for every violated pair at distance >= k."""
    lo, up, dd = _violations(poset, labels)
    keep = dd >= k
    return list(zip(up[keep].tolist(), lo[keep].tolist(), dd[keep].tolist()))


def stage_max_violation_dist(poset: Poset, labels) -> int:
    dd = _violations(poset, labels)[2]
    return int(dd.max()) if len(dd) else 0


# ---------------------------------------------------------------------------
# matchers for the global view: (poset, labels, k, stage, edges) -> partner dict


Matcher = Callable[[Poset, list, int, int, list], dict]


def greedy_matcher(order_seed: Optional[int] = None) -> Matcher:
    """Greedy matching over edges in (lower, upper) order, or a seeded shuffle of it."""

    def match(poset, labels, k, stage, edges):
        pairs = sorted((w, v) for v, w, _ in edges)
        if order_seed is not None:
            random.Random(derive_seed(order_seed, stage)).shuffle(pairs)
        return partner_map(greedy_matching_reference(pairs), poset.elements())

    return match


def adversarial_matcher() -> Matcher:
    """Greedy over the shortest violations first, latest IDs first."""

    def match(poset, labels, k, stage, edges):
        pairs = [(w, v) for v, w, _ in sorted(edges, key=lambda e: (e[2], -e[0], -e[1]))]
        return partner_map(greedy_matching_reference(pairs), poset.elements())

    return match


def lca_matcher(seed: int, config: SorterConfig = SorterConfig()) -> Matcher:
    """Matchings read off the matching LCA with the same stage tapes as LocalSorter."""

    def match(poset, labels, k, stage, edges):
        adj: dict = {x: [] for x in poset.elements()}
        for v, w, _ in edges:
            adj[v].append(w)
            adj[w].append(v)
        graph = _stage_graph(poset, lambda x: adj[x])
        lca = MatchingLCA(graph, _stage_tape(seed, stage, config), stage_tau(poset, config), stage, config.component_cap)
        try:
            return {x: (lca.partner(x) if adj[x] else x) for x in poset.elements()}
        except ComponentTooLarge as exc:
            raise StageFailure(stage, exc) from exc

    return match


def _stage_graph(poset: Poset, neighbors) -> WorkGraph:
    return WorkGraph(neighbors, degree_bound=poset.degree_bound, n_vertices=len(poset), key=poset.key, key_bound=poset.key_bound)


def _stage_tape(seed: int, stage: int, config: SorterConfig) -> RandomTape:
    return RandomTape(derive_seed(seed, stage), config.tape_mode, config.kwise)


def resolve_matcher(spec: Union[str, Matcher], seed: int = 0, config: SorterConfig = SorterConfig()) -> Matcher:
    if callable(spec):
        return spec
    if spec == "greedy":
        return greedy_matcher()
    if spec == "shuffled":
        return greedy_matcher(seed)
    if spec == "adversarial":
        return adversarial_matcher()
    if spec == "lca":
        return lca_matcher(seed, config)
    raise ValueError(f"unknown matcher {spec!r}")


@dataclass
class StageRecord:
    stage: int
    k: int
    labels_before: list
    matched_pairs: int
    max_violation_after: int


@dataclass
class SortResult:
    labels: list
    stages: list = field(default_factory=list)


def global_sort(poset: Poset, f, matcher: Union[str, Matcher] = "greedy", seed: int = 0, config: SorterConfig = SorterConfig(), trace: bool = False) -> SortResult:
    """Sort f over a materialised poset; monotone for any maximal matchings."""
    match = resolve_matcher(matcher, seed, config)
    g = _bits(f)
    labels = [g(x) for x in poset.elements()]
    h = poset.height
    result = SortResult(labels)
    for i in range(stage_count(h, config.extra_stage)):
        k = cutoff(h, i)
        edges = violation_graph_edges(poset, labels, k)
        lam = match(poset, labels, k, i, edges)
        pairs = {(v, w) for v, w, _ in edges}
        matched = [(x, y) for x, y in lam.items() if x < y]
        if not all((a, b) in pairs or (b, a) in pairs for a, b in matched) or any(lam[lam[x]] != x for x in lam):
            raise MatcherFailure(f"stage {i}: matcher returned pairs outside the violation graph")
        if not is_maximal_matching(matched, pairs):
            raise MatcherFailure(f"stage {i}: matching is not maximal")
        new = [labels[lam[x]] for x in poset.elements()]
        if trace:
            result.stages.append(StageRecord(i, k, labels, len(matched), stage_max_violation_dist(poset, new)))
        labels = new
    result.labels = labels
    return result


# ---------------------------------------------------------------------------
# local view


@dataclass
class QueryReport:
    element: int
    value: int
    label_probes: int
    poset_probes: int
    tape_reads: int
    stage_breakdown: list

    def as_dict(self) -> dict:
        return {
            "element": self.element,
            "value": self.value,
            "poset_probes": self.poset_probes,
            "label_probes": self.label_probes,
            "tape_bits": 64 * self.tape_reads,
            "stage_breakdown": self.stage_breakdown,
        }


class LocalSorter:
    """LCA for the sorted labeling, fixed by (poset, f, seed, config).

    Caches are keyed by (stage, element) and only save work: answers do not
    depend on which queries came before.
    """

    def __init__(self, poset: Poset, f: Union[LabelOracle, Callable[[int], int]], seed: int, config: SorterConfig = SorterConfig()):
        self.poset = poset
        self.f = LabelOracle.from_array(f) if isinstance(f, (list, tuple)) else f
        self.seed = seed
        self.config = config
        self.height = poset.height
        self.n_stages = stage_count(self.height, config.extra_stage)
        self.tau = stage_tau(poset, config) if self.n_stages else 0
        self._values: list[dict] = [{} for _ in range(self.n_stages + 1)]
        self._partners: list[dict] = [{} for _ in range(self.n_stages)]
        self._bnbrs: list[dict] = [{} for _ in range(self.n_stages)]
        self._explored: dict = {}
        self.tapes = [_stage_tape(seed, i, config) for i in range(self.n_stages)]
        self.matchers = [
            MatchingLCA(_stage_graph(poset, self._neighbor_fn(i)), self.tapes[i], self.tau, i, config.component_cap)
            for i in range(self.n_stages)
        ]

    def _neighbor_fn(self, stage: int):
        return lambda x: self.violation_neighbors(stage, x)

    def _comparables(self, x: int, direction: int) -> dict:
        d = self.poset.dists_from(x, direction)
        self._explored[(x, direction)] = len(d) + 1
        return d

    def value(self, stage: int, x: int) -> int:
        """Label of x after ``stage`` stages (stage 0 is the input)."""
        memo = self._values[stage]
        bit = memo.get(x)
        if bit is None:
            if stage == 0:
                bit = int(self.f(x))
            else:
                bit = self.value(stage - 1, self.partner(stage - 1, x))
            memo[x] = bit
        return bit

    def violation_neighbors(self, stage: int, x: int) -> tuple:
        memo = self._bnbrs[stage]
        out = memo.get(x)
        if out is None:
            k = cutoff(self.height, stage)
            bit = self.value(stage, x)
            comps = self._comparables(x, UP if bit == 1 else DOWN)
            out = memo[x] = tuple(sorted(y for y, d in comps.items() if d >= k and self.value(stage, y) != bit))
        return out

    def partner(self, stage: int, x: int) -> int:
        memo = self._partners[stage]
        y = memo.get(x)
        if y is None:
            if not self.violation_neighbors(stage, x):
                y = x
            else:
                try:
                    y = self.matchers[stage].partner(x)
                except ComponentTooLarge as exc:
                    raise StageFailure(stage, exc) from exc
            memo[x] = y
        return y

    def query(self, x: int) -> int:
        return self.value(self.n_stages, x)

    def readout(self, elements: Optional[Iterable[int]] = None) -> list[int]:
        return [self.query(x) for x in (self.poset.elements() if elements is None else elements)]

    def report(self, x: int, value: int) -> QueryReport:
        stages = []
        for i in range(self.n_stages):
            m = self.matchers[i]
            stages.append(
                {
                    "stage": i,
                    "k": cutoff(self.height, i),
                    "label_evals": len(self._values[i]),
                    "partner_queries": len(self._partners[i]),
                    "violation_neighbor_queries": len(self._bnbrs[i]),
                    "line_vertices_simulated": m.mis.simulated,
                    "largest_undecided_component": m.mis.largest_component,
                    "tape_reads": self.tapes[i].reads,
                }
            )
        return QueryReport(
            element=x,
            value=value,
            label_probes=len(self._values[0]),
            poset_probes=sum(self._explored.values()),
            tape_reads=sum(t.reads for t in self.tapes),
            stage_breakdown=stages,
        )


def local_sort_query(poset: Poset, f, x: int, master_seed: int, config: SorterConfig = SorterConfig()) -> int:
    return LocalSorter(poset, f, master_seed, config).query(x)


def probe_query(poset: Poset, f, x: int, master_seed: int, config: SorterConfig = SorterConfig()) -> QueryReport:
    """Answer one query from cold caches and report what it read."""
    sorter = LocalSorter(poset, f, master_seed, config)
    return sorter.report(x, sorter.query(x))


def extracted_matchings(sorter: LocalSorter) -> list[dict]:
    """Per-stage partner maps read off a LocalSorter over the whole poset."""
    return [{x: sorter.partner(i, x) for x in sorter.poset.elements()} for i in range(sorter.n_stages)]
