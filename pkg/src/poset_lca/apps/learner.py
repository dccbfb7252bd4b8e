"""Proper learning of monotone functions under the uniform distribution.

Pipeline: a low-degree Fourier learner gives a (possibly non-monotone)
hypothesis h at accuracy eps/10; h is corrected on the truncated cube for
parameter eps/10 with a fixed seed; outside the band the output is 1 above
and 0 below. The result is monotone whatever h is.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ..config import LearnerConfig, SorterConfig
from ..errors import InsufficientSamples, SizeError
from ..labeling import LabelOracle
from ..poset import truncated_hypercube
from ..sorter import LocalSorter, global_sort
from ..tape import derive_seed
from .corrector import with_retries
from .tester import cube_extension

MAX_LEARN_DIM = 16
MAX_CERTIFY_DIM = 14


def _parity(x: np.ndarray, s: np.ndarray) -> np.ndarray:
    """chi_S(x) in {+1, -1} for every pair of rows of x and entries of s."""
    odd = np.bitwise_count(np.bitwise_and.outer(x, s)) & 1
    return 1 - 2 * odd.astype(np.int8)


@dataclass
class LowDegreeModel:
    n: int
    degree: int
    subsets: np.ndarray
    coeffs: np.ndarray

    def score(self, masks) -> np.ndarray:
        x = np.atleast_1d(np.asarray(masks, dtype=np.int64))
        out = np.empty(len(x))
        for a in range(0, len(x), 4096):
            out[a:a + 4096] = _parity(x[a:a + 4096], self.subsets) @ self.coeffs
        return out

    def predict(self, masks) -> np.ndarray:
        # the +-1 encoding maps label 1 to -1
        return (self.score(masks) < 0).astype(np.int8)

    def table(self) -> np.ndarray:
        return self.predict(np.arange(1 << self.n))


def degree_for(n: int, eps: float, config: LearnerConfig = LearnerConfig()) -> int:
    d = math.ceil(config.degree_mult * math.sqrt(n) / eps)
    if config.odd_degree and d % 2 == 0:
        d += 1
    if config.max_degree is not None:
        d = min(d, config.max_degree)
    return max(1, min(n, d))


def coefficient_count(n: int, degree: int) -> int:
    return sum(math.comb(n, i) for i in range(degree + 1))


def recommended_samples(n: int, eps: float, config: LearnerConfig = LearnerConfig()) -> int:
    """Sample size for the full pipeline at accuracy eps (improper step at eps/divisor)."""
    inner = eps / config.accuracy_divisor
    return math.ceil(config.sample_mult * coefficient_count(n, degree_for(n, inner, config)) / inner)


def _as_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(samples, tuple) and len(samples) == 2 and isinstance(samples[0], np.ndarray):
        x, y = samples
    else:
        pairs = list(samples)
        x = np.array([p for p, _ in pairs], dtype=np.int64)
        y = np.array([b for _, b in pairs], dtype=np.int8)
    return np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int8)


def draw_samples(target: Callable[[int], int], n: int, m: int, seed: int, noise: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """m uniform points with labels from target, each flipped independently w.p. ``noise``."""
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 1 << n, size=m)
    y = np.fromiter((target(int(p)) for p in x), dtype=np.int8, count=m)
    if noise:
        y ^= (rng.random(m) < noise).astype(np.int8)
    return x, y


def improper_learn_lowdegree(samples, n: int, eps: float, config: LearnerConfig = LearnerConfig()) -> LabelOracle:
    """Sign of the empirical Fourier expansion truncated at degree d.

    Returns a LabelOracle over bitmasks; the fitted model is at ``.model``.
    """
    if not 1 <= n <= MAX_LEARN_DIM:
        raise SizeError(f"low-degree learner supports 1 <= n <= {MAX_LEARN_DIM}, got {n}")
    x, y = _as_arrays(samples)
    d = degree_for(n, eps, config)
    subsets = np.array([sum(1 << i for i in c) for k in range(d + 1) for c in combinations(range(n), k)], dtype=np.int64)
    need = math.ceil(config.min_sample_ratio * len(subsets))
    if len(x) < need:
        raise InsufficientSamples(f"degree {d} needs at least {need} samples for {len(subsets)} coefficients, got {len(x)}")
    signs = 1 - 2 * y.astype(np.float64)
    coeffs = np.zeros(len(subsets))
    for a in range(0, len(x), 4096):
        coeffs += signs[a:a + 4096] @ _parity(x[a:a + 4096], subsets)
    model = LowDegreeModel(n, d, subsets, coeffs / len(x))
    table = model.table()
    oracle = LabelOracle(table.__getitem__, descriptor=f"lowdeg(n={n},d={d})")
    oracle.model = model
    oracle.values = table
    return oracle


@dataclass
class LearnerOutput:
    evaluator: LabelOracle
    n: int
    eps: float
    master_seed: int
    seed_used: int
    truncation: float
    band: tuple
    degree: int
    improper: LabelOracle
    monotone_certified: bool = False
    stage_failures: int = 0
    table: Optional[np.ndarray] = field(default=None, repr=False)

    def __call__(self, mask: int) -> int:
        return self.evaluator(mask)

    def summary(self) -> dict:
        return {
            "n": self.n,
            "eps": self.eps,
            "master_seed": self.master_seed,
            "seed_used": self.seed_used,
            "truncation": self.truncation,
            "band": list(self.band),
            "degree": self.degree,
            "monotone_certified": self.monotone_certified,
            "stage_failures": self.stage_failures,
        }


def monotone_table(table: np.ndarray, n: int) -> bool:
    """Exhaustive check over all cube edges of a truth table indexed by bitmask."""
    idx = np.arange(1 << n)
    for i in range(n):
        low = idx[(idx >> i & 1) == 0]
        if np.any(table[low] > table[low | (1 << i)]):
            return False
    return True


def _learn(samples, n: int, eps: float, master_seed: int, config: LearnerConfig, sorter_config: SorterConfig, engine: str) -> LearnerOutput:
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    inner = eps / config.accuracy_divisor
    h = improper_learn_lowdegree(samples, n, inner, config)
    band = truncated_hypercube(n, inner)
    on_band = LabelOracle(lambda x: h.peek(band.mask(x)), descriptor="improper-on-band")

    def run(seed):
        if engine == "global":
            labels = global_sort(band, [on_band(x) for x in band.elements()], "lca", seed, sorter_config).labels
            query = labels.__getitem__
        else:
            query = LocalSorter(band, on_band, seed, sorter_config).query
        ext = cube_extension(band, query)
        table = None
        if n <= MAX_CERTIFY_DIM:
            # forces every stage failure to surface now rather than at query time
            table = np.fromiter((ext(m) for m in range(1 << n)), dtype=np.int8, count=1 << n)
        return ext, table

    (ext, table), used, failures = with_retries(run, master_seed, config.max_retries)
    evaluator = LabelOracle(table.__getitem__ if table is not None else ext, descriptor="monotone-hypothesis")
    return LearnerOutput(
        evaluator=evaluator,
        n=n,
        eps=eps,
        master_seed=master_seed,
        seed_used=used,
        truncation=inner,
        band=(band.lo, band.hi),
        degree=h.model.degree,
        improper=h,
        monotone_certified=table is not None and monotone_table(table, n),
        stage_failures=failures,
        table=table,
    )


def learn_monotone_proper(samples, n: int, eps: float, master_seed: int, config: LearnerConfig = LearnerConfig(), sorter_config: SorterConfig = SorterConfig(), engine: str = "local") -> LearnerOutput:
    """Monotone hypothesis within eps of a monotone target, from uniform samples."""
    return _learn(samples, n, eps, master_seed, config, sorter_config, engine)


def learn_monotone_agnostic(samples, n: int, eps: float, master_seed: int, config: LearnerConfig = LearnerConfig(), sorter_config: SorterConfig = SorterConfig(), engine: str = "local") -> LearnerOutput:
    """Same pipeline on noisy labels; the target error is 3·opt + eps."""
    return _learn(samples, n, eps, master_seed, config, sorter_config, engine)
