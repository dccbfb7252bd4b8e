"""Tolerant monotonicity testers.

Both testers correct f, estimate the disagreement fraction between f and its
correction from uniform samples, and accept when the estimate is at most a
fixed fraction of eps. Because the correction is within twice the distance
to monotone, a 0.49·eps-close input yields a true disagreement of at most
0.98·eps and an eps-far input at least eps; the thresholds sit in between
with room for the sampling error.
"""
from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..config import SorterConfig, TesterConfig
from ..labeling import _bits, hoeffding_samples
from ..poset import CubePoset, Poset, truncated_hypercube
from ..tape import derive_seed
from .corrector import corrected_labels, with_retries

ACCEPT, REJECT = "Accept", "Reject"

Sampler = Callable[[np.random.Generator, int], np.ndarray]


@dataclass
class TestVerdict:
    __test__ = False  # not a pytest class

    verdict: str
    estimate: float
    samples_used: int
    threshold: float
    run_estimates: list = field(default_factory=list)
    seeds: list = field(default_factory=list)
    failures: int = 0

    @property
    def accepted(self) -> bool:
        return self.verdict == ACCEPT

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "estimate": self.estimate,
            "samples_used": self.samples_used,
            "threshold": self.threshold,
            "runs": len(self.run_estimates),
            "run_estimates": self.run_estimates,
            "stage_failures": self.failures,
        }


def _check_eps(eps: float) -> None:
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def _vote(estimates: list, threshold: float, samples: int, seeds: list, failures: int) -> TestVerdict:
    # odd number of runs, so the median run decides the majority vote
    est = statistics.median(estimates)
    return TestVerdict(REJECT if est > threshold else ACCEPT, est, samples, threshold, estimates, seeds, failures)


def _disagreement(points: np.ndarray, f_at: Callable[[int], int], g_at: Callable[[int], int]) -> float:
    uniq, counts = np.unique(points, return_counts=True)
    bad = np.fromiter((f_at(int(p)) != g_at(int(p)) for p in uniq), dtype=bool, count=len(uniq))
    return float(counts[bad].sum()) / len(points)


def tolerant_test_poset(
    poset: Poset,
    f,
    eps: float,
    uniform_sampler: Optional[Sampler] = None,
    trials_delta: Optional[float] = None,
    seed: int = 0,
    config: TesterConfig = TesterConfig(),
    sorter_config: SorterConfig = SorterConfig(),
    engine: str = "local",
) -> TestVerdict:
    """Accept iff the estimated distance from f to its correction is <= 0.99·eps."""
    _check_eps(eps)
    elements = np.fromiter(poset.elements(), dtype=np.int64)
    sampler = uniform_sampler or (lambda rng, m: rng.choice(elements, size=m))
    m = hoeffding_samples(config.poset_additive * eps, config.estimate_failure)
    threshold = config.poset_threshold * eps
    g = _bits(f)
    estimates, seeds, failures = [], [], 0
    for r in range(config.repetitions(trials_delta)):
        run_seed = derive_seed(seed, r)
        points = sampler(np.random.default_rng(derive_seed(run_seed, 1)), m)

        def run(s):
            mon = corrected_labels(poset, f, s, sorter_config, engine)
            return _disagreement(points, g, mon)

        est, used, fails = with_retries(run, run_seed, config.max_retries)
        estimates.append(est)
        seeds.append(used)
        failures += fails
    return _vote(estimates, threshold, m * len(estimates), seeds, failures)


def tolerant_test_cube(
    n: int,
    f: Callable[[int], int],
    eps: float,
    trials_delta: Optional[float] = None,
    seed: int = 0,
    config: TesterConfig = TesterConfig(),
    sorter_config: SorterConfig = SorterConfig(),
    engine: str = "local",
) -> TestVerdict:
    """Tolerant tester on {0,1}^n; ``f`` maps bitmasks to bits.

    f is corrected on the weight band of the truncated cube for parameter
    ``cube_truncation·eps``; outside the band the correction is 1 above and 0
    below. Accept iff the estimate over uniform {0,1}^n is <= 0.992·eps.
    """
    _check_eps(eps)
    band = truncated_hypercube(n, config.cube_truncation * eps)
    on_band = lambda x: f(band.mask(x))
    m = hoeffding_samples(config.cube_additive * eps, config.estimate_failure)
    threshold = config.cube_threshold * eps
    estimates, seeds, failures = [], [], 0
    for r in range(config.repetitions(trials_delta)):
        run_seed = derive_seed(seed, r)
        points = np.random.default_rng(derive_seed(run_seed, 1)).integers(0, 1 << n, size=m)

        def run(s):
            mon = cube_extension(band, corrected_labels(band, on_band, s, sorter_config, engine))
            return _disagreement(points, f, mon)

        est, used, fails = with_retries(run, run_seed, config.max_retries)
        estimates.append(est)
        seeds.append(used)
        failures += fails
    return _vote(estimates, threshold, m * len(estimates), seeds, failures)


def cube_extension(band: CubePoset, on_band: Callable[[int], int]) -> Callable[[int], int]:
    """Extend a labeling of the band to all of {0,1}^n: 1 above it, 0 below."""
    lo, hi = band.lo, band.hi

    def ext(mask: int) -> int:
        w = mask.bit_count()
        if w > hi:
            return 1
        if w < lo:
            return 0
        return on_band(band.element(mask))

    return ext
