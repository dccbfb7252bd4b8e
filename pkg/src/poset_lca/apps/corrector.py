"""Monotonicity correction: point queries to a sorted copy of f."""
from __future__ import annotations

from typing import Callable, Optional, Union

from ..config import SorterConfig
from ..errors import StageFailure
from ..labeling import _bits
from ..poset import Poset
from ..sorter import LocalSorter, global_sort, local_sort_query
from ..tape import derive_seed

ENGINES = ("local", "global")


def correct(poset: Poset, f, x: int, master_seed: int, config: SorterConfig = SorterConfig()) -> int:
    """Corrected label of x. The full read-out is monotone, keeps the number
    of ones, is within twice the distance of f to monotone, and is no farther
    than f from any monotone labeling."""
    return local_sort_query(poset, f, x, master_seed, config)


def corrected_labels(
    poset: Poset,
    f,
    master_seed: int,
    config: SorterConfig = SorterConfig(),
    engine: str = "local",
    matcher: str = "shuffled",
) -> Callable[[int], int]:
    """Point-query handle on the corrected labeling for one seed.

    ``engine="global"`` runs every stage over the whole (materialised) poset
    with ``matcher``; it is the fast path on dense violation graphs.
    """
    if engine == "local":
        return LocalSorter(poset, f, master_seed, config).query
    if engine == "global":
        labels = global_sort(poset, f, matcher, master_seed, config).labels
        return labels.__getitem__
    raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")


def with_retries(run: Callable[[int], object], master_seed: int, max_retries: int = 3):
    """Call ``run(seed)``, moving to a fresh derived seed after each StageFailure.

    Returns ``(result, seed_used, failures)``; re-raises after ``max_retries``
    retries.
    """
    seed = master_seed
    failures = 0
    while True:
        try:
            return run(seed), seed, failures
        except StageFailure:
            failures += 1
            if failures > max_retries:
                raise
            seed = derive_seed(master_seed, 0xC0, failures)


def correct_all(poset: Poset, f, master_seed: int, config: SorterConfig = SorterConfig(), engine: str = "local", matcher: str = "shuffled", max_retries: int = 3):
    """Whole corrected labeling as a list, with StageFailure retries."""

    def run(seed):
        q = corrected_labels(poset, f, seed, config, engine, matcher)
        return [q(x) for x in poset.elements()]

    return with_retries(run, master_seed, max_retries)
