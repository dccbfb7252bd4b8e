"""Run configuration. Every number a run depends on lives here and is hashed into reports."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SorterConfig:
    # tau = ceil(4 * c * log2(line_degree + 2)); c is raised when delta demands it
    c: float = 2.0
    max_component: Optional[int] = 4096
    tape_mode: str = "prf"
    kwise: int = 16
    delta: float = 0.1
    extra_stage: bool = False
    # no cap on undecided components: certainty instead of bounded locality
    fallback_global: bool = False

    @property
    def component_cap(self) -> Optional[int]:
        return None if self.fallback_global else self.max_component


@dataclass(frozen=True)
class TesterConfig:
    __test__ = False

    # Hoeffding additive error and failure probability of one estimate
    poset_additive: float = 0.005
    cube_additive: float = 0.005
    estimate_failure: float = 0.1
    poset_threshold: float = 0.99
    cube_threshold: float = 0.992
    close_factor: float = 0.49
    cube_truncation: float = 0.005
    max_retries: int = 3
    trials_delta: float = 1 / 3

    def repetitions(self, trials_delta: Optional[float] = None) -> int:
        """Odd number 2t+1 of runs for a majority vote, t = ceil(18 ln(1/delta))."""
        d = self.trials_delta if trials_delta is None else trials_delta
        if d >= 1 / 3:
            return 1
        return 2 * math.ceil(18 * math.log(1 / d)) + 1


@dataclass(frozen=True)
class LearnerConfig:
    """Low-degree learner constants, fixed by scripts/calibrate_learner.py.

    degree d = min(n, ceil(degree_mult * sqrt(n) / eps)), raised to the next
    odd number when ``odd_degree`` (even top degrees hurt sign rounding on
    threshold-like targets in calibration); the recommended
    sample size is ceil(sample_mult * (#coefficients) / eps), and fewer than
    ``min_sample_ratio * #coefficients`` samples is refused.
    """

    version: str = "2026.10-b"
    degree_mult: float = 0.012
    max_degree: Optional[int] = None
    odd_degree: bool = True
    sample_mult: float = 4.0
    min_sample_ratio: float = 2.0
    accuracy_divisor: float = 10.0
    max_retries: int = 3


@dataclass(frozen=True)
class RunConfig:
    sorter: SorterConfig = field(default_factory=SorterConfig)
    tester: TesterConfig = field(default_factory=TesterConfig)
    learner: LearnerConfig = field(default_factory=LearnerConfig)

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]
