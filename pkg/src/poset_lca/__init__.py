"""Local computation algorithms for sorting 0/1 labels on posets, with monotonicity applications."""
from .config import LearnerConfig, RunConfig, SorterConfig, TesterConfig
from .errors import (
    ComponentTooLarge,
    CycleError,
    InsufficientSamples,
    MatcherFailure,
    PosetError,
    RedundantEdgeError,
    SizeError,
    StageFailure,
    UnknownEdge,
)
from .labeling import LabelOracle, distance_to_monotone_exact, is_monotone, labeling_distance
from .poset import CubePoset, Poset, build_poset, hypercube, truncated_hypercube
from .sorter import LocalSorter, global_sort, local_sort_query, probe_query

__version__ = "0.1.0"
