"""Exception types shared across the package."""


class PosetError(ValueError):
    pass


class CycleError(PosetError):
    pass


class RedundantEdgeError(PosetError):
    pass


class SizeError(ValueError):
    """Requested object exceeds the configured size budget."""


class ComponentTooLarge(RuntimeError):
    def __init__(self, vertex, size, cap):
        super().__init__(f"undecided component around {vertex!r} exceeds cap {cap} (reached {size})")
        self.vertex = vertex
        self.size = size
        self.cap = cap


class StageFailure(RuntimeError):
    def __init__(self, stage, cause=None):
        super().__init__(f"matching LCA failed at stage {stage}" + (f": {cause}" if cause else ""))
        self.stage = stage
        self.cause = cause


class MatcherFailure(RuntimeError):
    pass


class UnknownEdge(KeyError):
    pass


class InsufficientSamples(ValueError):
    pass
