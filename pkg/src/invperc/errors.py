class InvalidArgument(ValueError):
    pass


class DuplicateWeightError(ValueError):
    """Two edges carry the same weight; every construction here assumes injective weights."""


class DisconnectedGraphError(ValueError):
    pass


class ConsistencyError(RuntimeError):
    """An internal identity that must always hold was violated."""


class SamplingBudgetExceeded(RuntimeError):
    """A rejection sampler used up its proposal budget."""
