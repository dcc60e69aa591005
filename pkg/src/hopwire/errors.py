class HopwireError(Exception):
    """Base class for all library errors."""


class GraphError(HopwireError, ValueError):
    """A graph violates a structural invariant."""


class DatasetError(HopwireError, ValueError):
    """A dataset file is malformed or internally inconsistent."""


class NumericalError(HopwireError, ArithmeticError):
    """Overflow, non-convergence, or non-finite values."""


class NotRecoverableError(HopwireError):
    """The original graph cannot be reconstructed from a rewired one."""
