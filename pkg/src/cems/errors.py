"""Exception types shared across the package."""


class CemsError(Exception):
    """Base class for all package errors."""


class InputError(CemsError, ValueError):
    """Malformed or physically inconsistent input."""


class StateError(CemsError, RuntimeError):
    """An operation was called on an object in the wrong state."""


class InfeasibleError(CemsError, RuntimeError):
    """A model has no feasible point.

    ``attribution`` maps constraint-group names to their phase-1 violation.
    """

    def __init__(self, message, attribution=None):
        super().__init__(message)
        self.attribution = dict(attribution or {})


class ResourceLimitError(CemsError, RuntimeError):
    """Iteration or node limit exceeded."""

    def __init__(self, message, incumbent=None, bound=None):
        super().__init__(message)
        self.incumbent = incumbent
        self.bound = bound
