"""Exception types shared across the library."""


class ValidationError(ValueError):
    """An input violates a documented invariant (dimensions, bounds, signs)."""


class ScenarioParseError(ValueError):
    """A scenario document is malformed; the message names the offending field."""


class CapacityError(ValueError):
    """An exhaustive enumeration would exceed the supported instance size."""


class SolverFailureError(RuntimeError):
    """The relaxation solver did not reach the required accuracy.

    ``residuals`` carries the diagnostics achieved at the failed solve,
    when they could be computed.
    """

    def __init__(self, message: str, residuals=None):
        super().__init__(message)
        self.residuals = residuals
