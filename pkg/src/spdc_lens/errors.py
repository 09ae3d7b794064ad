class ValidationError(ValueError):
    """Invalid input: bad parameters, malformed files, violated preconditions."""


class ConvergenceError(RuntimeError):
    """A numerical routine failed to reach its configured tolerance."""


class NoInteriorMaximum(ConvergenceError):
    """The objective has no maximum strictly inside the search interval."""
