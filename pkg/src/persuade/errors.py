"""Exception hierarchy shared by all solver modules."""


class PersuadeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PersuadeError):
    """Input data violates a documented invariant."""


class DegenerateInstanceError(ValidationError):
    """Receiver payoffs are degenerate; carries the violating subset."""

    def __init__(self, subset):
        self.subset = tuple(subset)
        super().__init__(
            f"payoff vectors of receivers {self.subset} are linearly dependent"
        )


class SolverError(PersuadeError):
    """An LP backend failed or returned an unusable status."""


class CapExceededError(PersuadeError):
    """A documented size cap (variables, cells, grid points, ...) was exceeded."""


class UnsupportedObjectiveError(PersuadeError):
    """No strategy applies to this set-function kind / flag combination."""
