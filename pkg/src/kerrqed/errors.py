"""Error and warning types shared across the library."""


class KerrQEDError(Exception):
    """Base class for library-specific failures."""


class NumericalError(KerrQEDError):
    """A numerical routine failed to meet its accuracy contract."""


class GridResolutionError(NumericalError):
    """Root bracketing could not resolve adjacent sign changes."""


class DegenerateSteadyStateError(NumericalError):
    """Liouvillian null space has dimension > 1.

    Carries the two offending (vectorized) basis candidates in ``basis``.
    """

    def __init__(self, message, basis=None):
        super().__init__(message)
        self.basis = basis


class ConvergenceWarning(UserWarning):
    """Result changed by more than tolerance under refinement."""


class BranchTrackingWarning(UserWarning):
    """Branch continuation made an ambiguous jump between grid points."""


class CoarseGridWarning(UserWarning):
    """Grid too coarse to resolve the feature being measured."""
