"""Exception types shared by all modules."""


class DomainError(ValueError):
    """An input violates a precondition (nonpositive coordinate, point
    outside the domain of a density, non-finite float, ...)."""


class BoundaryError(DomainError):
    """A point lies exactly on a partition boundary.

    The maps are undefined on these measure-zero sets; callers must
    either resample or abort, never pick a branch silently.
    """


class UnsupportedError(ValueError):
    """The requested operation is not defined for this algorithm
    (e.g. a bijectivity audit for an algorithm with no known dual cone)."""
