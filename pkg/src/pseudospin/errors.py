"""Exception hierarchy shared by all modules."""


class PseudospinError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(PseudospinError, ValueError):
    """A matrix or vector has incompatible dimensions."""


class ShapeError(PseudospinError, ValueError):
    """A matrix violates a structural requirement (e.g. Hermiticity)."""


class DomainError(PseudospinError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ResourceError(PseudospinError, ValueError):
    """A request exceeds a configured size cap or numeric range."""


class UnsupportedParameterError(PseudospinError, ValueError):
    """A closed form was requested for parameters it does not cover."""


class SwitchSearchError(PseudospinError, RuntimeError):
    """No equal-magnitude kernel vector was found.

    The plain null-space basis is attached as ``null_space`` so callers
    can fall back to it.
    """

    def __init__(self, message, null_space):
        super().__init__(message)
        self.null_space = null_space
