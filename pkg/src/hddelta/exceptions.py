"""Exception hierarchy shared by the library and the CLI."""


class HDDeltaError(Exception):
    """Base class for all library errors."""


class DimensionError(HDDeltaError, ValueError):
    """Inputs have incompatible or empty shapes."""


class DegenerateError(HDDeltaError, ArithmeticError):
    """A numerical quantity hit a degeneracy guard (zero scale, singular system)."""


class RankError(DegenerateError):
    """A least-squares system is rank deficient."""


class DomainError(HDDeltaError, ValueError):
    """An argument lies outside the domain an operation is defined on."""
