"""Exception hierarchy shared by the library and the CLI."""


class CyclochronError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class UsageError(CyclochronError, ValueError):
    """Invalid combination of arguments (CLI exit code 2)."""

    exit_code = 2


class ParseError(CyclochronError, ValueError):
    """Malformed input file."""


class ConflictError(CyclochronError, ValueError):
    """Duplicate identifiers in a table or ensemble."""


class DomainError(CyclochronError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class UnsupportedError(CyclochronError, ValueError):
    """Operation is not defined for this kind of input (e.g. a massless particle)."""


class PhysicalValidityError(CyclochronError, ValueError):
    """A modulation would drive a clock to non-positive energy."""


class ResolutionError(CyclochronError, ValueError):
    """Sampled data are too coarse to resolve the requested structure."""


class AliasingError(CyclochronError, ValueError):
    """Sampling step is commensurate with, or too close to, the clock period."""


class NotFoundError(CyclochronError, LookupError):
    """A search hit its horizon without finding a solution."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
