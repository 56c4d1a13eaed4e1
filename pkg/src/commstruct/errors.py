"""Exception types raised across the package."""


class CommStructError(Exception):
    """Base class for all errors raised by commstruct."""


class ParseError(CommStructError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyGraphError(CommStructError, ValueError):
    """The input produced a graph without a single edge."""


class DomainError(CommStructError, ValueError):
    """A quantity is undefined for the given arguments (zero volume, m = 0, ...)."""


class OracleRefusal(CommStructError, ValueError):
    """An exhaustive oracle was asked to run on an instance above its size limit."""
