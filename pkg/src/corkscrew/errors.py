"""Exception hierarchy shared across the library."""


class CorkscrewError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CorkscrewError):
    """A complex or endomorphism violates one of its structural invariants."""


class ParseError(CorkscrewError):
    """Malformed input file.  Carries a line/column when one is known."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class InconsistentSystem(CorkscrewError):
    """A linear system over F2 has no solution."""


class NoInvolutionError(CorkscrewError):
    """No skew chain map squaring to the Sarkar map exists on the complex."""


class SearchCapExceeded(CorkscrewError):
    """An enumeration-backed solver hit its configured size cap."""


class WindowUnstableError(CorkscrewError):
    """Enlarging the homology truncation window changed the answer."""


class GradingParityError(CorkscrewError):
    """A numerical invariant landed on an odd grading where the -1/2
    normalisation is ambiguous."""


class ConsistencyError(CorkscrewError):
    """Two independent computation routes that must agree disagreed."""
