"""Exception types shared across the package."""


class GraphKmsError(Exception):
    """Base class for all errors raised by this package."""


class InputError(GraphKmsError):
    """Malformed or inconsistent input: unknown ids, bad files, bad parameters."""


class CompositionError(GraphKmsError):
    """Paths whose endpoints do not match were composed."""


class UnsupportedPathError(GraphKmsError):
    """A numeric operation was applied to a path through an edge bundle."""


class InfiniteEnumerationError(GraphKmsError):
    """Path enumeration ran into an infinite edge bundle."""


class NotExpandableError(GraphKmsError):
    """Vertex projection expansion requested at a singular source vertex."""


class DecompositionError(GraphKmsError):
    """Core decomposition input outside the requested level budget."""


class PreconditionError(GraphKmsError):
    """A documented hypothesis of the requested operation is violated."""


class EnumerationCapError(GraphKmsError):
    """Extreme-point enumeration was requested above the configured cap."""


class ParseError(InputError):
    """Text could not be parsed; carries a position when known."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position
