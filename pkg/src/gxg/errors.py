"""Exception types shared across the package."""

from __future__ import annotations


class GxgError(Exception):
    """Base class for all errors raised by this package."""


class GraphError(GxgError, ValueError):
    """A graph violates one of its structural invariants."""


class DuplicatePort(GraphError):
    pass


class UnknownNodeInEdge(GraphError):
    pass


class UnlabeledNode(GraphError):
    pass


class UnknownNode(GraphError, KeyError):
    def __str__(self) -> str:  # KeyError would otherwise repr() the message
        return str(self.args[0]) if self.args else ""


class SizeLimitExceeded(GxgError):
    pass


class CloneOfPort(GxgError, ValueError):
    pass


class CloneOfUnknownNode(GxgError, ValueError):
    pass


class TypeMismatch(GxgError, ValueError):
    pass


class BadChoice(GxgError, ValueError):
    pass


class InvalidAddress(GxgError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class NoTreeWithinDepth(GxgError):
    pass


class GrammarError(GxgError, ValueError):
    """A grammar is ill-formed; ``diagnostics`` lists every problem found."""

    def __init__(self, message: str, diagnostics: list | None = None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


class GrammarNotNormalized(GxgError):
    pass


class NoWitnessStored(GxgError):
    pass


class FormatError(GxgError, ValueError):
    """Malformed on-disk input (bad JSON or schema violation)."""
