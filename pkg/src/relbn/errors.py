"""Exception types shared across the package."""


class RelbnError(Exception):
    """Base class for all package errors."""


class NetworkFormatError(RelbnError):
    """A network or evidence file could not be parsed."""


class NetworkValidationError(RelbnError):
    """A network or query failed validation."""


class CycleError(NetworkValidationError):
    """The arc relation contains a directed cycle."""

    def __init__(self, arc):
        self.arc = arc
        super().__init__(f"cycle through arc {arc[0]} -> {arc[1]}")


class ZeroProbabilityEvidenceError(RelbnError):
    """The observed evidence has probability zero under the model."""


class EvidenceContradictionError(ZeroProbabilityEvidenceError):
    """Evidence propagation derived a contradiction at a specific node."""

    def __init__(self, node, message=None):
        self.node = node
        super().__init__(message or f"evidence is contradictory at node {node}")


class StateSpaceLimitError(RelbnError):
    """An exhaustive computation would exceed its configured ceiling."""


class PosteriorMismatchError(RelbnError):
    """Two exact computations of the same posterior disagreed."""
