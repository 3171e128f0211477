"""Exception types shared across the package."""


class LPError(Exception):
    """Base class for all package errors."""


class StructuralError(LPError, ValueError):
    """Shapes, grids or component keys do not line up."""


class DomainError(LPError, ValueError):
    """A parameter lies outside the admissible range of an operation."""


class CoverError(LPError):
    """The interval cover violates one of its invariants.

    ``collisions`` holds pairs of ``(m, v)`` keys whose approximating
    intervals intersect inside a residue class.
    """

    def __init__(self, message, collisions=(), suggestion=None):
        if suggestion:
            message = f"{message} ({suggestion})"
        super().__init__(message)
        self.collisions = list(collisions)
        self.suggestion = suggestion


class ResolutionError(LPError):
    """Quadrature resolution is too coarse for the requested measurement."""


class ConfigError(LPError, ValueError):
    """An experiment configuration is malformed or violates a parameter constraint."""
