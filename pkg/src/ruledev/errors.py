"""Exception types shared across the package."""


class RuledevError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(RuledevError, ValueError):
    """A parameter lies outside the domain an operation is defined on."""


class ValidationError(RuledevError, ValueError):
    """Input data violates a structural precondition (schema, degeneracy, ...)."""


class SingularSystemError(RuledevError):
    """A linear system is singular; `indices` names the offending entries."""

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)


class DegenerateGeometryError(RuledevError):
    """Geometry is too degenerate to continue (zero chord, vanishing normal, ...)."""


class SolverError(RuledevError):
    """The optimizer hit a non-recoverable state; `iterate` is the offending point."""

    def __init__(self, message, iterate=None):
        super().__init__(message)
        self.iterate = iterate
