"""Exception types raised by the library."""


class PDMError(Exception):
    """Base class for library errors."""


class DomainError(PDMError, ValueError):
    """A position lies outside the declared domain of a mass profile."""


class SingularityError(PDMError, ValueError):
    """A quantity divides by a vanishing mass at some grid node."""

    def __init__(self, message, nodes=(), positions=()):
        super().__init__(message)
        self.nodes = tuple(int(i) for i in nodes)
        self.positions = tuple(float(x) for x in positions)


class PreconditionError(PDMError, ValueError):
    """An operation was called with inputs violating its preconditions."""


class EigenSolveError(PDMError, RuntimeError):
    """The eigensolver failed or returned pairs violating the residual contract."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state or {}


class IntegrationError(PDMError, RuntimeError):
    """Adaptive integration failed, typically through step-size collapse."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location
