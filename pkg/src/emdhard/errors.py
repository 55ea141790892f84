"""Exception hierarchy shared by every module.

The CLI maps these onto process exit codes: parameter and shape errors are
usage errors (2), invariant violations are internal failures (3).
"""


class EmdHardError(Exception):
    """Base class for all library errors."""


class InstanceShapeError(EmdHardError, ValueError):
    """Dimensions, sizes or coordinate ranges do not fit the operation."""


class ParameterError(EmdHardError, ValueError):
    """A scalar parameter (rho, k, alpha, ...) is out of its domain."""


class ArithmeticCapacityError(EmdHardError, OverflowError):
    """A value exceeds the documented integer width."""


class CapacityError(EmdHardError):
    """An exhaustive oracle was asked to enumerate beyond its size cap."""


class InconsistencyError(EmdHardError):
    """A cost identity that must hold did not (signals a broken input value)."""


class InvariantViolation(EmdHardError, AssertionError):
    """An internal invariant failed; this is a bug, never a user error."""


class PromiseViolation(EmdHardError):
    """A promise problem's guarantee does not hold on the given instance.

    ``partial`` carries whatever sound answers were found before the
    shortfall was detected.
    """

    def __init__(self, message: str, partial=()):
        super().__init__(message)
        self.partial = tuple(partial)
