"""Error types raised by the library.

Every error derives from ``UserException`` so the entry points can report it
as a user-facing failure and exit with status 1.
"""

from keboola.component.exceptions import UserException


class QmcError(UserException):
    """Base class of all domain errors."""


class InvalidArgumentError(QmcError, ValueError):
    pass


class InvalidSpecError(InvalidArgumentError):
    pass


class CapacityError(QmcError, OverflowError):
    pass


class ShapeError(QmcError, ValueError):
    pass


class IntegrandEvaluationError(QmcError, RuntimeError):
    def __init__(self, message: str, index=None):
        super().__init__(message)
        self.index = index


class InsufficientDataError(QmcError, ValueError):
    pass


class InvalidIntervalError(QmcError, ValueError):
    pass


class PropagationError(QmcError, ValueError):
    def __init__(self, message: str, qoi_index=None):
        super().__init__(message)
        self.qoi_index = qoi_index


class MetricEvaluationError(QmcError, ArithmeticError):
    pass


class NoEstimateError(QmcError, ValueError):
    pass


class DependencyStructureError(QmcError, ValueError):
    pass


class AccountingError(QmcError, RuntimeError):
    pass


class UsageError(QmcError):
    pass


class ReportWriteError(QmcError, OSError):
    pass
