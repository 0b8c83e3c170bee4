"""Exception hierarchy shared by all modules.

The CLI maps :class:`NumericalError` subclasses to exit status 3 and
``ValueError`` subclasses raised during configuration to exit status 2.
"""


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class NumericalError(ArithmeticError):
    """Base class for failures of a numerical method on valid input."""


class AccuracyError(NumericalError):
    """A method could not reach its documented accuracy."""


class ConvergenceError(NumericalError):
    """An iterative method exceeded its iteration budget."""


class IllConditionedError(NumericalError):
    """A matrix is too close to singular for the requested operation.

    The estimated condition number is kept on ``condition``.
    """

    def __init__(self, message: str, condition: float = float("inf")):
        super().__init__(message)
        self.condition = condition
