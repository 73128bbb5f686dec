"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """Input violates a documented precondition."""


class UnphysicalStateError(InvalidInputError):
    """Covariance matrix violates the uncertainty principle.

    Attributes:
        eigenvalue: the offending Williamson eigenvalue (below 1).
    """

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class OutOfDomainError(ValueError):
    """Input is valid but outside the domain where the operation is defined."""


class NumericalFailureError(ArithmeticError):
    """A solver or construction failed to reach its residual target."""
