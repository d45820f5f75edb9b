class MatDyadicError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(MatDyadicError, ValueError):
    """Malformed or out-of-domain input (bad shapes, parameters, files)."""


class NumericalError(MatDyadicError, ArithmeticError):
    """A numerical procedure failed: non-convergence, loss of definiteness."""


class NotPositiveDefiniteError(NumericalError):
    """A matrix required to be positive definite is not, at the PD floor."""
