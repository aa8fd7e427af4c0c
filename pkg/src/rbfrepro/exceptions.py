"""Exception types raised by rbfrepro."""


class RBFError(Exception):
    """Base class for all errors raised by this package."""


class ContractError(RBFError, ValueError):
    """Arguments violate a documented precondition (shape, size, finiteness)."""


class DomainError(ContractError):
    """A value lies outside the domain an operation accepts."""


class ParseError(RBFError, ValueError):
    """A data, model or config file could not be parsed."""


class AssemblyError(RBFError, ArithmeticError):
    """A design matrix entry came out non-finite."""


class SingularSystemError(RBFError, ArithmeticError):
    """The normal system could not be solved even after ridge escalation.

    Attributes
    ----------
    condition_estimate : float
        Rough condition number of the last factorization attempted.
    """

    def __init__(self, message, condition_estimate=float("inf")):
        super().__init__(message)
        self.condition_estimate = condition_estimate
