"""Exception hierarchy.

Domain/validation problems derive from :class:`DomainError` (CLI exit 1);
numeric and solver failures derive from :class:`NumericError` (CLI exit 2).
"""


class GridsimError(Exception):
    pass


class DomainError(GridsimError, ValueError):
    pass


class ValidationError(DomainError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TopologyError(DomainError):
    pass


class NumericError(GridsimError, ArithmeticError):
    pass


class ConvergenceError(NumericError):
    """Iterative solver gave up. ``history`` holds the residual per iteration."""

    def __init__(self, message, residual=None, history=None):
        super().__init__(message)
        self.residual = residual
        self.history = list(history) if history is not None else []


class DivergenceError(NumericError):
    pass
