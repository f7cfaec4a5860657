"""Exception types shared across the package."""


class SchurOrderError(Exception):
    """Base class for all package errors."""


class DomainError(SchurOrderError, ValueError):
    """A value lies outside the domain of a function or operation."""


class NotDifferentiableError(DomainError):
    """A derivative was requested where the function has none."""


class NotAnalyticError(SchurOrderError, ValueError):
    """Taylor coefficients were requested from a non-analytic variant."""


class PreconditionError(SchurOrderError, ValueError):
    """Arguments violate a documented precondition."""


class SearchFailure(SchurOrderError, RuntimeError):
    """A witness search finished its scan without success (inconclusive)."""


class FnSpecError(SchurOrderError, ValueError):
    """Malformed function DSL text."""

    def __init__(self, text: str, pos: int, expected: str):
        self.text = text
        self.pos = pos
        self.expected = expected
        pointer = " " * pos + "^"
        super().__init__(f"at position {pos}: expected {expected}\n  {text}\n  {pointer}")
