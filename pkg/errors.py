"""
Exception hierarchy shared by the services.

Services raise, command handlers catch per row, cli.main() catches the rest.
"""
from typing import Optional, Sequence


class SinrError(Exception):
    """Root of every error raised by this package."""


class DomainError(SinrError, ValueError):
    pass


class SimplexViolation(DomainError):
    pass


class SingularityError(DomainError):
    pass


class UnsupportedDimension(SinrError):
    pass


class IntegrationError(SinrError):
    def __init__(self, message: str, point: Optional[Sequence[float]] = None):
        super().__init__(message)
        self.point = point


class ConvergenceError(SinrError):
    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


class EvaluationError(SinrError):
    pass


class BudgetError(SinrError):
    pass


class ScenarioError(SinrError):
    pass
