"""
Exception hierarchy for geolab.

Every module raises one of these so the CLI can tell input mistakes,
exhausted budgets and failed searches apart from programming errors.
"""

from typing import Any, Optional


class GeolabError(Exception):
    """Base class for all geolab errors."""


class GeometryError(GeolabError, ValueError):
    """An input lies outside the domain of a geometric operation."""


class ConfigError(GeolabError, ValueError):
    """A configuration document or override could not be parsed or validated."""


class BudgetExceededError(GeolabError, RuntimeError):
    """An enumeration or doubling loop ran past its configured budget."""

    def __init__(self, message: str, budget: str, limit: int):
        super().__init__(f"{message} (budget '{budget}' = {limit})")
        self.budget = budget
        self.limit = limit


class GeolabWarning(UserWarning):
    """A result is valid but degraded (near ties, probe radius too large, missed witness)."""


class ConvergenceError(GeolabError, RuntimeError):
    """Pattern search stopped without stagnating at the final step size."""

    def __init__(self, message: str, best: Optional[Any] = None):
        super().__init__(message)
        self.best = best
