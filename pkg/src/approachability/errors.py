"""Exception types shared across the library."""
from __future__ import annotations

from typing import Any, Optional


class ConfigError(ValueError):
    """Bad instance or experiment configuration. `field` names the culprit."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class SolverFailure(RuntimeError):
    """A cutting-plane solver ran out of budget before certifying its answer."""

    def __init__(self, message: str, incumbent: Any = None, value: Optional[float] = None,
                 round_index: Optional[int] = None):
        super().__init__(message)
        self.incumbent = incumbent
        self.value = value
        self.round_index = round_index


class Infeasible(RuntimeError):
    """Cutting-plane phase-1 proved that no point satisfies the constraints."""


class SeparabilityViolation(RuntimeError):
    """No action satisfies the halfspace condition for the current dual iterate."""

    def __init__(self, message: str, theta: Any = None, round_index: Optional[int] = None):
        super().__init__(message)
        self.theta = theta
        self.round_index = round_index


class InvalidDual(ValueError):
    """A dual point lies outside the domain of a regularizer."""


class AdversaryExhausted(RuntimeError):
    """A replayed loss file ran out of rows."""

    def __init__(self, round_index: int):
        super().__init__(f"loss file exhausted at round {round_index}")
        self.round_index = round_index
