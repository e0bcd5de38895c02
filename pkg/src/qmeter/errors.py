"""Exception types shared across the package."""

from __future__ import annotations


class ValidationError(ValueError):
    """An input value or matrix violates a precondition."""


class ConfigurationError(ValueError):
    """A run/grid/CLI configuration is unusable."""


class InvariantViolation(RuntimeError):
    """A physical invariant failed beyond tolerance.

    Carries the per-check residuals so callers can report diagnostics
    instead of a bare failure.
    """

    def __init__(self, message: str, residuals: dict[str, float]):
        super().__init__(message)
        self.residuals = dict(residuals)
        self.max_residual = max(residuals.values()) if residuals else float("nan")
