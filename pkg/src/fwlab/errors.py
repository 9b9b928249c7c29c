"""Exceptions shared across the solver stack.

The CLI maps these onto process exit codes, so the distinction matters:
config problems are ordinary ``ValueError``s raised during construction,
``InvariantViolation`` means a mathematical guarantee failed at runtime,
and ``NumericFailure`` means the floating-point computation itself broke
(NaN or overflow in an iterate or objective value).
"""


class ConfigError(ValueError):
    """An experiment configuration is malformed or inconsistent."""


class InvariantViolation(RuntimeError):
    """A runtime check of a proved inequality or feasibility bound failed."""


class NumericFailure(RuntimeError):
    """A non-finite value appeared where a finite one is required."""


class ConvergenceFailure(RuntimeError):
    """An iterative routine exhausted its budget before reaching its target."""
