"""Exception hierarchy shared across the package."""


class HabitMFGError(Exception):
    """Base class for all package errors."""


class ConfigurationError(HabitMFGError, ValueError):
    """Invalid parameters, grids or configuration files."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class ShapeError(HabitMFGError, ValueError):
    pass


class DomainError(HabitMFGError, ValueError):
    """Evaluation outside the domain where a formula is defined."""


class InfeasibilityError(HabitMFGError):
    """Wealth cannot sustain the addictive habit floor."""


class SolverError(HabitMFGError, RuntimeError):
    """A fixed-point iteration failed to converge."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
