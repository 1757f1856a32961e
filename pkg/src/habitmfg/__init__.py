"""Mean field equilibria for consumption games with external habit formation."""

from .core import (HabitSpec, Population, RngStream, TimeGrid, TypeVector, gaussian_stream,
                   make_grid, merton_rate, sample_population, trapezoid_cumulative)
from .errors import (ConfigurationError, DomainError, HabitMFGError, InfeasibilityError,
                     ShapeError, SolverError)
from .linear import (HabitCurve, LinearMfe, expected_surplus_linear, feedback_linear, g_linear,
                     picard_linear, solve_zbar_linear, value_linear)
from .multiplicative import (MultMfe, consumption_mult, expected_wealth_mult, g_mult, picard_step,
                             solve_zbar_mult, transformed_step, value_mult)
from .simulate import (ConvergenceReport, GameConfig, PathEnsemble, estimate_objective,
                       fit_loglog_slope, habit_deviation_metric, nash_gap_estimate,
                       simulate_linear_game, simulate_mult_game)

__version__ = "0.1.0"
