"""Mean field equilibrium under linear (addictive) external habit formation.

With a = merton_rate(o) the value coefficient is g(t) = u(t)**(1-p) where

    u(t) = (1 + 1/a) exp(a (T-t)) - 1/a,      u' + a u + 1 = 0,  u(T) = 1.

Everything below is expressed through u since g**(1/(p-1)) = 1/u.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import exprel

from .core import HabitSpec, TimeGrid, TypeVector, merton_rate, tail_integral, trapezoid_cumulative
from .errors import DomainError, ConfigurationError, InfeasibilityError, ShapeError


@dataclass(frozen=True)
class HabitCurve:
    """Deterministic habit benchmark sampled on a grid (linear in between)."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (len(self.grid),):
            raise ShapeError(f"habit curve needs {len(self.grid)} values, got shape {v.shape}")
        if not np.all(v > 0):
            raise DomainError("habit curve must be strictly positive")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __call__(self, t):
        return np.interp(t, self.grid.nodes, self.values)

    def integral(self) -> float:
        return float(trapezoid_cumulative(self.values, self.grid)[-1])

    def tail(self) -> np.ndarray:
        """``int_t^T Zbar ds`` at every node."""
        return tail_integral(self.values, self.grid)


def u_linear(t, T, a):
    """u(t) = exp(a tau) + tau * (exp(a tau) - 1)/(a tau), tau = T - t.

    Written through ``exprel`` so that a = 0 gives 1 + (T - t) exactly.
    """
    tau = T - np.asarray(t, dtype=float)
    return np.exp(a * tau) + tau * exprel(a * tau)


def g_linear(grid: TimeGrid, o: TypeVector) -> np.ndarray:
    return u_linear(grid.nodes, grid.T, merton_rate(o)) ** (1.0 - o.p)


def growth_rate(o: TypeVector) -> float:
    """Drift of the optimal surplus per unit of surplus, before consumption."""
    return o.mu**2 / ((1.0 - o.p) * o.sigma**2)


@dataclass(frozen=True)
class LinearMfe:
    grid: TimeGrid
    o: TypeVector
    habit: HabitSpec
    g_l: np.ndarray
    u: np.ndarray
    phi: np.ndarray
    zbar: HabitCurve
    K_surplus: float
    residual: float

    @property
    def tail(self) -> np.ndarray:
        return self.zbar.tail()

    @property
    def pi_merton(self) -> float:
        return self.o.mu / ((1.0 - self.o.p) * self.o.sigma**2)


def _phi(grid, o, u):
    log_growth = trapezoid_cumulative(growth_rate(o) - 1.0 / u, grid)
    return np.exp(log_growth) / u


def picard_linear(zbar, grid: TimeGrid, o: TypeVector, habit: HabitSpec, u=None) -> np.ndarray:
    """One application of the consistency map.

    Phi(Z)_t = z0 + delta * (x0 - int_0^T Z) * int_0^t phi.
    Contraction factor is delta * int_0^T int_0^t phi.
    """
    if u is None:
        u = u_linear(grid.nodes, grid.T, merton_rate(o))
    Phi1 = trapezoid_cumulative(_phi(grid, o, u), grid)
    surplus = habit.x0 - trapezoid_cumulative(np.asarray(zbar, float), grid)[-1]
    return habit.z0 + habit.delta * surplus * Phi1


def solve_zbar_linear(grid: TimeGrid, o: TypeVector, habit: HabitSpec) -> LinearMfe:
    if abs(grid.T - habit.T) > 1e-12 * habit.T:
        raise ConfigurationError(f"grid horizon {grid.T} differs from habit horizon {habit.T}", key="T")
    if not habit.x0 > habit.z0 * habit.T:
        raise InfeasibilityError(
            f"initial wealth cannot support addictive habit: need x0 > z0*T "
            f"(x0={habit.x0}, z0*T={habit.z0 * habit.T})"
        )
    a = merton_rate(o)
    u = u_linear(grid.nodes, grid.T, a)
    phi = _phi(grid, o, u)
    Phi1 = trapezoid_cumulative(phi, grid)
    double = trapezoid_cumulative(Phi1, grid)[-1]
    K = (habit.x0 - habit.z0 * habit.T) / (1.0 + habit.delta * double)
    z = habit.z0 + habit.delta * K * Phi1
    res = float(np.max(np.abs(picard_linear(z, grid, o, habit, u) - z)))
    g = u ** (1.0 - o.p)
    for arr in (g, u, phi):
        arr.setflags(write=False)
    return LinearMfe(grid, o, habit, g, u, phi, HabitCurve(grid, z), float(K), res)


def _surplus(t, x, mfe: LinearMfe):
    t = np.asarray(t, dtype=float)
    F = np.interp(t, mfe.grid.nodes, mfe.tail)
    y = np.asarray(x, dtype=float) - F
    if np.any(y <= 0):
        raise DomainError("wealth is below the cost of the future habit floor (x <= int_t^T Zbar)")
    return t, y


def feedback_linear(t, x, mfe: LinearMfe):
    """Return ``(pi, c)``: risky fraction of wealth and consumption-to-wealth ratio.

    The consumption rate is ``c * x``.
    """
    t, y = _surplus(t, x, mfe)
    x = np.asarray(x, dtype=float)
    u = u_linear(t, mfe.grid.T, merton_rate(mfe.o))
    pi = mfe.pi_merton * y / x
    c = (mfe.zbar(t) + y / u) / x
    return pi, c


def consumption_linear(t, x, mfe: LinearMfe):
    pi, c = feedback_linear(t, x, mfe)
    return c * np.asarray(x, dtype=float)


def value_linear(t, x, mfe: LinearMfe):
    t, y = _surplus(t, x, mfe)
    p = mfe.o.p
    g = u_linear(t, mfe.grid.T, merton_rate(mfe.o)) ** (1.0 - p)
    return y**p * g / p


def expected_surplus_linear(grid: TimeGrid, mfe: LinearMfe) -> np.ndarray:
    """E[Y_t] where Y_t = X_t - int_t^T Zbar is the optimal surplus (a GBM)."""
    log_growth = trapezoid_cumulative(growth_rate(mfe.o) - 1.0 / mfe.u, grid)
    return mfe.K_surplus * np.exp(log_growth)


def consistency_residual(mfe: LinearMfe) -> float:
    """Rebuild Zbar from the habit recursion with E[C] = Zbar + E[Y]/u."""
    grid, h = mfe.grid, mfe.habit
    t = grid.nodes
    z = mfe.zbar.values
    ec = z + expected_surplus_linear(grid, mfe) / mfe.u
    rebuilt = np.exp(-h.delta * t) * (
        h.z0 + trapezoid_cumulative(h.delta * np.exp(h.delta * t) * ec, grid)
    )
    return float(np.max(np.abs(rebuilt - z)))
