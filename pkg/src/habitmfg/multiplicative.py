"""Mean field equilibrium under multiplicative (non-addictive) habit formation.

For a habit benchmark Zbar the value function is x**p g(t) / p with
g = h**(1-p). Writing k = alpha p / (p-1) < 0, the reduced HJB equation

    V_t - mu^2/(2 sigma^2) V_x^2 / V_xx + (1-p)/p Zbar^k V_x^(p/(p-1)) = 0

turns into the linear ODE h' = -a h - Zbar^k with h(T) = 1, whose solution is

    h(t) = exp(a (T-t)) + int_t^T exp(a (s-t)) Zbar_s^k ds.

``convention="printed"`` instead uses exp(a (t-T)) + exp(a t) int_t^T
exp(-a s) Zbar_s^k ds, the solution of h' = a h - Zbar^k. Both agree when
a = 0. The HJB-consistent form is the default; see the README.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import HabitSpec, TimeGrid, TypeVector, merton_rate, tail_integral, trapezoid_cumulative
from .errors import ConfigurationError, DomainError, SolverError
from .linear import HabitCurve

CONVENTIONS = ("hjb", "printed")


def _values(zbar):
    v = zbar.values if isinstance(zbar, HabitCurve) else np.asarray(zbar, dtype=float)
    if not np.all(v > 0):
        raise DomainError("habit benchmark must be strictly positive")
    return v


def habit_exponent(o: TypeVector, alpha) -> float:
    return alpha * o.p / (o.p - 1.0)


def h_mult(grid: TimeGrid, o: TypeVector, alpha, zbar, convention="hjb") -> np.ndarray:
    """h = g**(1/(1-p)) on the grid."""
    if convention not in CONVENTIONS:
        raise ConfigurationError(f"unknown convention {convention!r}", key="convention")
    z = _values(zbar)
    a = merton_rate(o)
    tau = grid.T - grid.nodes
    forcing = z ** habit_exponent(o, alpha)
    sign = 1.0 if convention == "hjb" else -1.0
    # both forms are exp(+-a tau) * (1 + int_t^T exp(+-a (s - T)) forcing ds)
    inner = tail_integral(np.exp(-sign * a * tau) * forcing, grid)
    return np.exp(sign * a * tau) * (1.0 + inner)


def h_ode_residual(grid: TimeGrid, o: TypeVector, alpha, zbar, h, convention="hjb") -> np.ndarray:
    """Centred-difference residual of h' = -+a h - Zbar^k at interior nodes."""
    a = merton_rate(o)
    sign = -1.0 if convention == "hjb" else 1.0
    dh = (h[2:] - h[:-2]) / (2.0 * grid.dt)
    forcing = _values(zbar)[1:-1] ** habit_exponent(o, alpha)
    return dh - (sign * a * h[1:-1] - forcing)


def g_mult(grid: TimeGrid, o: TypeVector, alpha, zbar, convention="hjb") -> np.ndarray:
    return h_mult(grid, o, alpha, zbar, convention) ** (1.0 - o.p)


def consumption_mult(grid: TimeGrid, o: TypeVector, alpha, zbar, convention="hjb") -> np.ndarray:
    """Equilibrium consumption-to-wealth rate c* = Zbar^k g^(1/(p-1)) = Zbar^k / h."""
    z = _values(zbar)
    return z ** habit_exponent(o, alpha) / h_mult(grid, o, alpha, z, convention)


def expected_wealth_mult(grid: TimeGrid, o: TypeVector, c_star, x0) -> np.ndarray:
    """f(t) = E[X*_t] = x0 exp(int_0^t (mu^2/((1-p) sigma^2) - c*) ds).

    Takes the consumption rate c* directly; it already folds in Zbar and g.
    """
    drift = o.mu**2 / ((1.0 - o.p) * o.sigma**2) - np.asarray(c_star, dtype=float)
    return x0 * np.exp(trapezoid_cumulative(drift, grid))


def _step(z, grid, o, habit, convention):
    c = consumption_mult(grid, o, habit.alpha, z, convention)
    f = expected_wealth_mult(grid, o, c, habit.x0)
    t = grid.nodes
    d = habit.delta
    acc = trapezoid_cumulative(d * np.exp(d * t) * c * f, grid)
    return np.exp(-d * t) * (habit.z0 + acc), c, f


def picard_step(zbar_k, o: TypeVector, habit: HabitSpec, grid: TimeGrid, convention="hjb") -> HabitCurve:
    z = _values(zbar_k)
    beta = habit.beta(o.p)
    if np.any(z < beta):
        raise DomainError(f"habit iterate falls below beta={beta:.3g}")
    return HabitCurve(grid, _step(z, grid, o, habit, convention)[0])


@dataclass(frozen=True)
class MultMfe:
    grid: TimeGrid
    o: TypeVector
    habit: HabitSpec
    zbar: HabitCurve
    g_m: np.ndarray
    h: np.ndarray
    c_star: np.ndarray
    f_wealth: np.ndarray
    pi_star: float
    beta: float
    iterations: int
    residual: float
    convention: str = "hjb"
    method: str = "picard"
    history: tuple = field(default=(), repr=False)

    @property
    def K_admissible(self) -> float:
        """Bound on |pi|, c used for the admissibility diagnostic."""
        return max(abs(self.pi_star), float(np.max(self.c_star)))

    def consumption(self, x):
        """Consumption rate C(t, x) = c*(t) x on the grid (x scalar or per node)."""
        return self.c_star * np.asarray(x, dtype=float)


def _picard(z, grid, o, habit, tol, max_iter, damping, convention, floor=0.125):
    lam = damping
    hist = []
    for it in range(1, max_iter + 1):
        new = _step(z, grid, o, habit, convention)[0]
        res = float(np.max(np.abs(new - z)))
        hist.append(res)
        if res < tol:
            return z, it, hist
        if len(hist) > 1 and res > hist[-2] and lam > floor:
            lam = max(lam / 2.0, floor)
        z = (1.0 - lam) * z + lam * new
    raise SolverError(
        f"Picard iteration did not reach tol={tol:g} in {max_iter} iterations "
        f"(last residual {hist[-1]:.3e})",
        residual=hist[-1], iterations=max_iter,
    )


def _blocks(z, grid, o, habit, tol, max_iter, convention, n_blocks=8, inner=50):
    """Block Gauss-Seidel: sweep over time blocks, iterating each block to convergence
    with the rest of the curve frozen."""
    edges = np.linspace(0, len(grid), n_blocks + 1).astype(int)
    hist = []
    evals = 0
    for _ in range(max_iter):
        for lo, hi in zip(edges[:-1], edges[1:]):
            for _ in range(inner):
                new = _step(z, grid, o, habit, convention)[0]
                evals += 1
                change = float(np.max(np.abs(new[lo:hi] - z[lo:hi])))
                z = z.copy()
                z[lo:hi] = new[lo:hi]
                if change < tol / 10:
                    break
        res = float(np.max(np.abs(_step(z, grid, o, habit, convention)[0] - z)))
        evals += 1
        hist.append(res)
        if res < tol:
            return z, evals, hist
    raise SolverError(
        f"block iteration did not reach tol={tol:g} (last residual {hist[-1]:.3e})",
        residual=hist[-1], iterations=evals,
    )


def solve_zbar_mult(grid: TimeGrid, o: TypeVector, habit: HabitSpec, tol=1e-8, max_iter=200,
                    damping=1.0, init=None, method="auto", convention="hjb") -> MultMfe:
    """Damped Picard iteration for the consistency condition.

    ``method`` is ``"picard"``, ``"blocks"`` or ``"auto"`` (Picard, then the
    block sweep if Picard fails). ``init`` defaults to z0 exp(-delta t).
    """
    if abs(grid.T - habit.T) > 1e-12 * habit.T:
        raise ConfigurationError(f"grid horizon {grid.T} differs from habit horizon {habit.T}", key="T")
    habit.check_multiplicative()
    if convention not in CONVENTIONS:
        raise ConfigurationError(f"unknown convention {convention!r}", key="convention")
    if not 0 < damping <= 1:
        raise ConfigurationError(f"damping must lie in (0, 1], got {damping}", key="damping")
    if method not in ("picard", "blocks", "auto"):
        raise ConfigurationError(f"unknown solver method {method!r}", key="method")

    z0 = habit.z0 * np.exp(-habit.delta * grid.nodes) if init is None else _values(init).copy()
    if method == "blocks":
        z, iters, hist = _blocks(z0, grid, o, habit, tol, max_iter, convention)
    else:
        try:
            z, iters, hist = _picard(z0, grid, o, habit, tol, max_iter, damping, convention)
        except SolverError:
            if method == "picard":
                raise
            method = "blocks"
            z, iters, hist = _blocks(z0, grid, o, habit, tol, max_iter, convention)
        else:
            method = "picard"

    new, c, f = _step(z, grid, o, habit, convention)
    h = h_mult(grid, o, habit.alpha, z, convention)
    for arr in (h, c, f):
        arr.setflags(write=False)
    g = h ** (1.0 - o.p)
    g.setflags(write=False)
    return MultMfe(
        grid=grid, o=o, habit=habit, zbar=HabitCurve(grid, z), g_m=g, h=h, c_star=c,
        f_wealth=f, pi_star=o.mu / ((1.0 - o.p) * o.sigma**2), beta=habit.beta(o.p),
        iterations=iters, residual=float(np.max(np.abs(new - z))), convention=convention,
        method=method, history=tuple(hist),
    )


def value_mult(t, x, mfe: MultMfe):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("value function needs x > 0")
    g = np.interp(t, mfe.grid.nodes, mfe.g_m)
    return x**mfe.o.p * g / mfe.o.p


def transformed_step(zbar, o: TypeVector, habit: HabitSpec, grid: TimeGrid, convention="hjb"):
    """Return ``(zhat, Phi(zhat))`` for zhat_t = exp(delta t/(1-p)) Zbar_t^(1/(1-p)).

    Phi(t) = z0^(1/(1-p)) + delta/(1-p) int_0^t exp(delta s/(1-p)) Zbar^(p/(1-p)) c* f ds,
    which equals zhat at a fixed point for every alpha in (0, 1].
    """
    z = _values(zbar)
    p, d = o.p, habit.delta
    c = consumption_mult(grid, o, habit.alpha, z, convention)
    f = expected_wealth_mult(grid, o, c, habit.x0)
    t = grid.nodes
    zhat = np.exp(d * t / (1 - p)) * z ** (1 / (1 - p))
    integrand = np.exp(d * t / (1 - p)) * z ** (p / (1 - p)) * c * f
    phi = habit.z0 ** (1 / (1 - p)) + d / (1 - p) * trapezoid_cumulative(integrand, grid)
    return zhat, phi
