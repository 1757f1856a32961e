"""Monte Carlo simulation of the n-player game under the candidate strategies.

Agent i draws its Brownian increments from its own stream (seed, (i,)); rows
are paths. Growing n or M therefore never reshuffles the noise of agents
that already exist, which pairs comparisons across n for free.

Both modes sample the state from its exact lognormal law at the grid nodes:
the linear surplus Y^i and the multiplicative wealth X^i. Time discretisation
enters only through trapezoid integrals.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .core import (HabitSpec, Population, RngStream, TimeGrid, TypeVector, gaussian_stream,
                   merton_rate, sample_population, trapezoid_cumulative)
from .errors import ConfigurationError, DomainError, InfeasibilityError
from .linear import LinearMfe, growth_rate, u_linear
from .multiplicative import MultMfe, consumption_mult

MODES = ("linear", "multiplicative")


@dataclass(frozen=True)
class GameConfig:
    population: Population
    habit: HabitSpec
    mode: str
    grid: TimeGrid
    n_paths: int
    seed: int = 42
    threads: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}", key="mode")
        if self.n_paths < 1:
            raise ConfigurationError(f"n_paths must be >= 1, got {self.n_paths}", key="M")
        if abs(self.grid.T - self.habit.T) > 1e-12 * self.habit.T:
            raise ConfigurationError("grid horizon differs from habit horizon", key="T")
        if self.mode == "linear":
            self.habit.check_linear()
        else:
            self.habit.check_multiplicative()

    @property
    def n(self) -> int:
        return len(self.population)

    def with_(self, **kw) -> "GameConfig":
        d = dict(population=self.population, habit=self.habit, mode=self.mode, grid=self.grid,
                 n_paths=self.n_paths, seed=self.seed, threads=self.threads)
        d.update(kw)
        return GameConfig(**d)


@dataclass
class PathEnsemble:
    """Simulated paths. Per-agent arrays are kept only for ``tracked`` agents,
    each of shape (n_paths, n_nodes); aggregates cover all agents."""

    mode: str
    grid: TimeGrid
    n_agents: int
    n_paths: int
    seed: int
    tracked: tuple
    types: dict
    wealth: dict
    habit: dict
    consumption: dict
    zbar_n: np.ndarray
    cbar_n: np.ndarray
    benchmark: np.ndarray
    alpha: float = 1.0
    surplus: dict = field(default_factory=dict)
    infeasible: int = 0

    def terminal(self, i) -> np.ndarray:
        """Terminal wealth entering U_i: the surplus Y_T in linear mode
        (true wealth X_T can dip below zero there), X_T otherwise."""
        return self.surplus[i][:, -1] if self.mode == "linear" else self.wealth[i][:, -1]

    @property
    def streams(self):
        return tuple((self.seed, (i,)) for i in range(self.n_agents))

    def summary(self) -> dict:
        out = {
            "zbar_n_mean_T": float(self.zbar_n[:, -1].mean()),
            "cbar_n_mean_T": float(self.cbar_n[:, -1].mean()),
            "sup_mse": float(np.max(np.mean((self.zbar_n - self.benchmark) ** 2, axis=0))),
        }
        for i in self.tracked:
            out[f"wealth_mean_T[{i}]"] = float(self.wealth[i][:, -1].mean())
        return out


def brownian_paths(seed, agent, n_paths, grid: TimeGrid) -> np.ndarray:
    """W at the grid nodes for one agent, shape (n_paths, n_nodes)."""
    dW = gaussian_stream(RngStream(seed, (agent,)), (n_paths, grid.n_steps)) * np.sqrt(grid.dt)
    W = np.zeros((n_paths, len(grid)))
    np.cumsum(dW, axis=1, out=W[:, 1:])
    return W


def _thread_count(threads):
    env = os.environ.get("HABITMFG_THREADS")
    if env:
        threads = int(env)
    return max(1, int(threads or 1))


def _ordered_sum(fn, n, threads):
    """sum(fn(i) for i in range(n)) reduced in agent order, optionally threaded."""
    total = None
    if threads <= 1:
        for i in range(n):
            part = fn(i)
            total = part if total is None else total + part
        return total
    with ThreadPoolExecutor(threads) as pool:
        for start in range(0, n, threads):
            for part in pool.map(fn, range(start, min(n, start + threads))):
                total = part if total is None else total + part
    return total


def _discounted_habit(C, habit: HabitSpec, grid: TimeGrid):
    """Z_t = exp(-delta t) (z0 + int_0^t delta exp(delta s) C_s ds) along the last axis."""
    t = grid.nodes
    d = habit.delta
    return np.exp(-d * t) * (habit.z0 + trapezoid_cumulative(d * np.exp(d * t) * C, grid))


def _surplus_paths(o: TypeVector, K, W, grid):
    u = u_linear(grid.nodes, grid.T, merton_rate(o))
    theta = o.mu / ((1.0 - o.p) * o.sigma)
    G = growth_rate(o) - 1.0 / u - 0.5 * theta**2
    return K * np.exp(trapezoid_cumulative(G, grid) + theta * W), u


def simulate_linear_game(cfg: GameConfig, mfe: LinearMfe, agents=(0,)) -> PathEnsemble:
    if cfg.mode != "linear":
        raise ConfigurationError("simulate_linear_game needs a linear-mode config", key="mode")
    grid, habit = cfg.grid, cfg.habit
    if len(mfe.grid) != len(grid) or mfe.habit != habit:
        raise ConfigurationError("equilibrium was solved on a different grid or habit spec")
    M, n = cfg.n_paths, cfg.n
    K = mfe.K_surplus
    tracked = tuple(sorted(set(int(a) for a in agents)))
    if any(a < 0 or a >= n for a in tracked):
        raise ConfigurationError(f"tracked agents {tracked} outside 0..{n - 1}", key="agents")
    Y = {}

    def contribution(i):
        y, u = _surplus_paths(cfg.population.agents[i], K, brownian_paths(cfg.seed, i, M, grid), grid)
        if i in tracked:
            Y[i] = y
        return y / u

    S = _ordered_sum(contribution, n, _thread_count(cfg.threads)) / n
    zbar_n = habit.z0 + habit.delta * trapezoid_cumulative(S, grid)
    drift_gap = trapezoid_cumulative(zbar_n - mfe.zbar.values, grid)

    wealth, habits, cons = {}, {}, {}
    for i in tracked:
        o = cfg.population.agents[i]
        u = u_linear(grid.nodes, grid.T, merton_rate(o))
        C = zbar_n + Y[i] / u
        cons[i] = C
        wealth[i] = Y[i] + mfe.tail - drift_gap
        habits[i] = _discounted_habit(C, habit, grid)
    return PathEnsemble(
        mode="linear", grid=grid, n_agents=n, n_paths=M, seed=cfg.seed, tracked=tracked,
        types={i: cfg.population.agents[i] for i in tracked}, wealth=wealth, habit=habits,
        consumption=cons, zbar_n=zbar_n, cbar_n=zbar_n + S, benchmark=mfe.zbar.values,
        alpha=habit.alpha, surplus=Y,
        infeasible=int(sum(np.count_nonzero(wealth[i][:, -1] <= 0) for i in tracked)),
    )


def _wealth_paths(o: TypeVector, c, x0, W, grid):
    pi = o.mu / ((1.0 - o.p) * o.sigma**2)
    drift = pi * o.mu - c - 0.5 * (o.sigma * pi) ** 2
    return x0 * np.exp(trapezoid_cumulative(drift, grid) + o.sigma * pi * W)


def simulate_mult_game(cfg: GameConfig, mfe: MultMfe, agents=(0,)) -> PathEnsemble:
    if cfg.mode != "multiplicative":
        raise ConfigurationError("simulate_mult_game needs a multiplicative-mode config", key="mode")
    grid, habit = cfg.grid, cfg.habit
    if len(mfe.grid) != len(grid) or mfe.habit != habit:
        raise ConfigurationError("equilibrium was solved on a different grid or habit spec")
    M, n = cfg.n_paths, cfg.n
    tracked = tuple(sorted(set(int(a) for a in agents)))
    if any(a < 0 or a >= n for a in tracked):
        raise ConfigurationError(f"tracked agents {tracked} outside 0..{n - 1}", key="agents")
    store = {}

    def rate(o):
        if o == mfe.o:
            return mfe.c_star
        return consumption_mult(grid, o, habit.alpha, mfe.zbar, mfe.convention)

    def contribution(i):
        o = cfg.population.agents[i]
        c = rate(o)
        X = _wealth_paths(o, c, habit.x0, brownian_paths(cfg.seed, i, M, grid), grid)
        C = c * X
        if i in tracked:
            store[i] = (X, C)
        return C

    cbar = _ordered_sum(contribution, n, _thread_count(cfg.threads)) / n
    zbar_n = _discounted_habit(cbar, habit, grid)
    wealth = {i: store[i][0] for i in tracked}
    cons = {i: store[i][1] for i in tracked}
    habits = {i: _discounted_habit(cons[i], habit, grid) for i in tracked}
    return PathEnsemble(
        mode="multiplicative", grid=grid, n_agents=n, n_paths=M, seed=cfg.seed, tracked=tracked,
        types={i: cfg.population.agents[i] for i in tracked}, wealth=wealth, habit=habits,
        consumption=cons, zbar_n=zbar_n, cbar_n=cbar, benchmark=mfe.zbar.values,
        alpha=habit.alpha,
    )


def simulate_game(cfg: GameConfig, mfe, agents=(0,)) -> PathEnsemble:
    if cfg.mode == "linear":
        return simulate_linear_game(cfg, mfe, agents)
    return simulate_mult_game(cfg, mfe, agents)


def _mean_se(values):
    values = np.asarray(values, dtype=float)
    se = values.std(ddof=1) / np.sqrt(values.size) if values.size > 1 else float("nan")
    return float(values.mean()), float(se)


def _utility(y, p):
    return y**p / p


def objective_paths(ens: PathEnsemble, i, benchmark=None, strict=True):
    """Per-path realised objective of tracked agent i.

    ``benchmark`` replaces the simulated average habit (a curve or an array
    of paths). With ``strict=False`` non-positive surpluses are clipped to
    U(0) = 0 and counted instead of raising.
    """
    if i not in ens.tracked:
        raise ConfigurationError(f"agent {i} was not tracked in this ensemble", key="agents")
    p = ens.types[i].p
    ref = ens.zbar_n if benchmark is None else np.asarray(benchmark, dtype=float)
    C, XT = ens.consumption[i], ens.terminal(i)
    if ens.mode == "linear":
        arg = C - ref
    else:
        arg = C / ref**ens.alpha
    bad = int(np.count_nonzero(np.any(arg <= 0, axis=1)) + np.count_nonzero(XT <= 0))
    if bad and strict:
        raise InfeasibilityError(f"{bad} path(s) violate the habit or wealth constraint for agent {i}")
    flow = trapezoid_cumulative(_utility(np.clip(arg, 0.0, None), p), ens.grid)[:, -1]
    return flow + _utility(np.clip(XT, 0.0, None), p), bad


def estimate_objective(ens: PathEnsemble, i=0, mode=None):
    """Monte Carlo estimate of J_i with its standard error."""
    if mode is not None and mode != ens.mode:
        raise ConfigurationError(f"ensemble mode is {ens.mode}, not {mode}", key="mode")
    return _mean_se(objective_paths(ens, i)[0])


def objective_semi_analytic_linear(mfe: LinearMfe, o: TypeVector | None = None, terminal="surplus"):
    """(1/p) int E[Y^p] u^-p dt + (1/p) E[Y_T^p] from lognormal moments.

    Uses C - Zbar^n = Y g^(1/(p-1)) = Y/u, which holds on every path.
    """
    o = mfe.o if o is None else o
    grid, p = mfe.grid, o.p
    u = u_linear(grid.nodes, grid.T, merton_rate(o))
    theta = o.mu / ((1.0 - o.p) * o.sigma)
    G = growth_rate(o) - 1.0 / u - 0.5 * theta**2
    EYp = mfe.K_surplus**p * np.exp(p * trapezoid_cumulative(G, grid) + 0.5 * (p * theta) ** 2 * grid.nodes)
    flow = trapezoid_cumulative(EYp * u**-p, grid)[-1] / p
    return float(flow + EYp[-1] / p)


@dataclass(frozen=True)
class GapEstimate:
    n: int
    gap: float
    std_error: float
    infeasible: int
    crn: bool


def _gap_paths(ens: PathEnsemble, mfe, i):
    """Per-path (deviation, candidate) objectives on one ensemble."""
    p = ens.types[i].p
    cand, bad_c = objective_paths(ens, i, strict=False)
    if ens.mode == "multiplicative":
        # the deviation equals the candidate; only the habit benchmark changes
        dev, bad_d = objective_paths(ens, i, benchmark=mfe.zbar.values, strict=False)
        return dev, cand, bad_c + bad_d
    grid, habit = ens.grid, mfe.habit
    Y = ens.surplus[i]
    u = u_linear(grid.nodes, grid.T, merton_rate(ens.types[i]))
    C_dev = mfe.zbar.values + Y / u
    Z_dev = _discounted_habit(C_dev, habit, grid)
    zbar_dev = ens.zbar_n - (ens.habit[i] - Z_dev) / ens.n_agents
    arg = C_dev - zbar_dev
    bad_d = int(np.count_nonzero(np.any(arg <= 0, axis=1)))
    flow = trapezoid_cumulative(_utility(np.clip(arg, 0.0, None), p), grid)[:, -1]
    dev = flow + _utility(Y[:, -1], p)
    return dev, cand, bad_c + bad_d


def nash_gap_estimate(cfg: GameConfig, mfe, agent=0, M=None, crn=True, seed_offset=1_000_003):
    """J_i(auxiliary best response, others at candidate) - J_i(candidate profile).

    The deviation is the optimal control for the frozen mean-field curve; the
    other agents keep their candidate habits. With ``crn`` both objectives are
    evaluated on the same paths; otherwise the deviation uses a second seed.
    """
    if M is not None:
        cfg = cfg.with_(n_paths=int(M))
    ens = simulate_game(cfg, mfe, agents=(agent,))
    dev, cand, bad = _gap_paths(ens, mfe, agent)
    if crn:
        g, se = _mean_se(dev - cand)
    else:
        other = simulate_game(cfg.with_(seed=cfg.seed + seed_offset), mfe, agents=(agent,))
        dev2, _, bad2 = _gap_paths(other, mfe, agent)
        bad += bad2
        m1, s1 = _mean_se(dev2)
        m0, s0 = _mean_se(cand)
        g, se = m1 - m0, float(np.hypot(s1, s0))
    return GapEstimate(cfg.n, g, se, bad, crn)


@dataclass(frozen=True)
class ConvergenceReport:
    n_values: tuple
    values: tuple
    std_errors: tuple
    slope: float
    intercept: float
    r_squared: float
    target: float = -1.0
    band: tuple = (-1.3, -0.7)

    @property
    def passed(self) -> bool:
        return self.band[0] <= self.slope <= self.band[1]


def fit_loglog_slope(points):
    """OLS of log(value) on log(n); returns (slope, intercept, r_squared)."""
    pts = list(points)
    if len(pts) < 3:
        raise ConfigurationError("need >= 3 points for slope", key="n_list")
    n = np.array([q[0] for q in pts], dtype=float)
    v = np.array([q[1] for q in pts], dtype=float)
    if np.any(v <= 0) or np.any(n <= 0):
        raise DomainError("log-log fit needs strictly positive n and values")
    fit = stats.linregress(np.log(n), np.log(v))
    return float(fit.slope), float(fit.intercept), float(fit.rvalue**2)


def habit_deviation_metric(cfg: GameConfig, mfe, n_list, M=200, q=2) -> ConvergenceReport:
    """sup_t E|Zbar^n_t - Zbar_t|^q for each n, and its log-log slope."""
    n_list = [int(n) for n in n_list]
    if len(n_list) < 3:
        raise ConfigurationError("need >= 3 points for slope", key="n_list")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigurationError("n_list must be strictly increasing", key="n_list")
    vals, ses = [], []
    base = cfg.population
    for n in n_list:
        pop = Population(base.agents[:1] * n, base.base, "homogeneous") if base.is_homogeneous \
            else _resize(base, n)
        ens = simulate_game(cfg.with_(population=pop, n_paths=M), mfe, agents=())
        dev = np.abs(ens.zbar_n - mfe.zbar.values) ** q
        mean = dev.mean(axis=0)
        k = int(np.argmax(mean))
        vals.append(float(mean[k]))
        ses.append(float(dev[:, k].std(ddof=1) / np.sqrt(M)))
    slope, icpt, r2 = fit_loglog_slope(zip(n_list, vals))
    return ConvergenceReport(tuple(n_list), tuple(vals), tuple(ses), slope, icpt, r2)


def _resize(pop: Population, n):
    return sample_population(pop.base, n, pop.scheme, pop.kappa, seed=pop.seed)
