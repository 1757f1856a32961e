"""Domain types, time grids, quadrature, populations and random streams."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import ConfigurationError, ShapeError

P_BOUNDS = (0.05, 0.95)


@dataclass(frozen=True)
class TypeVector:
    """Market and preference parameters of one agent.

    ``mu`` is the drift of the agent's dedicated stock, ``sigma`` its
    volatility and ``p`` the exponent of the power utility ``y**p / p``.
    """

    mu: float
    sigma: float
    p: float

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ConfigurationError(f"sigma must be > 0, got {self.sigma}", key="sigma")
        if not (0.0 < self.p < 1.0):
            raise ConfigurationError(f"p must lie in (0, 1), got {self.p}", key="p")
        if not math.isfinite(self.mu):
            raise ConfigurationError(f"mu must be finite, got {self.mu}", key="mu")

    @property
    def merton_fraction(self) -> float:
        return self.mu / ((1.0 - self.p) * self.sigma**2)

    def as_array(self) -> np.ndarray:
        return np.array([self.mu, self.sigma, self.p])


@dataclass(frozen=True)
class HabitSpec:
    """Habit parameters shared by all agents.

    ``epsilon`` is the lower bound on ``z0`` required by the multiplicative
    problem; when omitted it defaults to ``min(z0 / 2, 0.01)``.
    """

    x0: float
    z0: float
    delta: float
    T: float
    alpha: float = 1.0
    epsilon: float | None = None

    def __post_init__(self):
        for name in ("x0", "z0", "T"):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigurationError(f"{name} must be > 0, got {value}", key=name)
        if not self.delta >= 0:
            raise ConfigurationError(f"delta must be >= 0, got {self.delta}", key="delta")
        if not (0.0 < self.alpha <= 1.0):
            raise ConfigurationError(f"alpha must lie in (0, 1], got {self.alpha}", key="alpha")
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", min(self.z0 / 2.0, 0.01))
        if not self.epsilon > 0:
            raise ConfigurationError(f"epsilon must be > 0, got {self.epsilon}", key="epsilon")

    def check_linear(self):
        if not self.x0 > self.z0 * self.T:
            raise ConfigurationError(
                f"linear habit needs x0 > z0*T (x0={self.x0}, z0*T={self.z0 * self.T})",
                key="x0",
            )

    def check_multiplicative(self):
        if not self.z0 > self.epsilon:
            raise ConfigurationError(
                f"multiplicative habit needs z0 > epsilon (z0={self.z0}, epsilon={self.epsilon})",
                key="z0",
            )

    def beta(self, p: float) -> float:
        return self.epsilon ** (1.0 / (1.0 - p))


@dataclass(frozen=True)
class TimeGrid:
    T: float
    n_steps: int
    nodes: np.ndarray = field(repr=False, compare=False)

    @property
    def dt(self) -> float:
        return self.T / self.n_steps

    def __len__(self):
        return self.n_steps + 1


def make_grid(T, n_steps=2000) -> TimeGrid:
    """Uniform grid ``0 = t_0 < ... < t_n = T``."""
    if not (T > 0 and math.isfinite(T)):
        raise ConfigurationError(f"T must be > 0, got {T}", key="T")
    if int(n_steps) != n_steps or n_steps < 2:
        raise ConfigurationError(f"n_steps must be an integer >= 2, got {n_steps}", key="n_steps")
    n_steps = int(n_steps)
    nodes = np.linspace(0.0, T, n_steps + 1)
    nodes.setflags(write=False)
    return TimeGrid(float(T), n_steps, nodes)


def trapezoid_cumulative(values, grid: TimeGrid) -> np.ndarray:
    """Cumulative trapezoid integral along the last axis, starting at 0.

    Tail integrals over ``[t_k, T]`` are ``F[..., -1:] - F``.
    """
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != len(grid):
        raise ShapeError(
            f"expected {len(grid)} values along the last axis, got {values.shape[-1]}"
        )
    return cumulative_trapezoid(values, dx=grid.dt, axis=-1, initial=0.0)


def tail_integral(values, grid: TimeGrid) -> np.ndarray:
    F = trapezoid_cumulative(values, grid)
    return F[..., -1:] - F


def merton_rate(o: TypeVector) -> float:
    """``a = mu^2 p / (2 sigma^2 (1-p)^2)``."""
    return o.mu**2 * o.p / (2.0 * o.sigma**2 * (1.0 - o.p) ** 2)


@dataclass(frozen=True)
class Population:
    agents: tuple
    base: TypeVector
    scheme: str
    kappa: float = 0.0
    seed: int | None = None

    def __len__(self):
        return len(self.agents)

    @property
    def m_p_low(self) -> float:
        return min(o.p for o in self.agents)

    @property
    def m_p_high(self) -> float:
        return max(o.p for o in self.agents)

    @property
    def is_homogeneous(self) -> bool:
        return all(o == self.base for o in self.agents)

    def max_deviation(self) -> float:
        base = self.base.as_array()
        return max(float(np.max(np.abs(o.as_array() - base))) for o in self.agents)

    def params(self):
        """Per-agent ``(mu, sigma, p)`` arrays."""
        arr = np.array([o.as_array() for o in self.agents])
        return arr[:, 0], arr[:, 1], arr[:, 2]


def sample_population(base: TypeVector, n: int, scheme="homogeneous", kappa=0.1,
                      seed=None, p_bounds=P_BOUNDS) -> Population:
    """Heterogeneous agents converging to ``base`` at rate ``1/sqrt(n)``.

    ``scheme`` is ``"homogeneous"``, ``"shrinking"`` (deterministic offsets
    ``kappa * cos(i) / sqrt(n)`` on every component) or ``"random"``
    (offsets ``kappa * U[-1, 1] / sqrt(n)`` drawn from ``seed``).
    """
    if int(n) != n or n < 1:
        raise ConfigurationError(f"n must be a positive integer, got {n}", key="n")
    n = int(n)
    if scheme == "homogeneous":
        return Population((base,) * n, base, scheme, 0.0)
    if scheme == "shrinking":
        zeta = np.cos(np.arange(1, n + 1, dtype=float))
    elif scheme == "random":
        zeta = np.random.default_rng(seed).uniform(-1.0, 1.0, size=n)
    else:
        raise ConfigurationError(f"unknown heterogeneity scheme {scheme!r}", key="scheme")

    shift = kappa * zeta / math.sqrt(n)
    mu = base.mu + shift
    sigma = base.sigma + shift
    p = base.p + shift
    if np.any(sigma <= 0):
        raise ConfigurationError("perturbation drives some sigma_i <= 0", key="kappa")
    if np.any((p <= 0) | (p >= 1)):
        raise ConfigurationError("perturbation drives some p_i outside (0, 1)", key="kappa")
    p = np.clip(p, *p_bounds)
    agents = tuple(TypeVector(float(m), float(s), float(q)) for m, s, q in zip(mu, sigma, p))
    return Population(agents, base, scheme, float(kappa), seed)


@dataclass
class RngStream:
    """Reproducible Gaussian stream identified by ``(seed, stream)``.

    Streams are Philox generators keyed through ``SeedSequence`` spawn keys,
    so distinct stream indices never overlap. Draws are consumed in order;
    ``counter`` records how many have been taken.
    """

    seed: int
    stream: tuple = ()
    counter: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.stream = tuple(int(s) for s in np.atleast_1d(self.stream))
        ss = np.random.SeedSequence(int(self.seed), spawn_key=self.stream)
        self._gen = np.random.Generator(np.random.Philox(ss))


def gaussian_stream(rng: RngStream, count) -> np.ndarray:
    """Next ``count`` standard normal draws (``count`` may be a shape)."""
    out = rng._gen.standard_normal(count)
    rng.counter += out.size
    return out
