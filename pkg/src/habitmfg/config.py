"""Experiment configuration: flat ``key = value`` text.

Lines starting with ``#`` are comments; simulation settings live under the
``sim.`` prefix. Lists are comma separated. Example::

    mode = multiplicative
    figure = fig2_mult      # optional: start from a published parameter set
    T = 2
    delta_list = 0.1, 0.2, 0.3
    sim.n_list = 8, 16, 32, 64, 128, 256
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields
from pathlib import Path

from .core import HabitSpec, TypeVector, make_grid
from .errors import ConfigurationError
from .presets import FIGURES, figure_params

REQUIRED = ("mode", "T", "mu", "sigma", "p", "x0", "z0", "delta")


@dataclass(frozen=True)
class SimSettings:
    n_list: tuple = (8, 16, 32, 64, 128, 256)
    M: int = 200
    M_gap: int = 10_000
    n_steps: int = 100
    q: int = 2
    scheme: str = "homogeneous"
    kappa: float = 0.1
    agent: int = 0
    crn: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    T: float
    mu: float
    sigma: float
    p: float
    x0: float
    z0: float
    delta: float
    alpha: float = 1.0
    epsilon: float | None = None
    n_steps: int = 2000
    seed: int = 42
    convention: str = "hjb"
    tol: float = 1e-8
    max_iter: int = 200
    damping: float = 1.0
    method: str = "auto"
    x_eval: float | None = None
    figure: str | None = None
    p_list: tuple | None = None
    delta_list: tuple | None = None
    alpha_list: tuple | None = None
    out: str = "."
    sim: SimSettings = field(default_factory=SimSettings)
    explicit: frozenset = field(default=frozenset(), compare=False, repr=False)

    @property
    def o(self) -> TypeVector:
        return TypeVector(self.mu, self.sigma, self.p)

    @property
    def habit(self) -> HabitSpec:
        return HabitSpec(self.x0, self.z0, self.delta, self.T, self.alpha, self.epsilon)

    def grid(self, n_steps=None):
        return make_grid(self.T, self.n_steps if n_steps is None else n_steps)

    @property
    def sweep(self):
        """``(name, values)`` of the single sweep list, or None."""
        given = [(k[:-5], getattr(self, k)) for k in ("p_list", "delta_list", "alpha_list")
                 if getattr(self, k) is not None]
        if len(given) > 1:
            raise ConfigurationError("give at most one of p_list, delta_list, alpha_list", key="p_list")
        return given[0] if given else None

    def replace(self, **kw) -> "ExperimentConfig":
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(kw)
        return ExperimentConfig(**d)

    def canonical(self) -> str:
        """Stable text form used for the config hash (output dir excluded)."""
        items = []
        for f in fields(self):
            if f.name in ("out", "explicit", "sim"):
                continue
            items.append(f"{f.name}={getattr(self, f.name)!r}")
        for f in fields(self.sim):
            items.append(f"sim.{f.name}={getattr(self.sim, f.name)!r}")
        return "\n".join(items)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


_FLOATS = {"T", "mu", "sigma", "p", "x0", "z0", "delta", "alpha", "epsilon", "tol", "damping", "x_eval"}
_INTS = {"n_steps", "seed", "max_iter"}
_STRS = {"mode", "convention", "method", "figure", "out"}
_LISTS = {"p_list", "delta_list", "alpha_list"}
_SIM = {f.name: f for f in fields(SimSettings)}


def _num(key, text, kind):
    try:
        if kind is int:
            v = float(text)
            if v != int(v):
                raise ValueError
            return int(v)
        return float(text)
    except ValueError:
        raise ConfigurationError(f"{key}: cannot parse {text!r} as {kind.__name__}", key=key) from None


def _bool(key, text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"{key}: cannot parse {text!r} as a boolean", key=key)


def _list(key, text, kind=float):
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise ConfigurationError(f"{key}: list must not be empty", key=key)
    return tuple(_num(key, s, kind) for s in items)


def _read_pairs(text):
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if key in pairs:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}", key=key)
        pairs[key] = value
    return pairs


def parse_config(source, overrides: dict | None = None) -> ExperimentConfig:
    """Parse a config file path or inline text; validate and fill defaults.

    A ``figure`` key seeds the model parameters (and the sweep list, when
    none is given) from a published parameter set; explicit keys win.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and "=" not in source):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {source}: {exc}") from None
    else:
        text = str(source)
    pairs = _read_pairs(text)
    explicit = frozenset(pairs)

    kw, sim = {}, {}
    for key, value in pairs.items():
        if key.startswith("sim."):
            name = key[4:]
            if name not in _SIM:
                raise ConfigurationError(f"unknown key {key!r}", key=key)
            if name == "n_list":
                sim[name] = _list(key, value, int)
            elif name == "crn":
                sim[name] = _bool(key, value)
            elif name == "scheme":
                sim[name] = value
            else:
                sim[name] = _num(key, value, type(_SIM[name].default))
        elif key in _FLOATS:
            kw[key] = _num(key, value, float)
        elif key in _INTS:
            kw[key] = _num(key, value, int)
        elif key in _STRS:
            kw[key] = value
        elif key in _LISTS:
            kw[key] = _list(key, value)
        else:
            raise ConfigurationError(f"unknown key {key!r}", key=key)

    fig = kw.get("figure")
    if fig is not None:
        if fig not in FIGURES:
            raise ConfigurationError(f"unknown figure {fig!r}; choose from {sorted(FIGURES)}", key="figure")
        for k, v in figure_params(fig).items():
            kw.setdefault(k, v)
        preset = FIGURES[fig]
        kw.setdefault("x_eval", preset["x_eval"])
        if not any(k in kw for k in _LISTS):
            kw[preset["sweep"] + "_list"] = tuple(preset["values"])

    missing = [k for k in REQUIRED if k not in kw]
    if missing:
        raise ConfigurationError(f"missing required key(s): {', '.join(missing)}", key=missing[0])
    if overrides:
        kw.update({k: v for k, v in overrides.items() if v is not None and k != "sim"})
        sim.update((overrides.get("sim") or {}))
    cfg = ExperimentConfig(**kw, sim=SimSettings(**sim), explicit=explicit)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig):
    if cfg.mode not in ("linear", "multiplicative"):
        raise ConfigurationError(f"mode must be 'linear' or 'multiplicative', got {cfg.mode!r}", key="mode")
    if not 0 < cfg.alpha <= 1:
        raise ConfigurationError(f"alpha in (0,1] required, got alpha={cfg.alpha}", key="alpha")
    o, habit = cfg.o, cfg.habit  # type invariants raise here
    if cfg.mode == "linear" and not cfg.x0 > cfg.z0 * cfg.T:
        raise ConfigurationError(
            f"linear mode requires x0 > z0*T (x0={cfg.x0}, z0*T={cfg.z0 * cfg.T})", key="x0")
    if cfg.mode == "multiplicative":
        habit.check_multiplicative()
    cfg.grid()
    if cfg.convention not in ("hjb", "printed"):
        raise ConfigurationError(f"convention must be 'hjb' or 'printed', got {cfg.convention!r}",
                                 key="convention")
    if cfg.method not in ("picard", "blocks", "auto"):
        raise ConfigurationError(f"unknown solver method {cfg.method!r}", key="method")
    sweep = cfg.sweep
    if sweep:
        name, values = sweep
        for v in values:
            if name == "p" and not 0 < v < 1:
                raise ConfigurationError(f"p_list value {v} outside (0, 1)", key="p_list")
            if name == "alpha" and not 0 < v <= 1:
                raise ConfigurationError(f"alpha in (0,1] required, got {v} in alpha_list", key="alpha_list")
            if name == "delta" and v < 0:
                raise ConfigurationError(f"delta_list value {v} is negative", key="delta_list")
    s = cfg.sim
    if any(n < 1 for n in s.n_list) or any(b <= a for a, b in zip(s.n_list, s.n_list[1:])):
        raise ConfigurationError("sim.n_list must be positive and strictly increasing", key="sim.n_list")
    if s.M < 2 or s.M_gap < 2:
        raise ConfigurationError("sim.M and sim.M_gap must be >= 2", key="sim.M")
    if s.scheme not in ("homogeneous", "shrinking", "random"):
        raise ConfigurationError(f"unknown sim.scheme {s.scheme!r}", key="sim.scheme")
    if s.q < 1:
        raise ConfigurationError("sim.q must be >= 1", key="sim.q")
    make_grid(cfg.T, s.n_steps)
    return cfg
