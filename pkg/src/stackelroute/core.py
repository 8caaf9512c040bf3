"""Domain types and the utility function of the timing-and-route game.

Two agents pick an arrival time and a route. Agent 1 (stronger, the leader)
commits first; agent 2 (the follower) observes and replies. Each agent's
utility is territory benefit minus travel cost minus predation risk::

    u_i = e_i(t) - [(t_i - t_o)^2 / beta_i + c_o^i * delta(x_i)] - r / (m_i * delta(x_i))

where ``m_i`` is the number of agents sharing agent ``i``'s arrival time and
route. Route indices are 1-based everywhere in the public API.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from .exceptions import (
    BetaOrderViolated,
    ConfigError,
    InvalidRouteIndex,
    NonIncreasingDifficulties,
    NonPositiveParameter,
    TerritoryOrderViolated,
)

__all__ = [
    "AgentParams",
    "RouteSet",
    "Territories",
    "GameConfig",
    "ActionProfile",
    "validate_config",
    "benefit",
    "travel_cost",
    "risk",
    "evaluate_utility",
    "utility_arrays",
]


def _require_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise NonPositiveParameter(f"{name} must be a positive finite number, got {value!r}")
    return value


@dataclass(frozen=True)
class AgentParams:
    """Strength ``beta`` and marginal travel cost ``c_o`` of one agent."""

    beta: float
    c_o: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta", _require_positive("beta", self.beta))
        object.__setattr__(self, "c_o", _require_positive("c_o", self.c_o))


@dataclass(frozen=True)
class RouteSet:
    """Route difficulties, strictly increasing with the easiest route first."""

    deltas: tuple[float, ...]

    def __post_init__(self) -> None:
        deltas = tuple(float(d) for d in self.deltas)
        if not deltas:
            raise NonIncreasingDifficulties("at least one route is required")
        if any(not math.isfinite(d) for d in deltas):
            raise NonPositiveParameter(f"route difficulties must be finite, got {deltas}")
        if deltas[0] < 1:
            raise NonIncreasingDifficulties(f"easiest route difficulty must be >= 1, got {deltas[0]}")
        if any(b <= a for a, b in zip(deltas, deltas[1:])):
            raise NonIncreasingDifficulties(f"difficulties must be strictly increasing, got {deltas}")
        object.__setattr__(self, "deltas", deltas)

    @property
    def n(self) -> int:
        return len(self.deltas)

    def delta(self, route: int) -> float:
        """Difficulty of 1-based ``route``."""
        if isinstance(route, bool) or not isinstance(route, (int, np.integer)):
            raise InvalidRouteIndex(f"route index must be an integer, got {route!r}")
        if not 1 <= route <= self.n:
            raise InvalidRouteIndex(f"route {route} outside 1..{self.n}")
        return self.deltas[route - 1]

    def ratio(self, route: int) -> float:
        """Difficulty of ``route`` relative to route 1 (lambda_k)."""
        return self.delta(route) / self.deltas[0]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.deltas, dtype=float)


@dataclass(frozen=True)
class Territories:
    e1: float
    e2: float

    def __post_init__(self) -> None:
        e1 = _require_positive("E1", self.e1)
        e2 = _require_positive("E2", self.e2)
        if e1 <= e2:
            raise TerritoryOrderViolated(f"need E1 > E2, got E1={e1}, E2={e2}")
        object.__setattr__(self, "e1", e1)
        object.__setattr__(self, "e2", e2)

    @property
    def gap(self) -> float:
        return self.e1 - self.e2


@dataclass(frozen=True)
class GameConfig:
    agent1: AgentParams
    agent2: AgentParams
    routes: RouteSet
    territories: Territories
    r: float
    t_o: float

    def __post_init__(self) -> None:
        if self.agent1.beta <= self.agent2.beta:
            raise BetaOrderViolated(
                f"agent 1 must be stronger: beta1={self.agent1.beta}, beta2={self.agent2.beta}"
            )
        object.__setattr__(self, "r", _require_positive("r", self.r))
        t_o = float(self.t_o)
        if not math.isfinite(t_o):
            raise ConfigError(f"t_o must be finite, got {t_o!r}")
        object.__setattr__(self, "t_o", t_o)

    @property
    def homogeneous(self) -> bool:
        return self.agent1.c_o == self.agent2.c_o

    @property
    def n_routes(self) -> int:
        return self.routes.n

    @property
    def lam(self) -> float:
        """Difficulty ratio of route 2 to route 1; only defined for n >= 2."""
        if self.routes.n < 2:
            raise InvalidRouteIndex("lambda needs at least two routes")
        return self.routes.ratio(2)

    def agent(self, i: int) -> AgentParams:
        if i == 1:
            return self.agent1
        if i == 2:
            return self.agent2
        raise ValueError(f"agent must be 1 or 2, got {i!r}")

    def to_dict(self) -> dict[str, Any]:
        """Inverse of :func:`validate_config`."""
        c_o: Any = self.agent1.c_o if self.homogeneous else [self.agent1.c_o, self.agent2.c_o]
        return {
            "beta": [self.agent1.beta, self.agent2.beta],
            "c_o": c_o,
            "delta": list(self.routes.deltas),
            "E": [self.territories.e1, self.territories.e2],
            "r": self.r,
            "t_o": self.t_o,
        }


@dataclass(frozen=True)
class ActionProfile:
    """Joint decision ``(t1, x1, t2, x2)`` with 1-based routes."""

    t1: float
    x1: int
    t2: float
    x2: int

    def time(self, agent: int) -> float:
        return self.t1 if agent == 1 else self.t2

    def route(self, agent: int) -> int:
        return self.x1 if agent == 1 else self.x2

    def as_tuple(self) -> tuple[float, int, float, int]:
        return (self.t1, self.x1, self.t2, self.x2)


def _pair(raw: Mapping[str, Any], key: str) -> tuple[float, float]:
    value = raw[key]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value), float(value)
    if not isinstance(value, Sequence) or isinstance(value, str) or len(value) != 2:
        raise ConfigError(f"{key!r} must be an array of two numbers, got {value!r}")
    return float(value[0]), float(value[1])


def validate_config(raw: Mapping[str, Any] | GameConfig) -> GameConfig:
    """Build a :class:`GameConfig` from a JSON-style mapping.

    Expected keys are ``beta`` (two strengths), ``c_o`` (scalar for a
    homogeneous game or two values), ``delta``, ``E`` (two territory values,
    best first), ``r`` and ``t_o``. Raises a :class:`ConfigError` subclass on
    any violated ordering.
    """
    if isinstance(raw, GameConfig):
        return raw
    if not isinstance(raw, Mapping):
        raise ConfigError(f"config must be a mapping, got {type(raw).__name__}")
    missing = [k for k in ("beta", "c_o", "delta", "E", "r", "t_o") if k not in raw]
    if missing:
        raise ConfigError(f"config is missing keys: {', '.join(missing)}")
    if isinstance(raw["beta"], (int, float)):
        raise ConfigError("'beta' must be an array of two numbers")
    if isinstance(raw["E"], (int, float)):
        raise ConfigError("'E' must be an array of two numbers")
    beta1, beta2 = _pair(raw, "beta")
    c1, c2 = _pair(raw, "c_o")
    e1, e2 = _pair(raw, "E")
    delta = raw["delta"]
    if isinstance(delta, (int, float)) and not isinstance(delta, bool):
        delta = [delta]
    try:
        deltas = tuple(float(d) for d in delta)
        r = float(raw["r"])
        t_o = float(raw["t_o"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"non-numeric config value: {exc}") from None
    return GameConfig(
        agent1=AgentParams(beta1, c1),
        agent2=AgentParams(beta2, c2),
        routes=RouteSet(deltas),
        territories=Territories(e1, e2),
        r=r,
        t_o=t_o,
    )


def benefit(t1: float, t2: float, territories: Territories) -> tuple[float, float]:
    """First come, first served; a tie goes to the stronger agent 1."""
    if t1 <= t2:
        return territories.e1, territories.e2
    return territories.e2, territories.e1


def travel_cost(agent: AgentParams, t: float, route: int, config: GameConfig) -> float:
    return (t - config.t_o) ** 2 / agent.beta + agent.c_o * config.routes.delta(route)


def risk(profile: ActionProfile, config: GameConfig, agent: int) -> float:
    # Exact comparison: flocking is a knife-edge event by definition.
    t, x = profile.time(agent), profile.route(agent)
    other = 2 if agent == 1 else 1
    m = 2 if (profile.time(other) == t and profile.route(other) == x) else 1
    return config.r / (m * config.routes.delta(x))


def evaluate_utility(profile: ActionProfile, config: GameConfig) -> tuple[float, float]:
    e1, e2 = benefit(profile.t1, profile.t2, config.territories)
    u1 = e1 - travel_cost(config.agent1, profile.t1, profile.x1, config) - risk(profile, config, 1)
    u2 = e2 - travel_cost(config.agent2, profile.t2, profile.x2, config) - risk(profile, config, 2)
    return u1, u2


def utility_arrays(t1, x1, t2, x2, config: GameConfig, agent: int | None = None):
    """Broadcasting version of :func:`evaluate_utility`.

    Arguments are array-likes that broadcast against each other; routes are
    1-based integer arrays. Returns ``(u1, u2)``, or only agent ``agent``'s
    array when given. Each term is built at its own broadcast shape, so
    the full shape is only paid for the benefit and risk terms.
    """
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    x1 = np.asarray(x1, dtype=int)
    x2 = np.asarray(x2, dtype=int)
    n = config.routes.n
    if ((x1 < 1) | (x1 > n)).any() or ((x2 < 1) | (x2 > n)).any():
        raise InvalidRouteIndex(f"route indices must lie in 1..{n}")
    deltas = config.routes.as_array()
    d1 = deltas[x1 - 1]
    d2 = deltas[x2 - 1]
    first = t1 <= t2
    flock = (t1 == t2) & (x1 == x2)
    e = config.territories

    def one(i: int) -> np.ndarray:
        a, t, d = (config.agent1, t1, d1) if i == 1 else (config.agent2, t2, d2)
        won = first if i == 1 else ~first
        fixed = (t - config.t_o) ** 2 / a.beta + a.c_o * d
        solo_risk = config.r / d
        return np.where(won, e.e1, e.e2) - fixed - np.where(flock, 0.5 * solo_risk, solo_risk)

    if agent is not None:
        return one(agent)
    return one(1), one(2)
