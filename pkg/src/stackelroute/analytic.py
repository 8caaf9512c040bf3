"""Closed-form subgame perfect equilibria.

Homogeneous games (both agents share the marginal cost ``c_o``) have only two
equilibrium shapes: cooperation ``(t_o, x, t_o, x)`` and competition
``(T, x, t_o, x)`` with the tipping time ``T = t_o - sqrt((E1 - E2) * beta2)``.
For two routes the route and the cooperate/compete decision follow a
five-way case table on ``c_o * delta1**2`` against ``r / (2 lam)`` and
``r / lam``. With agent-specific costs the agents may split across routes
("neutrality"), which :func:`solve_heterogeneous` settles by explicit
utility comparison over a finite candidate set.

Ties follow one fixed ledger throughout: equal routes go to the lowest
index, an indifferent follower cooperates (arrives later), and a leader
indifferent between routes yields every tied equilibrium.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any

from .core import ActionProfile, GameConfig, evaluate_utility, travel_cost
from .exceptions import (
    CostOrderViolated,
    HeterogeneousCosts,
    NotOneRoute,
    NotTwoRoutes,
)

__all__ = [
    "REL_TOL",
    "Kind",
    "CaseTag",
    "RouteMode",
    "Equilibrium",
    "BestResponse",
    "CaseClassification",
    "infer_kind",
    "tipping_time",
    "optimal_route",
    "classify_case",
    "best_response_agent2",
    "response_utility",
    "solve_two_route",
    "solve_n_route",
    "solve_one_route",
    "solve_heterogeneous",
    "solve",
]

REL_TOL = 1e-12
_ABS_TOL = 1e-12

CASE5_NOTE = (
    "solo costs of both routes tie; both competitive equilibria are reported, "
    "the lowest-index tie-break alone would select route 1"
)


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=REL_TOL, abs_tol=_ABS_TOL)


def _leq(a: float, b: float) -> bool:
    return a <= b or _close(a, b)


class Kind(str, enum.Enum):
    COOPERATION = "Cooperation"
    COMPETITION = "Competition"
    NEUTRAL_COOPERATION = "NeutralCooperation"
    NEUTRAL_COMPETITION = "NeutralCompetition"


class CaseTag(str, enum.Enum):
    CASE1 = "Case1"
    CASE2 = "Case2"
    CASE3 = "Case3"
    CASE4 = "Case4"
    CASE5 = "Case5"
    NROUTE = "NRoute"
    ONE_ROUTE = "OneRoute"
    HETEROGENEOUS = "Heterogeneous"
    ORACLE = "Oracle"

    @classmethod
    def for_case(cls, case_id: int) -> CaseTag:
        return cls(f"Case{case_id}")


class RouteMode(str, enum.Enum):
    SOLO = "solo"
    FLOCK = "flock"


def infer_kind(profile: ActionProfile) -> Kind:
    same_time = profile.t1 == profile.t2
    same_route = profile.x1 == profile.x2
    if same_time:
        return Kind.COOPERATION if same_route else Kind.NEUTRAL_COOPERATION
    return Kind.COMPETITION if same_route else Kind.NEUTRAL_COMPETITION


@dataclass(frozen=True)
class Equilibrium:
    profile: ActionProfile
    kind: Kind
    case_tag: CaseTag
    tipping_time: float | None = None
    note: str | None = None

    def utilities(self, config: GameConfig) -> tuple[float, float]:
        return evaluate_utility(self.profile, config)

    def to_record(self, config: GameConfig, digits: int = 9) -> dict[str, Any]:
        """JSON-ready record; floats rounded to ``digits`` significant digits."""

        def fmt(v: float) -> float:
            return float(f"{v:.{digits}g}")

        p = self.profile
        u1, u2 = self.utilities(config)
        record: dict[str, Any] = {
            "profile": {"t1": fmt(p.t1), "x1": p.x1, "t2": fmt(p.t2), "x2": p.x2},
            "kind": self.kind.value,
            "case": self.case_tag.value,
            "tipping_time": None if self.tipping_time is None else fmt(self.tipping_time),
            "utilities": [fmt(u1), fmt(u2)],
        }
        if self.note:
            record["note"] = self.note
        return record


@dataclass(frozen=True)
class BestResponse:
    """Agent 2's reply.

    With ``preempt=True`` the reply is the left limit "arrive just before
    ``t`` on route ``x``": the follower takes the better territory, travels
    alone, and its time cost is evaluated at ``t`` itself. No attained
    optimum exists in continuous time in that situation.
    """

    t: float
    x: int
    preempt: bool = False


@dataclass(frozen=True)
class CaseClassification:
    case_id: int
    cost_risk_value: float
    thresholds: tuple[float, float]
    territory_gap: float
    gap_threshold: float

    @property
    def cooperative(self) -> bool:
        return _leq(self.territory_gap, self.gap_threshold)


def tipping_time(config: GameConfig) -> float:
    """Latest leader arrival that still leaves the follower indifferent to preempting."""
    gap = config.territories.e1 - config.territories.e2
    return config.t_o - math.sqrt(gap * config.agent2.beta)


def _route_score(config: GameConfig, mode: RouteMode, c_o: float, route: int) -> float:
    d = config.routes.delta(route)
    share = 2.0 if mode is RouteMode.FLOCK else 1.0
    return c_o * d + config.r / (share * d)


def optimal_route(config: GameConfig, mode: RouteMode | str, agent: int = 1) -> int:
    """Route minimising marginal cost plus risk for ``agent``; ties go to the lowest index."""
    mode = RouteMode(mode)
    c_o = config.agent(agent).c_o
    scores = [_route_score(config, mode, c_o, k) for k in range(1, config.n_routes + 1)]
    best = min(scores)
    return next(k for k, s in enumerate(scores, start=1) if _leq(s, best))


def classify_case(config: GameConfig) -> CaseClassification:
    _require_two_route_homogeneous(config)
    d1 = config.routes.deltas[0]
    lam = config.lam
    c_o, r = config.agent1.c_o, config.r
    value = c_o * d1**2
    lo, hi = r / (2 * lam), r / lam
    if math.isclose(value, lo, rel_tol=REL_TOL):
        case_id = 2
    elif math.isclose(value, hi, rel_tol=REL_TOL):
        case_id = 5
    elif value < lo:
        case_id = 1
    elif value < hi:
        case_id = 3
    else:
        case_id = 4
    if case_id in (1, 2):
        threshold = r / (2 * lam * d1)
    elif case_id in (3, 5):
        threshold = (lam - 1) * c_o * d1 - (lam - 2) * r / (2 * lam * d1)
    else:
        threshold = r / (2 * d1)
    return CaseClassification(
        case_id=case_id,
        cost_risk_value=value,
        thresholds=(lo, hi),
        territory_gap=config.territories.gap,
        gap_threshold=threshold,
    )


def _require_two_route_homogeneous(config: GameConfig) -> None:
    if config.n_routes != 2:
        raise NotTwoRoutes(f"expected exactly 2 routes, got {config.n_routes}")
    if not config.homogeneous:
        raise HeterogeneousCosts("closed-form table needs equal marginal costs")


def _solo_cost(config: GameConfig, agent: int, route: int) -> float:
    a = config.agent(agent)
    return a.c_o * config.routes.delta(route) + config.r / config.routes.delta(route)


def response_utility(t1: float, x1: int, br: BestResponse, config: GameConfig) -> tuple[float, float]:
    """Utilities of leader action ``(t1, x1)`` answered by ``br``, left limits included."""
    if not br.preempt:
        return evaluate_utility(ActionProfile(t1, x1, br.t, br.x), config)
    e = config.territories
    u1 = e.e2 - travel_cost(config.agent1, t1, x1, config) - config.r / config.routes.delta(x1)
    u2 = e.e1 - travel_cost(config.agent2, br.t, br.x, config) - config.r / config.routes.delta(br.x)
    return u1, u2


def _follower_candidates(t1: float, config: GameConfig) -> list[BestResponse]:
    routes = range(1, config.n_routes + 1)
    cands = [BestResponse(config.t_o, x) for x in routes]
    if t1 != config.t_o:
        cands += [BestResponse(t1, x) for x in routes]
    if t1 <= config.t_o:
        # Beyond t_o, arriving at t_o already beats the left limit.
        cands += [BestResponse(t1, x, preempt=True) for x in routes]
    return cands


def best_response_agent2(t1: float, x1: int, config: GameConfig) -> BestResponse:
    """Follower's utility-maximising reply to the leader's ``(t1, x1)``.

    Candidates are every route at ``t_o``, every route at ``t1`` and the
    left-limit preemption of ``t1`` on every route. Near-ties (relative
    1e-12) prefer an attained arrival over the limit, then the later time,
    then the lower route index.
    """
    config.routes.delta(x1)
    scored = [(response_utility(t1, x1, br, config)[1], br) for br in _follower_candidates(t1, config)]
    best = max(u for u, _ in scored)
    tied = [br for u, br in scored if _close(u, best) or u >= best]
    return min(tied, key=lambda br: (br.preempt, -br.t, br.x))


def _make(
    config: GameConfig,
    t1: float,
    x1: int,
    x2: int,
    tag: CaseTag,
    note: str | None = None,
    t2: float | None = None,
) -> Equilibrium:
    profile = ActionProfile(t1, x1, config.t_o if t2 is None else t2, x2)
    return Equilibrium(
        profile=profile,
        kind=infer_kind(profile),
        case_tag=tag,
        tipping_time=None if t1 == profile.t2 else tipping_time(config),
        note=note,
    )


def solve_two_route(config: GameConfig) -> list[Equilibrium]:
    """All pure-strategy equilibria of the homogeneous two-route game."""
    cls = classify_case(config)
    t_o, T = config.t_o, tipping_time(config)
    tag = CaseTag.for_case(cls.case_id)
    coop = cls.cooperative
    if cls.case_id == 1:
        return [_make(config, t_o, 2, 2, tag)] if coop else [_make(config, T, 2, 2, tag)]
    if cls.case_id == 2:
        if coop:
            return [_make(config, t_o, 1, 1, tag), _make(config, t_o, 2, 2, tag)]
        return [_make(config, T, 2, 2, tag)]
    if cls.case_id == 3:
        return [_make(config, t_o, 1, 1, tag)] if coop else [_make(config, T, 2, 2, tag)]
    if cls.case_id == 4:
        return [_make(config, t_o, 1, 1, tag)] if coop else [_make(config, T, 1, 1, tag)]
    if coop:
        return [_make(config, t_o, 1, 1, tag)]
    return [_make(config, T, 1, 1, tag, CASE5_NOTE), _make(config, T, 2, 2, tag, CASE5_NOTE)]


def solve_n_route(config: GameConfig) -> list[Equilibrium]:
    """Unique equilibrium of the homogeneous game with any number of routes.

    Only two routes matter: the flocking optimum and the solo optimum. The
    follower cooperates iff sharing the flocking route is worth at least as
    much as taking the better territory alone on the solo route.
    """
    if not config.homogeneous:
        raise HeterogeneousCosts("n-route closed form needs equal marginal costs")
    x_flock = optimal_route(config, RouteMode.FLOCK)
    x_solo = optimal_route(config, RouteMode.SOLO)
    e = config.territories
    cooperate = e.e2 - _route_score(config, RouteMode.FLOCK, config.agent1.c_o, x_flock)
    compete = e.e1 - _route_score(config, RouteMode.SOLO, config.agent1.c_o, x_solo)
    if _leq(compete, cooperate):
        return [_make(config, config.t_o, x_flock, x_flock, CaseTag.NROUTE)]
    return [_make(config, tipping_time(config), x_solo, x_solo, CaseTag.NROUTE)]


def solve_one_route(config: GameConfig) -> list[Equilibrium]:
    if config.n_routes != 1:
        raise NotOneRoute(f"expected exactly 1 route, got {config.n_routes}")
    d1 = config.routes.deltas[0]
    if _leq(config.territories.gap, config.r / (2 * d1)):
        return [_make(config, config.t_o, 1, 1, CaseTag.ONE_ROUTE)]
    return [_make(config, tipping_time(config), 1, 1, CaseTag.ONE_ROUTE)]


def _leader_candidates(config: GameConfig) -> list[tuple[float, int]]:
    # Leader utility rises toward t_o under cooperation and toward T under
    # competition, so these two times exhaust the leader's optima.
    times = [config.t_o]
    T = tipping_time(config)
    if T != config.t_o:
        times.append(T)
    return [(t, x) for t in times for x in range(1, config.n_routes + 1)]


def _leader_values(config: GameConfig) -> list[tuple[float, float, int, BestResponse]]:
    out = []
    for t1, x1 in _leader_candidates(config):
        br = best_response_agent2(t1, x1, config)
        out.append((response_utility(t1, x1, br, config)[0], t1, x1, br))
    return out


def _has_profitable_deviation(eq: Equilibrium, config: GameConfig) -> bool:
    p = eq.profile
    u1, u2 = evaluate_utility(p, config)
    follower = (response_utility(p.t1, p.x1, br, config)[1] for br in _follower_candidates(p.t1, config))
    if any(v > u2 and not _close(v, u2) for v in follower):
        return True
    return any(v > u1 and not _close(v, u1) for v, *_ in _leader_values(config))


def solve_heterogeneous(config: GameConfig) -> list[Equilibrium]:
    """Equilibria of the two-route game with agent-specific marginal costs.

    Each leader candidate (both routes at ``t_o`` and at the tipping time)
    is answered with :func:`best_response_agent2`; the leader's best
    candidates are returned, after an exhaustive deviation check. A split
    of routes yields a ``Neutral*`` kind.
    """
    if config.n_routes != 2:
        raise NotTwoRoutes(f"expected exactly 2 routes, got {config.n_routes}")
    c1, c2 = config.agent1.c_o, config.agent2.c_o
    if c1 > c2:
        raise CostOrderViolated(f"need c_o1 <= c_o2, got {c1} > {c2}")
    if c1 == c2:
        return solve_two_route(config)

    values = _leader_values(config)
    best = max(v for v, *_ in values)
    result = []
    for v, t1, x1, br in values:
        if not (_close(v, best) or v >= best):
            continue
        if br.preempt:
            raise RuntimeError("leader optimum answered by preemption; candidate set is incomplete")
        result.append(_make(config, t1, x1, br.x, CaseTag.HETEROGENEOUS, t2=br.t))
    for eq in result:
        if _has_profitable_deviation(eq, config):
            raise RuntimeError(f"deviation check failed for {eq.profile}")
    return result


def solve(config: GameConfig) -> list[Equilibrium]:
    """Dispatch on route count and cost homogeneity.

    Heterogeneous games with more than two routes have no closed form;
    use :func:`stackelroute.oracle.oracle_solve` for those.
    """
    if config.n_routes == 1:
        return solve_one_route(config)
    if not config.homogeneous:
        if config.n_routes == 2:
            return solve_heterogeneous(config)
        raise HeterogeneousCosts("heterogeneous costs with more than two routes need the grid oracle")
    if config.n_routes == 2:
        return solve_two_route(config)
    return solve_n_route(config)
