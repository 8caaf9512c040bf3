"""Brute-force backward induction on a discretised strategy space.

The oracle exists to check the closed forms, so it only ever evaluates the
raw utility function. Arrival times live on a uniform grid ending exactly
at ``t_o``; arriving one grid step earlier is the discrete stand-in for
"arrive just before". All agreement tolerances are multiples of the step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import CaseTag, Equilibrium, infer_kind, tipping_time
from .core import ActionProfile, GameConfig, evaluate_utility, utility_arrays
from .exceptions import LeaderActionOffGrid, NonPositiveStep

__all__ = [
    "StrategyGrid",
    "Deviation",
    "DeviationReport",
    "ResponseTable",
    "build_grid",
    "default_step",
    "response_table",
    "oracle_best_response",
    "oracle_solve",
    "verify_spe",
    "snap_profile",
]

PAD_STEPS = 10
_TIE_ATOL = 1e-10
_TIE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class StrategyGrid:
    times: np.ndarray
    h: float
    n_routes: int

    @property
    def routes(self) -> range:
        return range(1, self.n_routes + 1)

    @property
    def t_min(self) -> float:
        return float(self.times[0])

    def index_of(self, t: float) -> int:
        """Exact (to 1e-9 of a step) grid index of ``t``."""
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-9 * self.h:
            raise LeaderActionOffGrid(f"time {t!r} is not on the grid (step {self.h})")
        return k

    def snap(self, t: float) -> float:
        """Nearest grid time when ``t`` lies within the grid's extent, else ``t`` unchanged."""
        if not self.t_min - 0.5 * self.h <= t <= self.times[-1] + 0.5 * self.h:
            return float(t)
        return float(self.times[int(np.argmin(np.abs(self.times - t)))])


def default_step(config: GameConfig, fraction: float = 1e-3) -> float:
    """``fraction * (t_o - T)``, or ``fraction`` when the span is degenerate."""
    span = config.t_o - tipping_time(config)
    return fraction * span if span > 0 else fraction


def build_grid(config: GameConfig, h: float) -> StrategyGrid:
    """Uniform grid ``t_o - k*h`` reaching at least ``PAD_STEPS`` steps below the tipping time."""
    h = float(h)
    if not h > 0 or not math.isfinite(h):
        raise NonPositiveStep(f"grid step must be positive, got {h!r}")
    span = max(config.t_o - tipping_time(config), 0.0)
    k = math.ceil(span / h - 1e-9) + PAD_STEPS
    times = config.t_o - h * np.arange(k, -1, -1, dtype=float)
    return StrategyGrid(times=times, h=h, n_routes=config.n_routes)


def _tie_mask(values: np.ndarray, axis: tuple[int, ...]) -> np.ndarray:
    best = values.max(axis=axis, keepdims=True)
    return values >= best - (_TIE_ATOL + _TIE_RTOL * np.abs(best))


def _pick(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Latest time index, then lowest route, among the True cells of ``mask[..., t, x]``."""
    n_t = mask.shape[-2]
    any_route = mask.any(axis=-1)
    t_idx = n_t - 1 - np.argmax(any_route[..., ::-1], axis=-1)
    rows = np.take_along_axis(mask, t_idx[..., None, None], axis=-2)[..., 0, :]
    x_idx = np.argmax(rows, axis=-1)
    return t_idx, x_idx


@dataclass(frozen=True, eq=False)
class ResponseTable:
    """Follower's best response to every leader grid action, indexed ``[x1 - 1, k1]``."""

    t2_idx: np.ndarray
    x2: np.ndarray
    u1: np.ndarray
    u2: np.ndarray


def _follower_block(config: GameConfig, grid: StrategyGrid, t1: np.ndarray, x1: int) -> np.ndarray:
    """Follower utility over ``[leader time, follower time, follower route]``."""
    t2 = grid.times[None, :, None]
    x2 = np.arange(1, grid.n_routes + 1)[None, None, :]
    return utility_arrays(t1[:, None, None], x1, t2, x2, config, agent=2)


def response_table(config: GameConfig, grid: StrategyGrid) -> ResponseTable:
    n, k = grid.n_routes, len(grid.times)
    t2_idx = np.empty((n, k), dtype=int)
    x2 = np.empty((n, k), dtype=int)
    u1 = np.empty((n, k))
    u2 = np.empty((n, k))
    for x1 in grid.routes:
        a2 = _follower_block(config, grid, grid.times, x1)
        ti, xi = _pick(_tie_mask(a2, axis=(1, 2)))
        t2_idx[x1 - 1], x2[x1 - 1] = ti, xi + 1
        u1[x1 - 1], u2[x1 - 1] = utility_arrays(grid.times, x1, grid.times[ti], xi + 1, config)
    return ResponseTable(t2_idx=t2_idx, x2=x2, u1=u1, u2=u2)


def oracle_best_response(t1: float, x1: int, config: GameConfig, grid: StrategyGrid) -> tuple[float, int]:
    k1 = grid.index_of(t1)
    config.routes.delta(x1)
    a2 = _follower_block(config, grid, grid.times[k1 : k1 + 1], x1)
    ti, xi = _pick(_tie_mask(a2, axis=(1, 2)))
    return float(grid.times[ti[0]]), int(xi[0]) + 1


def _leader_choice(table: ResponseTable) -> tuple[int, int]:
    # Leader values are [x1 - 1, k1]; transpose so _pick sees [t, x].
    t_idx, x_idx = _pick(_tie_mask(table.u1.T[None], axis=(1, 2)))
    return int(t_idx[0]), int(x_idx[0])


def oracle_solve(config: GameConfig, grid: StrategyGrid) -> Equilibrium:
    """Grid backward induction: follower best-response map first, then the leader's optimum."""
    table = response_table(config, grid)
    k1, i1 = _leader_choice(table)
    t1 = float(grid.times[k1])
    t2 = float(grid.times[table.t2_idx[i1, k1]])
    profile = ActionProfile(t1, i1 + 1, t2, int(table.x2[i1, k1]))
    return Equilibrium(
        profile=profile,
        kind=infer_kind(profile),
        case_tag=CaseTag.ORACLE,
        tipping_time=None if t1 == t2 else t1,
    )


@dataclass(frozen=True)
class Deviation:
    agent: int
    action: tuple[float, int]
    gain: float


@dataclass(frozen=True)
class DeviationReport:
    is_spe: bool
    best_deviation: Deviation | None = None
    margin: float = 0.0


def deviation_margin(config: GameConfig, grid: StrategyGrid) -> float:
    """Utility slack absorbing O(h) discretisation error in the deviation scan."""
    beta2 = config.agent2.beta
    return 2 * grid.h * (abs(config.t_o - grid.t_min) / beta2 + grid.h / beta2)


def snap_profile(profile: ActionProfile, grid: StrategyGrid) -> ActionProfile:
    return ActionProfile(grid.snap(profile.t1), profile.x1, grid.snap(profile.t2), profile.x2)


def verify_spe(candidate: ActionProfile, config: GameConfig, grid: StrategyGrid) -> DeviationReport:
    """Scan every unilateral grid deviation from ``candidate``.

    Candidate times inside the grid are snapped to it; times outside are
    evaluated as given. The follower is checked at the candidate's leader
    action; the leader is checked against the follower's full best-response
    map. Gains above :func:`deviation_margin` count as profitable; the
    largest is reported.
    """
    p = snap_profile(candidate, grid)
    u1, u2 = evaluate_utility(p, config)
    margin = deviation_margin(config, grid)

    a2 = _follower_block(config, grid, np.array([p.t1]), p.x1)[0]
    j, x = np.unravel_index(int(np.argmax(a2)), a2.shape)
    follower = Deviation(2, (float(grid.times[j]), int(x) + 1), float(a2[j, x] - u2))

    table = response_table(config, grid)
    i, k = np.unravel_index(int(np.argmax(table.u1)), table.u1.shape)
    leader = Deviation(1, (float(grid.times[k]), int(i) + 1), float(table.u1[i, k] - u1))

    best = max((follower, leader), key=lambda d: d.gain)
    if best.gain > margin:
        return DeviationReport(False, best, margin)
    return DeviationReport(True, None, margin)
