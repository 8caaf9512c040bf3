"""Subgame perfect equilibria of the two-agent timing-and-route Stackelberg game."""

from .analytic import (
    BestResponse,
    CaseClassification,
    CaseTag,
    Equilibrium,
    Kind,
    RouteMode,
    best_response_agent2,
    classify_case,
    optimal_route,
    solve,
    solve_heterogeneous,
    solve_n_route,
    solve_one_route,
    solve_two_route,
    tipping_time,
)
from .core import (
    ActionProfile,
    AgentParams,
    GameConfig,
    RouteSet,
    Territories,
    benefit,
    evaluate_utility,
    risk,
    travel_cost,
    validate_config,
)
from .oracle import build_grid, oracle_best_response, oracle_solve, verify_spe

__version__ = "0.1.0"
