"""Config builders and random samplers shared by the test modules.

Samplers construct configs inside a chosen region of the case table and
return the expected equilibrium set alongside, derived from the region
they were built in rather than from the solver under test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from stackelroute import GameConfig, validate_config


def make_config(
    c_o=0.1,
    E=(5.0, 4.8),
    delta=(1.0, 2.0),
    beta=(2.0, 1.0),
    r=1.0,
    t_o=10.0,
) -> GameConfig:
    return validate_config({"beta": list(beta), "c_o": c_o, "delta": list(delta), "E": list(E), "r": r, "t_o": t_o})


def tip(E1: float, E2: float, beta2: float, t_o: float) -> float:
    return t_o - math.sqrt((E1 - E2) * beta2)


def step_for(t_o: float, T: float) -> float:
    return 1e-3 * (t_o - T) if t_o > T else 1e-3


# Case table written out by hand: (case, cooperative) -> [(time, route)]
# where time is "o" (t_o) or "T"; the follower always arrives at t_o on the same route.
EXPECTED_TABLE = {
    (1, True): [("o", 2)],
    (1, False): [("T", 2)],
    (2, True): [("o", 1), ("o", 2)],
    (2, False): [("T", 2)],
    (3, True): [("o", 1)],
    (3, False): [("T", 2)],
    (4, True): [("o", 1)],
    (4, False): [("T", 1)],
    (5, True): [("o", 1)],
    (5, False): [("T", 1), ("T", 2)],
}


def gap_threshold(case_id: int, c_o: float, d1: float, lam: float, r: float) -> float:
    if case_id in (1, 2):
        return r / (2 * lam * d1)
    if case_id in (3, 5):
        return (lam - 1) * c_o * d1 - (lam - 2) * r / (2 * lam * d1)
    return r / (2 * d1)


@dataclass
class Sample:
    config: GameConfig
    case_id: int
    cooperative: bool
    h: float
    T: float
    expected: list[tuple[float, int]]


def sample_two_route(rng: np.random.Generator, case_id: int, cooperative: bool) -> Sample:
    """Random homogeneous 2-route config in the given case/side with a 10h margin from every boundary."""
    while True:
        d1 = rng.uniform(1.0, 3.0)
        lam = rng.uniform(1.2, 4.0)
        r = rng.uniform(0.5, 2.0)
        beta2 = rng.uniform(0.5, 3.0)
        beta1 = beta2 * rng.uniform(1.1, 3.0)
        t_o = rng.uniform(-5.0, 20.0)
        E1 = rng.uniform(4.0, 10.0)
        lo, hi = r / (2 * lam), r / lam
        if case_id == 1:
            x = rng.uniform(0.05, 0.95) * lo
        elif case_id == 2:
            x = lo
        elif case_id == 3:
            x = lo + rng.uniform(0.05, 0.95) * (hi - lo)
        elif case_id == 4:
            x = hi * rng.uniform(1.05, 2.0)
        else:
            x = hi
        c_o = x / d1**2
        thr = gap_threshold(case_id, c_o, d1, lam, r)
        if cooperative:
            gap = thr * rng.uniform(0.05, 0.9)
        else:
            gap = thr * rng.uniform(1.1, 3.0) + rng.uniform(0.0, 0.5)
        if gap >= 0.9 * E1:
            continue
        E2 = E1 - gap
        T = tip(E1, E2, beta2, t_o)
        h = step_for(t_o, T)
        margins = [abs(gap - thr)]
        if case_id != 2:
            margins.append(abs(x - lo))
        if case_id != 5:
            margins.append(abs(x - hi))
        if min(margins) < 10 * h:
            continue
        config = validate_config(
            {"beta": [beta1, beta2], "c_o": c_o, "delta": [d1, lam * d1], "E": [E1, E2], "r": r, "t_o": t_o}
        )
        expected = [(t_o if tag == "o" else T, route) for tag, route in EXPECTED_TABLE[(case_id, cooperative)]]
        return Sample(config, case_id, cooperative, h, T, expected)


def random_config(rng: np.random.Generator, n_routes: int | None = None, homogeneous: bool = True) -> GameConfig:
    n = n_routes or int(rng.integers(1, 6))
    deltas = np.cumsum(rng.uniform(0.1, 2.0, size=n)) + rng.uniform(0.0, 2.0)
    deltas = deltas - deltas[0] + rng.uniform(1.0, 3.0)
    beta2 = rng.uniform(0.3, 4.0)
    E1 = rng.uniform(1.0, 10.0)
    c = rng.uniform(0.01, 1.0)
    c_o = c if homogeneous else [c, c * rng.uniform(1.05, 3.0)]
    return validate_config(
        {
            "beta": [beta2 * rng.uniform(1.05, 4.0), beta2],
            "c_o": c_o,
            "delta": deltas.tolist(),
            "E": [E1, E1 * rng.uniform(0.05, 0.99)],
            "r": rng.uniform(0.1, 3.0),
            "t_o": rng.uniform(-10.0, 30.0),
        }
    )
