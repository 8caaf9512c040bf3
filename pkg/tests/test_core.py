import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stackelroute import (
    ActionProfile,
    AgentParams,
    Territories,
    benefit,
    evaluate_utility,
    risk,
    travel_cost,
    validate_config,
)
from stackelroute.core import utility_arrays
from stackelroute.exceptions import (
    BetaOrderViolated,
    ConfigError,
    InvalidRouteIndex,
    NonIncreasingDifficulties,
    NonPositiveParameter,
    TerritoryOrderViolated,
)

from helpers import make_config

BASE = {"beta": [2, 1], "c_o": [0.1, 0.1], "delta": [1, 2], "E": [5, 3], "r": 1, "t_o": 10}


def raw(**overrides):
    return {**BASE, **overrides}


class TestValidateConfig:
    def test_valid(self):
        cfg = validate_config(raw())
        assert cfg.agent1 == AgentParams(2.0, 0.1)
        assert cfg.routes.deltas == (1.0, 2.0)
        assert cfg.homogeneous
        assert cfg.lam == 2.0

    @pytest.mark.parametrize(
        "overrides, error",
        [
            ({"beta": [1, 2]}, BetaOrderViolated),
            ({"beta": [1, 1]}, BetaOrderViolated),
            ({"delta": [2, 1]}, NonIncreasingDifficulties),
            ({"delta": [1, 1]}, NonIncreasingDifficulties),
            ({"delta": [0.5, 2]}, NonIncreasingDifficulties),
            ({"E": [3, 5]}, TerritoryOrderViolated),
            ({"E": [3, 3]}, TerritoryOrderViolated),
            ({"E": [5, 0]}, NonPositiveParameter),
            ({"r": 0}, NonPositiveParameter),
            ({"c_o": -0.1}, NonPositiveParameter),
            ({"beta": [2, -1]}, NonPositiveParameter),
        ],
    )
    def test_errors(self, overrides, error):
        with pytest.raises(error):
            validate_config(raw(**overrides))

    def test_errors_are_config_errors(self):
        with pytest.raises(ConfigError):
            validate_config(raw(beta=[1, 2]))

    def test_missing_key(self):
        bad = raw()
        del bad["t_o"]
        with pytest.raises(ConfigError, match="t_o"):
            validate_config(bad)

    def test_scalar_c_o_means_homogeneous(self):
        cfg = validate_config(raw(c_o=0.3))
        assert cfg.agent1.c_o == cfg.agent2.c_o == 0.3

    def test_heterogeneous_flag(self):
        assert not validate_config(raw(c_o=[0.1, 0.2])).homogeneous

    def test_round_trip(self):
        cfg = validate_config(raw(c_o=[0.1, 0.2], delta=[1, 2, 5]))
        assert validate_config(cfg.to_dict()) == cfg


class TestBenefit:
    E = Territories(5, 3)

    @pytest.mark.parametrize("t1, t2, expected", [(8, 10, (5, 3)), (10, 8, (3, 5)), (10, 10, (5, 3))])
    def test_first_come_first_served(self, t1, t2, expected):
        assert benefit(t1, t2, self.E) == expected

    @given(st.floats(-100, 100), st.floats(-100, 100))
    def test_zero_sum(self, t1, t2):
        assert sum(benefit(t1, t2, self.E)) == 8


class TestTravelCost:
    cfg = make_config(delta=(1, 2), t_o=10)

    def test_at_optimum(self):
        assert travel_cost(AgentParams(1, 0.1), 10, 1, self.cfg) == pytest.approx(0.1)

    def test_early(self):
        # (1/2) * 4 + 0.1
        assert travel_cost(AgentParams(2, 0.1), 8, 1, self.cfg) == pytest.approx(2.1)

    def test_harder_route(self):
        assert travel_cost(AgentParams(1, 0.1), 10, 2, self.cfg) == pytest.approx(0.2)

    @pytest.mark.parametrize("route", [0, 3, -1, 1.0, True])
    def test_invalid_route(self, route):
        with pytest.raises(InvalidRouteIndex):
            travel_cost(AgentParams(1, 0.1), 10, route, self.cfg)

    @given(st.floats(-50, 50).filter(lambda t: t != 10), st.integers(1, 2))
    def test_minimum_at_t_o(self, t, route):
        a = AgentParams(1.5, 0.1)
        assert travel_cost(a, t, route, self.cfg) > travel_cost(a, 10, route, self.cfg)

    @given(st.floats(-50, 50).filter(lambda t: abs(t - 10) > 1e-3), st.floats(0.1, 5), st.floats(1.01, 3))
    def test_decreasing_in_strength(self, t, beta, factor):
        weak, strong = AgentParams(beta, 0.1), AgentParams(beta * factor, 0.1)
        assert travel_cost(strong, t, 1, self.cfg) < travel_cost(weak, t, 1, self.cfg)


class TestRisk:
    cfg = make_config(delta=(1, 2), r=1)

    def test_shared(self):
        p = ActionProfile(10, 1, 10, 1)
        assert risk(p, self.cfg, 1) == risk(p, self.cfg, 2) == 0.5

    def test_same_time_different_routes(self):
        p = ActionProfile(10, 1, 10, 2)
        assert risk(p, self.cfg, 1) == 1.0
        assert risk(p, self.cfg, 2) == 0.5

    def test_different_times(self):
        p = ActionProfile(8, 1, 10, 1)
        assert risk(p, self.cfg, 1) == risk(p, self.cfg, 2) == 1.0

    @given(st.floats(-50, 50), st.integers(1, 3))
    def test_sharing_halves_exactly(self, t, x):
        cfg = make_config(delta=(1, 1.7, 4.2), r=1.3)
        together = risk(ActionProfile(t, x, t, x), cfg, 1)
        alone = risk(ActionProfile(t, x, t + 1, x), cfg, 1)
        assert together == alone / 2

    def test_decreasing_in_difficulty(self):
        cfg = make_config(delta=(1, 1.5, 3, 7))
        risks = [risk(ActionProfile(0, k, 1, k), cfg, 1) for k in range(1, 5)]
        assert all(a > b for a, b in zip(risks, risks[1:]))
        marginal = [cfg.agent1.c_o * cfg.routes.delta(k) for k in range(1, 5)]
        assert all(a < b for a, b in zip(marginal, marginal[1:]))


class TestEvaluateUtility:
    cfg = validate_config(BASE)

    @pytest.mark.parametrize(
        "profile, expected",
        [
            ((10, 1, 10, 1), (5 - 0.1 - 0.5, 3 - 0.1 - 0.5)),
            ((10, 1, 10, 2), (5 - 0.1 - 1, 3 - 0.2 - 0.5)),
            ((8, 1, 10, 1), (5 - 2 - 0.1 - 1, 3 - 0 - 0.1 - 1)),
        ],
    )
    def test_hand_evaluations(self, profile, expected):
        u = evaluate_utility(ActionProfile(*profile), self.cfg)
        assert u == pytest.approx(expected, abs=1e-12)

    def test_spec_values(self):
        assert evaluate_utility(ActionProfile(10, 1, 10, 1), self.cfg) == pytest.approx((4.4, 2.4))
        assert evaluate_utility(ActionProfile(10, 1, 10, 2), self.cfg) == pytest.approx((3.9, 2.3))
        assert evaluate_utility(ActionProfile(8, 1, 10, 1), self.cfg) == pytest.approx((1.9, 1.9))

    @settings(max_examples=200)
    @given(
        t1=st.floats(0, 20),
        t2=st.floats(0, 20),
        x1=st.integers(1, 3),
        x2=st.integers(1, 3),
        snap=st.booleans(),
    )
    def test_decomposes(self, t1, t2, x1, x2, snap):
        cfg = make_config(c_o=(0.2, 0.35), delta=(1.2, 2.0, 3.5), E=(7, 2), beta=(3, 1.5), r=2, t_o=9)
        if snap:
            t2 = t1
        p = ActionProfile(t1, x1, t2, x2)
        u1, u2 = evaluate_utility(p, cfg)
        # independent recomputation, term by term
        d = {1: 1.2, 2: 2.0, 3: 3.5}
        shared = t1 == t2 and x1 == x2
        e1, e2 = (7, 2) if t1 <= t2 else (2, 7)
        exp1 = e1 - ((t1 - 9) ** 2 / 3 + 0.2 * d[x1]) - 2 / ((2 if shared else 1) * d[x1])
        exp2 = e2 - ((t2 - 9) ** 2 / 1.5 + 0.35 * d[x2]) - 2 / ((2 if shared else 1) * d[x2])
        assert u1 == pytest.approx(exp1, rel=1e-12, abs=1e-12)
        assert u2 == pytest.approx(exp2, rel=1e-12, abs=1e-12)

    def test_array_version_matches_scalar(self):
        cfg = make_config(c_o=(0.2, 0.35), delta=(1.2, 2.0, 3.5), E=(7, 2), beta=(3, 1.5), r=2, t_o=9)
        rng = np.random.default_rng(0)
        t1 = rng.choice([8.0, 8.5, 9.0], size=200)
        t2 = rng.choice([8.0, 8.5, 9.0], size=200)
        x1 = rng.integers(1, 4, size=200)
        x2 = rng.integers(1, 4, size=200)
        a1, a2 = utility_arrays(t1, x1, t2, x2, cfg)
        for i in range(200):
            s1, s2 = evaluate_utility(ActionProfile(t1[i], int(x1[i]), t2[i], int(x2[i])), cfg)
            assert math.isclose(a1[i], s1, rel_tol=1e-12) and math.isclose(a2[i], s2, rel_tol=1e-12)
        assert np.array_equal(utility_arrays(t1, x1, t2, x2, cfg, agent=2), a2)

    def test_array_version_rejects_bad_routes(self):
        with pytest.raises(InvalidRouteIndex):
            utility_arrays([1.0], [0], [1.0], [1], self.cfg)
