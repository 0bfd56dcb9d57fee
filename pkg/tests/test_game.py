import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repforward.game import (
    DoveStrategy,
    GameParams,
    NonViableRegimeError,
    PopulationState,
    brute_force_dove_strategy,
    dove_utility,
    hawk_utility,
    mean_utility,
    optimal_dove_strategy,
    optimal_s_h,
    payoff_matrix,
    reputation_drift,
)

from conftest import random_viable_params, viable_params


class TestParams:
    def test_delta_g_defaults_to_delta_r(self):
        assert GameParams(3, 2.5, 1).delta_g == 2.5

    @pytest.mark.parametrize("kwargs", [
        dict(lam=0, delta_r=1, delta_b=1),
        dict(lam=2, delta_r=-1, delta_b=1),
        dict(lam=2, delta_r=1, delta_b=0),
        dict(lam=2, delta_r=1, delta_b=2, delta_g=1),
        dict(lam=float("nan"), delta_r=1, delta_b=1),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            GameParams(**kwargs)

    @pytest.mark.parametrize("s_d,s_h", [(-0.1, 0), (0, 1.2)])
    def test_strategy_bounds(self, s_d, s_h):
        with pytest.raises(ValueError):
            DoveStrategy(s_d, s_h)

    def test_population_state(self):
        assert PopulationState(0.25).hawk_share == 0.75
        with pytest.raises(ValueError):
            PopulationState(1.5)


@pytest.mark.parametrize("lam,expected", [
    (3, [[2, -1], [3, 0]]),
    (1, [[0, -1], [1, 0]]),
    (0.5, [[-0.5, -1], [0.5, 0]]),
])
def test_payoff_matrix(lam, expected):
    m = payoff_matrix(GameParams(lam, 1, 1))
    np.testing.assert_array_equal(m.entries, expected)
    assert m["NC", "C"] == lam


@pytest.mark.parametrize("s_d,s_h,p,expected", [
    (1, 0, 1, 2.0),
    (1, 1, 0, -1.0),
    (1, 0.25, 0.5, 0.875),
])
def test_dove_utility(ref_params, s_d, s_h, p, expected):
    assert dove_utility(ref_params, DoveStrategy(s_d, s_h), p) == pytest.approx(expected, abs=1e-15)


def test_dove_utility_rejects_bad_share(ref_params):
    with pytest.raises(ValueError):
        dove_utility(ref_params, DoveStrategy(1, 0), 1.01)


@pytest.mark.parametrize("s_h,p,expected", [(0.6, 0, 0.0), (1, 1, 3.0), (0.25, 0.5, 0.375)])
def test_hawk_utility(ref_params, s_h, p, expected):
    assert hawk_utility(ref_params, s_h, p) == pytest.approx(expected, abs=1e-15)


def test_hawk_utility_rejects_bad_inputs(ref_params):
    with pytest.raises(ValueError):
        hawk_utility(ref_params, 1.5, 0.5)
    with pytest.raises(ValueError):
        hawk_utility(ref_params, 0.5, -0.5)


@pytest.mark.parametrize("s_d,s_h,p,expected", [
    (1, 0.3, 0, 0.0),
    (1, 0, 1, 2.0),
    (1, 0.25, 0.5, 0.625),
])
def test_mean_utility(ref_params, s_d, s_h, p, expected):
    assert mean_utility(ref_params, DoveStrategy(s_d, s_h), p) == pytest.approx(expected, abs=1e-15)


@given(viable_params(), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_mean_utility_identity(params, s_d, s_h, p):
    strat = DoveStrategy(s_d, s_h)
    expected = p * dove_utility(params, strat, p) + (1 - p) * hawk_utility(params, s_h, p)
    assert mean_utility(params, strat, p) == expected


@given(st.floats(0.01, 20), st.floats(0, 1))
def test_baseline_gap_is_one(lam, p):
    params = GameParams(lam, 1.0, 1.0)
    gap = hawk_utility(params, 1.0, p) - dove_utility(params, DoveStrategy(1, 1), p)
    assert gap == pytest.approx(1.0, abs=1e-12)


class TestReputationDrift:
    @given(viable_params(), st.floats(0, 1))
    def test_always_forwarding_gains_delta_r(self, params, p):
        assert reputation_drift(params, DoveStrategy(1, 1), p) == pytest.approx(params.delta_r)

    def test_optimum_binds_at_zero(self, ref_params):
        assert reputation_drift(ref_params, DoveStrategy(1, 0.25), 0) == pytest.approx(0, abs=1e-15)

    def test_never_forwarding(self):
        params = GameParams(3, 3, 1, delta_g=3)
        assert reputation_drift(params, DoveStrategy(0, 0), 0.5) == pytest.approx(-2)


class TestOptimalStrategy:
    @pytest.mark.parametrize("p,expected", [(0, 0.25), (0.5, 0.0), (1, 0.0)])
    def test_examples(self, ref_params, p, expected):
        strat = optimal_dove_strategy(ref_params, p)
        assert strat.s_d == 1.0
        assert strat.s_h == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("lam", [1.0, 0.9, 0.5])
    def test_non_viable(self, lam):
        with pytest.raises(NonViableRegimeError, match="non-viable"):
            optimal_dove_strategy(GameParams(lam, 3, 1), 0.5)

    @given(viable_params(), st.floats(0, 0.999999))
    def test_bounds(self, params, p):
        cap = params.delta_b / (params.delta_b + params.delta_r)
        s = optimal_s_h(params, p)
        assert 0 <= s <= cap < 1

    @given(viable_params(), st.floats(0, 1), st.floats(0, 1))
    def test_non_increasing(self, params, a, b):
        lo, hi = sorted((a, b))
        assert optimal_s_h(params, hi) <= optimal_s_h(params, lo)

    @given(viable_params(), st.floats(0, 1))
    def test_complementary_slackness(self, params, p):
        s = optimal_s_h(params, p)
        drift = reputation_drift(params, DoveStrategy(1, s), p)
        if s > 0:
            assert abs(drift) <= 1e-12 * max(1.0, params.delta_r, params.delta_b)
        else:
            assert drift >= 0

    @given(viable_params(), st.floats(0, 1))
    def test_zero_exactly_above_cutoff(self, params, p):
        cutoff = params.delta_b / (params.delta_b + params.delta_r)
        assert (optimal_s_h(params, p) == 0) == (p >= cutoff)

    def test_zero_at_exact_cutoff(self, ref_params):
        assert optimal_s_h(ref_params, 0.25) == 0.0


class TestBruteForce:
    @pytest.mark.parametrize("p,expected_s_h", [(0, 0.25), (0.5, 0.0)])
    def test_matches_closed_form(self, p, expected_s_h):
        params = GameParams(3, 3, 1, delta_g=3)
        strat = brute_force_dove_strategy(params, p, 1000)
        assert strat.s_d == 1.0
        assert abs(strat.s_h - expected_s_h) <= 1e-3

    @pytest.mark.parametrize("grid", [2, 10, 1000])
    def test_tie_break_at_full_cooperation(self, grid):
        strat = brute_force_dove_strategy(GameParams(3, 2, 1), 1.0, grid)
        assert (strat.s_d, strat.s_h) == (1.0, 0.0)

    def test_grid_steps_validated(self, ref_params):
        with pytest.raises(ValueError):
            brute_force_dove_strategy(ref_params, 0.5, 1)

    def test_small_grid_by_hand(self):
        # grid {0, 0.5, 1}^2 at p=0: drift = s_h*3 - (1-s_h)*1 >= 0 needs s_h >= 0.25 -> 0.5
        strat = brute_force_dove_strategy(GameParams(3, 3, 1), 0.0, 2)
        assert (strat.s_d, strat.s_h) == (1.0, 0.5)

    @pytest.mark.parametrize("params", random_viable_params(11, 5) + [GameParams(3, 3, 1)])
    def test_oracle_equivalence_grid(self, params):
        steps = 1000
        for p in np.linspace(0, 0.99, 101):
            closed = optimal_dove_strategy(params, p)
            oracle = brute_force_dove_strategy(params, p, steps)
            assert oracle.s_d == 1.0
            assert abs(closed.s_h - oracle.s_h) <= 1 / steps + 1e-12

    def test_delta_g_irrelevant_once_s_d_is_one(self):
        columns = []
        for dg in (1.0, 3.0, 10.0):
            params = GameParams(3, 3, 1, delta_g=dg)
            columns.append([brute_force_dove_strategy(params, p, 200).s_h
                            for p in np.linspace(0, 0.99, 34)])
        assert columns[0] == columns[1] == columns[2]
