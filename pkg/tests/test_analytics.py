"""
Tests for the closed-form expected rewards and their named sub-terms
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from models.analytics import (
    expected_primary_builder_reward, expected_rewards, expected_secondary_builder_reward,
    expected_validator_reward_default, expected_validator_reward_policy, lemma1_simplified_difference,
    lemma2_simplified_residual, primary_win_probability, primary_win_value_mean, reservation_probability,
    reserved_value_mean, secondary_win_probability, secondary_win_value_mean, theorem1_rho_lower_bound,
    theorem1_simplified_residual, unreserved_value_mean,
)
from models.data_models import AnalyticParams
from models.equilibrium import fixed_point_residual

EXAMPLE = AnalyticParams(mu1=0.6, mu2=0.4, mu3=0.5, rho=1.0, r1=0.0, r2=0.02)


@pytest.fixture(scope="module")
def draws():
    """Independent X and X' samples at the example point"""
    rng = np.random.default_rng(2024)
    n = 1_000_000
    return rng.exponential(EXAMPLE.mu1, n), rng.exponential(EXAMPLE.mu2, n)


def _within(samples, expected, n_se=4.0):
    mean = samples.mean()
    se = samples.std(ddof=1) / math.sqrt(len(samples))
    assert abs(mean - expected) <= n_se * se, f"{mean} vs {expected} (se {se})"


class TestSubTerms:

    def test_reservation_probability(self, draws):
        x, _ = draws
        _within((x > EXAMPLE.rho).astype(float), reservation_probability(EXAMPLE))

    def test_reserved_value(self, draws):
        x, _ = draws
        _within(np.where(x > EXAMPLE.rho, x, 0.0), reserved_value_mean(EXAMPLE))

    def test_unreserved_value(self, draws):
        x, _ = draws
        _within(np.where(x < EXAMPLE.rho, x, 0.0), unreserved_value_mean(EXAMPLE))

    def test_secondary_win_probability(self, draws):
        x, x2 = draws
        _within(((x < EXAMPLE.rho) & (x2 > x)).astype(float), secondary_win_probability(EXAMPLE))

    def test_secondary_win_value(self, draws):
        x, x2 = draws
        _within(np.where((x < EXAMPLE.rho) & (x2 > x), x2, 0.0), secondary_win_value_mean(EXAMPLE))

    def test_primary_win_probability(self, draws):
        x, x2 = draws
        _within(((x2 < x) & (x < EXAMPLE.rho)).astype(float), primary_win_probability(EXAMPLE))

    def test_primary_win_value(self, draws):
        x, x2 = draws
        _within(np.where((x2 < x) & (x < EXAMPLE.rho), x, 0.0), primary_win_value_mean(EXAMPLE))

    def test_reserved_value_closed_form(self):
        p = EXAMPLE
        assert reserved_value_mean(p) == pytest.approx((p.rho + p.mu1) * math.exp(-p.rho / p.mu1))

    def test_win_probabilities_partition(self):
        total = reservation_probability(EXAMPLE) + secondary_win_probability(EXAMPLE) \
            + primary_win_probability(EXAMPLE)
        assert total == pytest.approx(1.0)


class TestClosedForms:

    def test_no_reservations_at_infinite_threshold(self):
        p = AnalyticParams.from_mu2(0.4, 0.5, math.inf, 0.3, 0.02)
        assert reservation_probability(p) == 0.0
        assert expected_validator_reward_policy(p) == pytest.approx(expected_validator_reward_default(p))

    def test_builders_split_the_best_block_at_infinite_threshold(self):
        p = AnalyticParams.from_mu2(0.3, 0.7, math.inf, 0.0, 0.05)
        rewards = expected_rewards(p)
        assert rewards.v_primary + rewards.v_secondary == pytest.approx(
            p.r2 / (1 - p.r2) * rewards.v_p_default)

    def test_only_reserved_term_survives_when_builders_keep_everything(self):
        p = AnalyticParams.from_mu2(0.4, 0.5, 1.0, 0.0, 1 - 1e-9)
        expected = (p.rho + p.mu1) * math.exp(-p.rho / p.mu1)
        assert expected_validator_reward_policy(p) == pytest.approx(expected, abs=1e-8)

    def test_default_finite_for_tiny_threshold(self):
        for rho in (1e-3, 1e-6, 1e-9):
            value = expected_validator_reward_default(AnalyticParams.from_mu2(0.4, 0.5, rho, 0.0, 0.02))
            assert math.isfinite(value) and value > 0

    def test_zero_rates_give_builders_nothing(self):
        p = AnalyticParams.from_mu2(0.4, 0.5, 1.0, 0.0, 0.0)
        assert expected_primary_builder_reward(p) == 0.0
        assert expected_secondary_builder_reward(p) == 0.0

    def test_primary_reserved_term_vanishes_at_zero_bid_rate(self):
        low = AnalyticParams.from_mu2(0.4, 0.5, 1.0, 0.0, 0.02)
        high = AnalyticParams.from_mu2(0.4, 0.5, 1.0, 0.5, 0.02)
        gap = expected_primary_builder_reward(high) - expected_primary_builder_reward(low)
        assert gap == pytest.approx(0.5 * reserved_value_mean(low))

    def test_secondary_bounded_as_its_flow_vanishes(self):
        value = expected_secondary_builder_reward(AnalyticParams.from_mu2(1e-6, 0.5, 1.0, 0.0, 0.02))
        assert 0.0 <= value < 0.02 * (0.5 + 1e-3)

    def test_closed_form_override(self):
        rewards = expected_rewards(EXAMPLE, {
            'v_p_policy': lambda p: 1.0, 'v_p_default': lambda p: 2.0,
            'v_primary': lambda p: 3.0, 'v_secondary': lambda p: 4.0,
        })
        assert rewards.to_dict() == {'v_p_policy': 1.0, 'v_p_default': 2.0, 'v_primary': 3.0, 'v_secondary': 4.0}

    @pytest.mark.property_based
    @given(
        mu2=st.floats(min_value=1e-3, max_value=0.999),
        mu3=st.floats(min_value=1e-3, max_value=10.0),
        rho=st.floats(min_value=1e-3, max_value=100.0),
        r1=st.floats(min_value=0.0, max_value=0.999),
        r2=st.floats(min_value=0.0, max_value=0.999),
    )
    @settings(max_examples=300, deadline=None)
    def test_finite_and_non_negative(self, mu2, mu3, rho, r1, r2):
        rewards = expected_rewards(AnalyticParams.from_mu2(mu2, mu3, rho, r1, r2))
        for name, value in rewards.to_dict().items():
            assert math.isfinite(value), name
            assert value >= 0.0, name


class TestSimplifiedExpressions:

    @pytest.mark.parametrize("mu2, rho, mu3, r2", [(0.4, 1.0, 0.5, 0.02), (0.49, 0.5, 0.1, 0.02)])
    def test_policy_beats_default(self, mu2, rho, mu3, r2):
        rewards = expected_rewards(AnalyticParams.from_mu2(mu2, mu3, rho, 0.0, r2))
        difference = rewards.v_p_policy - rewards.v_p_default
        assert difference > 0
        assert lemma1_simplified_difference(mu2, rho, r2) == pytest.approx(difference, abs=1e-10)

    def test_half_share_residual(self):
        residual = fixed_point_residual(0.5, 1.0, 0.0, 0.02, 0.5)
        rho, mu3, r2 = 1.0, 0.5, 0.02
        by_hand = r2 * ((-0.25 - 0.5 * mu3 - 0.5 * rho) * math.exp(-6 * rho)
                        + (1.5 * mu3 + 0.5 + 0.5 * rho) * math.exp(-4 * rho)
                        + (-0.25 - 0.5 * mu3 - 0.5 * rho) * math.exp(-2 * rho))
        assert residual < 0
        assert residual == pytest.approx(by_hand, abs=1e-10)
        assert lemma2_simplified_residual(rho, mu3, r2) == pytest.approx(by_hand, abs=1e-15)

    @pytest.mark.property_based
    @given(
        mu2=st.floats(min_value=0.01, max_value=0.99),
        rho=st.floats(min_value=0.05, max_value=5.0),
        mu3=st.floats(min_value=0.05, max_value=3.0),
        r2=st.floats(min_value=0.01, max_value=0.5),
    )
    @settings(max_examples=200, deadline=None)
    def test_general_residual_matches(self, mu2, rho, mu3, r2):
        assert theorem1_simplified_residual(mu2, rho, mu3, r2) == pytest.approx(
            fixed_point_residual(mu2, rho, 0.0, r2, mu3), abs=1e-10)

    def test_residual_positive_for_small_share_above_bound(self):
        mu2, mu3 = 0.01, 0.5
        rho = theorem1_rho_lower_bound(mu2, mu3) + 0.5
        assert fixed_point_residual(mu2, rho, 0.0, 0.02, mu3) > 0

    def test_bound_needs_share_below_half(self):
        with pytest.raises(ValueError):
            theorem1_rho_lower_bound(0.5, 0.5)
