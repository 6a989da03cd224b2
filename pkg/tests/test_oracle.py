"""
Tests for the Monte Carlo oracle and the oracle grid check
"""
import pytest

from config.settings import ANALYTIC_SEED, ORACLE_GRID_POINTS, ORACLE_ROUNDS, ORACLE_SE_LIMIT
from models.analytics import CLOSED_FORMS, expected_rewards
from models.data_models import AnalyticParams
from models.oracle import GRID_RANGES, check_oracle_grid, mc_oracle, random_grid

EXAMPLE = AnalyticParams(mu1=0.6, mu2=0.4, mu3=0.5, rho=1.0, r1=0.0, r2=0.02)


class TestMcOracle:

    def test_agrees_with_closed_forms_at_example_point(self):
        estimate = mc_oracle(EXAMPLE, 1_000_000, seed=11)
        closed = expected_rewards(EXAMPLE).to_dict()
        means, errors = estimate.mean.to_dict(), estimate.stderr.to_dict()
        for name, value in closed.items():
            assert errors[name] > 0, name
            assert abs(means[name] - value) <= ORACLE_SE_LIMIT * errors[name], name

    def test_same_seed_same_estimate(self):
        assert mc_oracle(EXAMPLE, 20_000, seed=3) == mc_oracle(EXAMPLE, 20_000, seed=3)

    def test_too_few_rounds_rejected(self):
        with pytest.raises(ValueError, match="at least"):
            mc_oracle(EXAMPLE, 9_999, seed=0)

    def test_builders_earn_nothing_at_zero_rates(self):
        params = AnalyticParams.from_mu2(0.4, 0.5, 1.0, 0.0, 0.0)
        estimate = mc_oracle(params, 10_000, seed=5)
        assert estimate.mean.v_primary == 0.0
        assert estimate.mean.v_secondary == 0.0


class TestOracleGrid:

    def test_random_grid_within_ranges(self):
        points = random_grid(20, seed=9)
        assert points == random_grid(20, seed=9)
        for params in points:
            for name, (low, high) in GRID_RANGES.items():
                assert low <= getattr(params, name) <= high

    def test_small_grid_passes(self):
        report = check_oracle_grid(3, 200_000, seed=21)
        assert report.passed, report.failures
        assert len(report.entries) == 3
        assert set(report.entries[0].values) == set(CLOSED_FORMS)

    def test_perturbed_closed_form_is_caught(self):
        forms = dict(CLOSED_FORMS)
        forms['v_primary'] = lambda p: 1.1 * CLOSED_FORMS['v_primary'](p)
        report = check_oracle_grid(3, 200_000, seed=21, closed_forms=forms)
        assert not report.passed
        assert all(entry.values['v_primary']['z'] > ORACLE_SE_LIMIT for entry in report.failures)

    @pytest.mark.slow
    def test_full_grid_passes(self):
        report = check_oracle_grid(ORACLE_GRID_POINTS, ORACLE_ROUNDS, seed=ANALYTIC_SEED)
        assert report.passed, [entry.point for entry in report.failures]
