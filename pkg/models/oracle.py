"""
Monte Carlo Oracle
Direct simulation of the simplified chain, used to validate the closed forms
"""
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from config.settings import ORACLE_SE_LIMIT, SIMPLIFIED_TOLERANCE
from models.analytics import ClosedForms, expected_rewards
from models.data_models import AnalyticParams, CheckEntry, CheckReport, ExpectedRewards, OracleEstimate
from utils.statistics import mean_and_stderr

logger = logging.getLogger(__name__)

MIN_ORACLE_ROUNDS = 10_000

# Parameter ranges of the random validation grid
GRID_RANGES = {
    'mu2': (0.05, 0.95),
    'rho': (0.1, 5.0),
    'mu3': (0.1, 2.0),
    'r1': (0.0, 0.9),
    'r2': (0.01, 0.5),
}


def realized_rewards(p: AnalyticParams, n_rounds: int,
                     rng: np.random.Generator) -> Tuple[Dict[str, np.ndarray], np.ndarray]:
    """Per-round realized rewards and the mask of rounds without a reservation.

    Draw order: X for rounds -1..n-1, then X', then Y.
    """
    x = rng.exponential(p.mu1, size=n_rounds + 1)
    x_secondary = rng.exponential(p.mu2, size=n_rounds)
    y = rng.exponential(p.mu3, size=n_rounds)

    previous, current = x[:-1], x[1:]
    reserved_now = previous > p.rho
    offered = np.where(current > p.rho, 0.0, current)
    best_open = np.maximum(x_secondary, offered) + y
    committed_block = offered + y

    rewards = {
        'v_p_policy': np.where(
            reserved_now,
            (1.0 - p.r1) * previous + (1.0 - p.r2) * committed_block,
            (1.0 - p.r2) * best_open,
        ),
        'v_p_default': (1.0 - p.r2) * best_open,
        'v_primary': np.where(
            reserved_now,
            p.r1 * previous + p.r2 * committed_block,
            np.where(offered > x_secondary, p.r2 * committed_block, 0.0),
        ),
        'v_secondary': np.where(
            ~reserved_now & (x_secondary > offered),
            p.r2 * (x_secondary + y),
            0.0,
        ),
    }
    return rewards, ~reserved_now


def _ratio_mean_and_stderr(values: np.ndarray, mask: np.ndarray) -> Tuple[float, float]:
    """Mean of values over mask with the delta-method standard error"""
    weights = mask.astype(float)
    weight_mean = weights.mean()
    if weight_mean == 0:
        return float('nan'), float('inf')
    mean = float(np.dot(weights, values) / weights.sum())
    linearized = weights * (values - mean) / weight_mean
    _, stderr = mean_and_stderr(linearized)
    return mean, stderr


def mc_oracle(p: AnalyticParams, n_rounds: int, seed: int) -> OracleEstimate:
    """Sample means and standard errors of the four rewards"""
    if n_rounds < MIN_ORACLE_ROUNDS:
        raise ValueError(f"n_rounds must be at least {MIN_ORACLE_ROUNDS}, got {n_rounds}")
    rng = np.random.default_rng(seed)
    rewards, unreserved = realized_rewards(p, n_rounds, rng)

    means: Dict[str, float] = {}
    errors: Dict[str, float] = {}
    for name, values in rewards.items():
        if name == 'v_p_default':
            means[name], errors[name] = _ratio_mean_and_stderr(values, unreserved)
        else:
            means[name], errors[name] = mean_and_stderr(values)
    return OracleEstimate(mean=ExpectedRewards(**means), stderr=ExpectedRewards(**errors),
                          n_rounds=n_rounds, seed=seed)


def random_grid(n_points: int, seed: int) -> List[AnalyticParams]:
    """Random parameter points drawn uniformly from GRID_RANGES"""
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(n_points):
        draw = {name: float(rng.uniform(low, high)) for name, (low, high) in GRID_RANGES.items()}
        points.append(AnalyticParams.from_mu2(draw['mu2'], draw['mu3'], draw['rho'], draw['r1'], draw['r2']))
    return points


def check_oracle_grid(n_points: int, n_rounds: int, seed: int, se_limit: float = ORACLE_SE_LIMIT,
                      closed_forms: Optional[ClosedForms] = None) -> CheckReport:
    """Compare every closed form with the oracle at each grid point"""
    report = CheckReport(name='oracle_grid')
    point_seeds = np.random.SeedSequence(seed).generate_state(n_points)
    for index, params in enumerate(random_grid(n_points, seed)):
        closed = expected_rewards(params, closed_forms).to_dict()
        estimate = mc_oracle(params, n_rounds, int(point_seeds[index]))
        means, errors = estimate.mean.to_dict(), estimate.stderr.to_dict()

        values = {}
        passed = True
        for name in closed:
            gap = abs(closed[name] - means[name])
            if errors[name] > 0:
                z = gap / errors[name]
            else:
                z = 0.0 if gap < SIMPLIFIED_TOLERANCE else float('inf')
            passed = passed and bool(z <= se_limit)
            values[name] = {'closed_form': closed[name], 'oracle_mean': means[name],
                            'oracle_se': errors[name], 'z': z}
        report.entries.append(CheckEntry(check='oracle_grid', point=params.to_dict(), passed=passed, values=values))
        if not passed:
            logger.warning("Oracle disagreement at %s", params)
    return report
