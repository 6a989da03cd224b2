"""
Equilibrium
Fixed-point residual, bracketing bisection solver and the analytic checks built on them
"""
import logging
import math
from typing import Iterable, Optional, Tuple

import numpy as np
from scipy import optimize

from config.settings import FIXED_POINT_GRID_STEP, FIXED_POINT_TOLERANCE, SIMPLIFIED_TOLERANCE
from models.analytics import (
    ClosedForms, expected_rewards, lemma1_simplified_difference, lemma2_simplified_residual,
    theorem1_rho_lower_bound, theorem1_simplified_residual,
)
from models.data_models import AnalyticParams, CheckEntry, CheckReport, FixedPointResult

logger = logging.getLogger(__name__)

LEMMA2_RHO_BOUND = math.log(3.0) / 2.0


def fixed_point_residual(mu2: float, rho: float, r1: float, r2: float, mu3: float,
                         closed_forms: Optional[ClosedForms] = None) -> float:
    """E[V_primary] * mu2 - E[V_secondary] * mu1 with mu1 = 1 - mu2"""
    params = AnalyticParams.from_mu2(mu2, mu3, rho, r1, r2)
    rewards = expected_rewards(params, closed_forms)
    return rewards.v_primary * params.mu2 - rewards.v_secondary * params.mu1


def find_bracket(residual, low: float = FIXED_POINT_GRID_STEP, high: float = 0.5,
                 step: float = FIXED_POINT_GRID_STEP) -> Optional[Tuple[float, float]]:
    """First sign change scanning down from high; returns (a, b) with a <= b"""
    grid = high - step * np.arange(int(round((high - low) / step)) + 1)
    previous_mu, previous_value = None, None
    for mu in grid:
        value = residual(float(mu))
        if value == 0.0:
            return float(mu), float(mu)
        if previous_value is not None and (value < 0) != (previous_value < 0):
            return float(mu), float(previous_mu)
        previous_mu, previous_value = mu, value
    return None


def solve_fixed_point(rho: float, r1: float, r2: float, mu3: float, tol: float = FIXED_POINT_TOLERANCE,
                      closed_forms: Optional[ClosedForms] = None) -> FixedPointResult:
    """Bisection for mu2* on the first sign-change bracket below 1/2"""
    def residual(mu2: float) -> float:
        return fixed_point_residual(mu2, rho, r1, r2, mu3, closed_forms)

    bracket = find_bracket(residual)
    if bracket is None:
        return FixedPointResult(success=False, error="no interior fixed point at these parameters")

    low, high = bracket
    if low == high:
        return FixedPointResult(success=True, mu2_star=low, residual=0.0, iterations=0, bracket=bracket)

    root, info = optimize.bisect(residual, low, high, xtol=1e-15, maxiter=200, full_output=True, disp=False)
    value = residual(root)
    if not info.converged or abs(value) >= tol:
        return FixedPointResult(
            success=False, mu2_star=root, residual=value, iterations=info.iterations, bracket=bracket,
            error=f"bisection stopped with residual {value:.3e} (tolerance {tol:.1e})",
        )
    logger.debug("Fixed point mu2*=%.6f after %d iterations", root, info.iterations)
    return FixedPointResult(success=True, mu2_star=root, residual=value, iterations=info.iterations,
                            bracket=bracket)


def ratio_consistency(mu2_star: float, rho: float, r1: float, r2: float, mu3: float) -> Tuple[float, float]:
    """Routing shares implied by expected builder rewards at mu2*"""
    rewards = expected_rewards(AnalyticParams.from_mu2(mu2_star, mu3, rho, r1, r2))
    total = rewards.v_primary + rewards.v_secondary
    return rewards.v_primary / total, rewards.v_secondary / total


def check_lemma1(points: Iterable[Tuple[float, float, float, float]],
                 tol: float = SIMPLIFIED_TOLERANCE) -> CheckReport:
    """Committing beats deviating at r1 = 0, mu2 < 1/2, rho > mu2; points are (mu2, rho, mu3, r2)"""
    report = CheckReport(name='lemma1')
    for mu2, rho, mu3, r2 in points:
        params = AnalyticParams.from_mu2(mu2, mu3, rho, 0.0, r2)
        rewards = expected_rewards(params)
        difference = rewards.v_p_policy - rewards.v_p_default
        simplified = lemma1_simplified_difference(mu2, rho, r2)
        gap = abs(simplified - difference)
        report.entries.append(CheckEntry(
            check='lemma1', point=params.to_dict(), passed=bool(difference > 0 and gap < tol),
            values={'policy': rewards.v_p_policy, 'default': rewards.v_p_default,
                    'difference': difference, 'simplified': simplified, 'gap': gap},
        ))
    return report


def check_lemma2(points: Iterable[Tuple[float, float, float]]) -> CheckReport:
    """Residual at mu2 = 1/2, r1 = 0 is negative when rho > ln(3)/2; points are (rho, mu3, r2)"""
    report = CheckReport(name='lemma2')
    for rho, mu3, r2 in points:
        if rho <= LEMMA2_RHO_BOUND:
            logger.debug("Skipping rho=%.4f at or below ln(3)/2", rho)
            continue
        residual = fixed_point_residual(0.5, rho, 0.0, r2, mu3)
        report.entries.append(CheckEntry(
            check='lemma2', point={'mu2': 0.5, 'rho': rho, 'mu3': mu3, 'r1': 0.0, 'r2': r2},
            passed=bool(residual < 0), values={'residual': residual},
        ))
    return report


def check_half_share_expression(points: Iterable[Tuple[float, float, float]],
                                tol: float = SIMPLIFIED_TOLERANCE) -> CheckReport:
    """Residual at mu2 = 1/2, r1 = 0 against its closed simplification; points are (rho, mu3, r2)"""
    report = CheckReport(name='half_share_expression')
    for rho, mu3, r2 in points:
        residual = fixed_point_residual(0.5, rho, 0.0, r2, mu3)
        simplified = lemma2_simplified_residual(rho, mu3, r2)
        gap = abs(residual - simplified)
        report.entries.append(CheckEntry(
            check='half_share_expression', point={'mu2': 0.5, 'rho': rho, 'mu3': mu3, 'r1': 0.0, 'r2': r2},
            passed=bool(gap < tol), values={'residual': residual, 'simplified': simplified, 'gap': gap},
        ))
    return report


def check_general_expression(points: Iterable[Tuple[float, float, float, float]],
                             tol: float = SIMPLIFIED_TOLERANCE) -> CheckReport:
    """Residual at r1 = 0 against the polynomial form in the tail terms; points are (mu2, rho, mu3, r2)"""
    report = CheckReport(name='general_expression')
    for mu2, rho, mu3, r2 in points:
        residual = fixed_point_residual(mu2, rho, 0.0, r2, mu3)
        simplified = theorem1_simplified_residual(mu2, rho, mu3, r2)
        gap = abs(residual - simplified)
        report.entries.append(CheckEntry(
            check='general_expression', point={'mu2': mu2, 'rho': rho, 'mu3': mu3, 'r1': 0.0, 'r2': r2},
            passed=bool(gap < tol), values={'residual': residual, 'simplified': simplified, 'gap': gap},
        ))
    return report


def check_theorem1(cases: Iterable[Tuple[float, float, float]], tol: float = FIXED_POINT_TOLERANCE) -> CheckReport:
    """An interior fixed point below 1/2 exists; cases are (rho, mu3, r2) at r1 = 0"""
    report = CheckReport(name='theorem1')
    for rho, mu3, r2 in cases:
        result = solve_fixed_point(rho, 0.0, r2, mu3, tol)
        passed = bool(result.success and 0.0 < result.mu2_star < 0.5 and abs(result.residual) < tol)
        values = result.to_dict()
        if result.success:
            primary_share, secondary_share = ratio_consistency(result.mu2_star, rho, 0.0, r2, mu3)
            values['primary_share'] = primary_share
            values['ratio_gap'] = abs(secondary_share - result.mu2_star)
        report.entries.append(CheckEntry(
            check='theorem1', point={'rho': rho, 'mu3': mu3, 'r1': 0.0, 'r2': r2}, passed=passed, values=values,
        ))
    return report


def theorem1_cases(n_random: int, seed: int, mu2_probe: float = 0.1, r2: float = 0.02):
    """Cases with rho above the guaranteed-existence bound at random mu3"""
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(n_random):
        mu3 = float(rng.uniform(0.1, 2.0))
        rho = max(theorem1_rho_lower_bound(mu2_probe, mu3), LEMMA2_RHO_BOUND) + 0.5
        cases.append((rho, mu3, r2))
    return cases
