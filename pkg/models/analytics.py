"""
Analytics
Closed-form expected rewards of the simplified two-builder model
"""
import math
from typing import Callable, Dict, Optional

from models.data_models import AnalyticParams, ExpectedRewards

# Exponential variables use the mean parameterization throughout: X ~ Exp(mean mu1),
# X' ~ Exp(mean mu2), Y ~ Exp(mean mu3).


def _scaled(rho: float, tail: float) -> float:
    """rho * tail with the rho -> infinity limit taken as 0"""
    if tail == 0.0:
        return 0.0
    return rho * tail


def reservation_probability(p: AnalyticParams) -> float:
    """P(X > rho)"""
    return math.exp(-p.rho / p.mu1)


def _joint_survival(p: AnalyticParams) -> float:
    """P(X > rho) * P(X' > rho)"""
    return math.exp(-p.rho * (p.mu1 + p.mu2) / (p.mu1 * p.mu2))


def reserved_value_mean(p: AnalyticParams) -> float:
    """E[X 1{X > rho}]"""
    tail = reservation_probability(p)
    return _scaled(p.rho, tail) + p.mu1 * tail


def unreserved_value_mean(p: AnalyticParams) -> float:
    """E[X 1{X < rho}]"""
    return p.mu1 - reserved_value_mean(p)


def secondary_win_probability(p: AnalyticParams) -> float:
    """P(X < rho, X' > X)"""
    s = p.mu1 + p.mu2
    return p.mu2 / s * -math.expm1(-p.rho * s / (p.mu1 * p.mu2))


def secondary_win_value_mean(p: AnalyticParams) -> float:
    """E[X' 1{X < rho, X' > X}]"""
    s = p.mu1 + p.mu2
    joint = _joint_survival(p)
    not_joint = -math.expm1(-p.rho * s / (p.mu1 * p.mu2))
    level = p.mu1 * p.mu2 ** 2 / s ** 2 + p.mu2 ** 2 / s
    return level * not_joint - _scaled(p.rho, joint) * p.mu2 / s


def primary_win_probability(p: AnalyticParams) -> float:
    """P(X' < X < rho)"""
    return 1.0 - reservation_probability(p) - secondary_win_probability(p)


def primary_win_value_mean(p: AnalyticParams) -> float:
    """E[X 1{X' < X < rho}]"""
    s = p.mu1 + p.mu2
    joint = _joint_survival(p)
    not_joint = -math.expm1(-p.rho * s / (p.mu1 * p.mu2))
    return (unreserved_value_mean(p)
            - p.mu1 * p.mu2 ** 2 / s ** 2 * not_joint
            + _scaled(p.rho, joint) * p.mu2 / s)


def _open_block_value(p: AnalyticParams) -> float:
    """E[max(X', (1 - R[t+1]) X) + Y]: the better of the two blocks in an unreserved round"""
    return (p.mu3
            + reservation_probability(p) * p.mu2
            + secondary_win_value_mean(p)
            + primary_win_value_mean(p))


def expected_validator_reward_policy(p: AnalyticParams) -> float:
    """Expected proposer reward when proposers accept bids above rho"""
    reserved = reservation_probability(p)
    committed = (1.0 - p.r1) * reserved_value_mean(p) \
        + (1.0 - p.r2) * reserved * (unreserved_value_mean(p) + p.mu3)
    uncommitted = (1.0 - reserved) * (1.0 - p.r2) * _open_block_value(p)
    return committed + uncommitted


def expected_validator_reward_default(p: AnalyticParams) -> float:
    """Expected reward of a proposer that never commits, given its neighbours do.

    Written without the 1 - P(X > rho) denominator, so it stays finite as
    rho -> 0 and equals the unconditioned best-block value at rho = inf.
    """
    return (1.0 - p.r2) * _open_block_value(p)


def expected_primary_builder_reward(p: AnalyticParams) -> float:
    reserved = reservation_probability(p)
    committed = p.r1 * reserved_value_mean(p) + p.r2 * reserved * (unreserved_value_mean(p) + p.mu3)
    wins = p.r2 * (1.0 - reserved) * (primary_win_value_mean(p) + p.mu3 * primary_win_probability(p))
    return committed + wins


def expected_secondary_builder_reward(p: AnalyticParams) -> float:
    reserved = reservation_probability(p)
    wins = (reserved * (p.mu2 + p.mu3)
            + secondary_win_value_mean(p)
            + p.mu3 * secondary_win_probability(p))
    return p.r2 * (1.0 - reserved) * wins


ClosedForms = Dict[str, Callable[[AnalyticParams], float]]

CLOSED_FORMS: ClosedForms = {
    'v_p_policy': expected_validator_reward_policy,
    'v_p_default': expected_validator_reward_default,
    'v_primary': expected_primary_builder_reward,
    'v_secondary': expected_secondary_builder_reward,
}


def expected_rewards(p: AnalyticParams, closed_forms: Optional[ClosedForms] = None) -> ExpectedRewards:
    """All four expectations at one parameter point"""
    forms = closed_forms or CLOSED_FORMS
    return ExpectedRewards(**{name: forms[name](p) for name in CLOSED_FORMS})


def lemma1_simplified_difference(mu2: float, rho: float, r2: float) -> float:
    """Policy minus default proposer reward at r1 = 0, mu1 = 1 - mu2 (independent of mu3)"""
    mu1 = 1.0 - mu2
    tail = math.exp(-rho / mu1)
    both = math.exp(-rho / mu1 - rho / mu2)
    return tail * (rho + mu1) - (1.0 - r2) * (tail * tail * mu2 + tail * mu2 ** 2 - mu2 ** 2 * tail * both)


def lemma2_simplified_residual(rho: float, mu3: float, r2: float) -> float:
    """Fixed-point residual at mu2 = 1/2, r1 = 0"""
    edge = -0.25 - 0.5 * mu3 - 0.5 * rho
    middle = 0.5 + 0.5 * rho + 1.5 * mu3
    return r2 * (edge * math.exp(-2.0 * rho) + middle * math.exp(-4.0 * rho) + edge * math.exp(-6.0 * rho))


def theorem1_simplified_residual(mu2: float, rho: float, mu3: float, r2: float) -> float:
    """Fixed-point residual at r1 = 0 for general mu2, as a polynomial in the two tail terms"""
    m, n, u = mu2, 1.0 - mu2, mu3
    tail = math.exp(-rho / n)
    both = math.exp(-rho / (m * n))
    constant = m - 3.0 * m ** 2 + 2.0 * m ** 3
    joint_coefficient = 2.0 * m ** 2 * n + m * (u + rho)
    return r2 * (constant
                 + tail * (-2.0 * m * n ** 2 - u * n - m * rho)
                 + tail * tail * (m * n + u)
                 + both * joint_coefficient
                 - tail * both * joint_coefficient)


def theorem1_rho_lower_bound(mu2: float, mu3: float) -> float:
    """rho above which the residual at mu2 is guaranteed positive"""
    c = -3.0 * mu2 ** 2 + 2.0 * mu2 ** 3 + mu2
    if c <= 0:
        raise ValueError(f"mu2 must lie in (0, 0.5), got {mu2!r}")
    return max(
        mu3 - 2.0,
        0.5 * (1.25 + 0.5 * mu3) - 0.5 * math.log(c * math.e / 8.0),
        0.25 * (0.25 - mu3) - 0.25 * math.log(c * math.e / 4.0),
        -0.25 * math.log(c / 3.0),
        0.25 * (0.75 + 0.5 * mu3) - 0.25 * math.log(c * math.e / 8.0),
    )
