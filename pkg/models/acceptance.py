"""
Acceptance
Statistical checks applied to the replications of a preset
"""
import math
from typing import Callable, Dict, List, Sequence

import numpy as np

from config.settings import NULL_CONTROL_CONFIDENCE, PRIMARY_BUILDER, WARMUP_ROUNDS
from models.data_models import AcceptanceCheck
from models.engine import SimResult
from utils.statistics import binomial_interval


def warmup_for(rounds: int) -> int:
    """Rounds skipped before measuring shares; none for runs too short to skip them"""
    return WARMUP_ROUNDS if rounds > WARMUP_ROUNDS else 0


def _mean_primary_share(results: Sequence[SimResult]) -> float:
    shares = [r.block_share(warmup_for(r.rounds))[PRIMARY_BUILDER] for r in results]
    return float(np.mean(shares))


def _secondaries(result: SimResult) -> List[str]:
    return [b for b in result.builder_ids if b != PRIMARY_BUILDER]


def _mean_cumulative(results: Sequence[SimResult]) -> Dict[str, float]:
    """Primary and mean-secondary cumulative reward averaged over runs"""
    primary = [r.cumulative_rewards[PRIMARY_BUILDER] for r in results]
    secondary = [np.mean([r.cumulative_rewards[b] for b in _secondaries(r)]) for r in results]
    return {'primary': float(np.mean(primary)), 'secondary': float(np.mean(secondary))}


def _pooled_per_block(results: Sequence[SimResult]) -> Dict[str, float]:
    """Builder reward per block won, pooled over runs; secondaries pooled together"""
    totals = {'primary': [0.0, 0], 'secondary': [0.0, 0]}
    for result in results:
        won = result.blocks_won()
        cumulative = result.cumulative_rewards
        for builder in result.builder_ids:
            key = 'primary' if builder == PRIMARY_BUILDER else 'secondary'
            totals[key][0] += cumulative[builder]
            totals[key][1] += won[builder]
    return {key: total / count if count else 0.0 for key, (total, count) in totals.items()}


def baseline_checks(results: Sequence[SimResult]) -> List[AcceptanceCheck]:
    share = _mean_primary_share(results)
    cumulative = _mean_cumulative(results)
    return [
        AcceptanceCheck('primary_share_band', 0.50 <= share <= 0.65, share, "[0.50, 0.65]"),
        AcceptanceCheck('primary_outearns_secondary', cumulative['primary'] > cumulative['secondary'],
                        cumulative, "primary > secondary"),
    ]


def multi_builder_checks(results: Sequence[SimResult]) -> List[AcceptanceCheck]:
    share = _mean_primary_share(results)
    return [AcceptanceCheck('primary_share_above_third', share > 1.0 / 3.0, share, "> 1/3")]


def zero_bid_rate_checks(results: Sequence[SimResult]) -> List[AcceptanceCheck]:
    share = _mean_primary_share(results)
    per_block = _pooled_per_block(results)
    cumulative = _mean_cumulative(results)
    return [
        AcceptanceCheck('primary_selected_more', share > 0.5, share, "> 0.5"),
        AcceptanceCheck('primary_per_block_lower', per_block['primary'] < per_block['secondary'],
                        per_block, "primary < secondary"),
        AcceptanceCheck('primary_outearns_secondary', cumulative['primary'] > cumulative['secondary'],
                        cumulative, "primary > secondary"),
    ]


def null_control_checks(results: Sequence[SimResult]) -> List[AcceptanceCheck]:
    wins = sum(r.blocks_won()[PRIMARY_BUILDER] for r in results)
    rounds = sum(r.rounds for r in results)
    if rounds == 0:
        return [AcceptanceCheck('primary_share_fair', False, None, "no rounds played")]
    low, high = binomial_interval(wins, rounds, NULL_CONTROL_CONFIDENCE)
    share = wins / rounds
    return [AcceptanceCheck('primary_share_fair', bool(low <= 0.5 <= high),
                            {'share': share, 'interval': [low, high]},
                            f"{NULL_CONTROL_CONFIDENCE:.0%} interval contains 0.5")]


CHECKS: Dict[str, Callable[[Sequence[SimResult]], List[AcceptanceCheck]]] = {
    'baseline': baseline_checks,
    'multi_builder': multi_builder_checks,
    'zero_bid_rate': zero_bid_rate_checks,
    'null_control': null_control_checks,
}


def replication_summary(result: SimResult) -> Dict[str, object]:
    """Per-seed aggregates written to the summary file"""
    warmup = warmup_for(result.rounds)
    refunds = result.user_refunds
    proposer = [take for takes in result.proposer_rewards.values() for take in takes]
    convergence = result.convergence_round()
    return {
        'seed': result.config.seed,
        'block_share': result.block_share(),
        'block_share_after_warmup': result.block_share(warmup),
        'cumulative_rewards': result.cumulative_rewards,
        'per_block_rewards': result.per_block_rewards,
        'convergence_round': convergence,
        'reservation_rate': result.reservation_rate,
        'bids_issued': result.bids_issued,
        'bids_accepted': result.bids_accepted,
        'mean_proposer_reward': math.fsum(proposer) / len(proposer) if proposer else 0.0,
        'total_user_refunds': math.fsum(refunds),
    }


def point_aggregate(summaries: Sequence[Dict[str, object]], builder_ids: Sequence[str]) -> Dict[str, object]:
    """Mean and spread over the replications of one point"""
    shares = [s['block_share_after_warmup'][PRIMARY_BUILDER] for s in summaries]
    convergence = [s['convergence_round'] for s in summaries if s['convergence_round'] is not None]
    return {
        'replications': len(summaries),
        'primary_share_mean': float(np.mean(shares)) if shares else 0.0,
        'primary_share_std': float(np.std(shares)) if shares else 0.0,
        'cumulative_rewards_mean': {
            b: float(np.mean([s['cumulative_rewards'][b] for s in summaries])) for b in builder_ids
        },
        'per_block_rewards_mean': {
            b: float(np.mean([s['per_block_rewards'][b] for s in summaries])) for b in builder_ids
        },
        'reservation_rate_mean': float(np.mean([s['reservation_rate'] for s in summaries])),
        'convergence_round_mean': float(np.mean(convergence)) if convergence else None,
    }
