"""
Policies
Flashback bidding, default block building and proposer decisions
"""
import logging
import math
from collections import deque
from itertools import chain
from typing import Deque, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from models.data_models import (
    Bid, CandidateBlock, EstimateBasis, ProposerBidPolicy, RoundLog, SimConfig, Transaction, TxKind,
)
from models.errors import ConfigError, ProtocolViolation

logger = logging.getLogger(__name__)

# rounding slack on the r2 < r1 check for bundles right at the threshold
BID_RATE_SLACK = 1e-12


def _logged_value(log: RoundLog, basis: EstimateBasis) -> float:
    if basis == EstimateBasis.PRIVATE:
        return log.proposer_private_take
    if basis == EstimateBasis.BUNDLE:
        return log.proposer_bundle_take
    return log.proposer_take


def select_bid_set(mempool: Iterable[Transaction], round: int, bid_count: int,
                   excluded_ids: Optional[Set[int]] = None) -> List[Transaction]:
    """Highest-fee private transactions that survive through round + 1 and are not reserved"""
    excluded_ids = excluded_ids or set()
    eligible = [
        tx for tx in mempool
        if tx.kind == TxKind.PRIVATE
        and tx.created_round + tx.ttl >= round + 2
        and tx.id not in excluded_ids
    ]
    eligible.sort(key=lambda tx: tx.sort_key)
    return eligible[:bid_count]


def estimate_expected_proposer_reward(logs: Sequence[RoundLog], window: int, t: int,
                                      basis: EstimateBasis = EstimateBasis.BLOCK) -> float:
    """Mean proposer take over rounds t-W-1 .. t-1 whose proposer held no reservation"""
    low = t - window - 1
    values = [
        _logged_value(log, basis) for log in logs
        if low <= log.round <= t - 1 and not log.reservation_flag
    ]
    if not values:
        return 0.0
    return math.fsum(values) / len(values)


class ProposerRewardEstimator:
    """Incremental version of estimate_expected_proposer_reward used inside long runs"""

    def __init__(self, window: int, basis: EstimateBasis = EstimateBasis.BLOCK):
        self.window = window
        self.basis = basis
        self._entries: Deque[Tuple[int, float]] = deque()
        self._total = 0.0

    def record(self, log: RoundLog):
        """Add a settled round; reserved rounds are ignored"""
        if not log.reservation_flag:
            value = _logged_value(log, self.basis)
            self._entries.append((log.round, value))
            self._total += value

    def estimate(self, t: int) -> float:
        """Estimate for a bid made at round t; call before recording round t"""
        low = t - self.window - 1
        while self._entries and self._entries[0][0] < low:
            _, value = self._entries.popleft()
            self._total -= value
        if not self._entries:
            self._total = 0.0
            return 0.0
        return max(self._total, 0.0) / len(self._entries)


def compute_threshold(e_hat: float, epsilon: float) -> float:
    """Bundle value a bid has to exceed"""
    return (1.0 + epsilon) * e_hat


def compute_bid_rate(total_value: float, e_hat: float, epsilon: float, r2: float) -> float:
    """Fraction of the bundle the bidder keeps so that the proposer gets (1+eps)(1-r2)e_hat"""
    if total_value <= 0 or total_value <= compute_threshold(e_hat, epsilon):
        raise ProtocolViolation(
            f"bundle value {total_value!r} does not exceed threshold {compute_threshold(e_hat, epsilon)!r}"
        )
    r1 = (total_value - (1.0 + epsilon) * (1.0 - r2) * e_hat) / total_value
    if not 0.0 <= r1 < 1.0:
        raise ProtocolViolation(f"bid rate {r1!r} outside [0, 1)")
    return r1


def flashback_bid(mempool: Iterable[Transaction], e_hat: float, config: SimConfig, round: int,
                  bidder: str, excluded_ids: Optional[Set[int]] = None) -> Optional[Bid]:
    """Bid for round + 1, or None when the bundle does not clear the threshold"""
    if not config.bidding_enabled or e_hat <= 0:
        return None

    bid_set = select_bid_set(mempool, round, config.bid_count, excluded_ids)
    if not bid_set:
        return None

    total_value = math.fsum(tx.value for tx in bid_set)
    if total_value <= compute_threshold(e_hat, config.epsilon):
        return None

    if config.fixed_bid_rate is not None:
        r1 = config.fixed_bid_rate
    else:
        r1 = compute_bid_rate(total_value, e_hat, config.epsilon, config.r2)
        if not config.r2 - BID_RATE_SLACK < r1 < 1.0:
            raise ProtocolViolation(f"bid rate {r1!r} outside ({config.r2}, 1)")

    return Bid(
        bidder=bidder,
        target_round=round + 1,
        tx_ids=tuple(tx.id for tx in bid_set),
        total_value=total_value,
        r1=r1,
    )


def proposer_decide_bid(policy: ProposerBidPolicy, bid: Bid, e_hat: float,
                        rng: Optional[np.random.Generator] = None) -> bool:
    """Whether the next proposer commits to the bid"""
    payout = bid.proposer_payout_if_accepted
    if policy == ProposerBidPolicy.GREEDY:
        return payout > e_hat
    if policy == ProposerBidPolicy.RANDOM_HALF:
        return bool(rng.random() < 0.5)
    if policy == ProposerBidPolicy.PROPORTIONAL:
        total = payout + e_hat
        probability = payout / total if total > 0 else 0.5
        return bool(rng.random() < probability)
    raise ConfigError([('proposer_bid_policy', f"unknown policy {policy!r}")])


def _fill_block(builder: str, reserved: Sequence[Transaction], candidates: Iterable[Transaction],
                block_size: int, r1: float, r2: float) -> CandidateBlock:
    reserved_ids = {tx.id for tx in reserved}
    slots = block_size - len(reserved)
    filler = sorted((tx for tx in candidates if tx.id not in reserved_ids), key=lambda tx: tx.sort_key)[:slots]

    reserved_value = math.fsum(tx.value for tx in reserved)
    filler_value = math.fsum(tx.value for tx in filler)
    private_filler = math.fsum(tx.value for tx in filler if tx.kind == TxKind.PRIVATE)

    proposer_value = (1.0 - r1) * reserved_value + (1.0 - r2) * filler_value
    builder_value = r1 * reserved_value + r2 * filler_value
    return CandidateBlock(
        builder=builder,
        tx_ids=tuple(tx.id for tx in reserved) + tuple(tx.id for tx in filler),
        reserved_ids=tuple(tx.id for tx in reserved),
        total_value=reserved_value + filler_value,
        proposer_value=proposer_value,
        builder_value=builder_value,
        private_proposer_value=(1.0 - r1) * reserved_value + (1.0 - r2) * private_filler,
        reserved_value=reserved_value,
    )


def build_block_default(private_mempool: Iterable[Transaction], public_pool: Iterable[Transaction],
                        block_size: int, r2: float, builder: str = "") -> CandidateBlock:
    """Top-K transactions by fee across both pools, all split at r2"""
    return _fill_block(builder, (), chain(private_mempool, public_pool), block_size, r2, r2)


def build_block_with_reservation(reserved: Sequence[Transaction], public_pool: Iterable[Transaction], block_size: int,
                                 r1: float, r2: float, round: Optional[int] = None,
                                 confirmed_ids: Optional[Set[int]] = None, builder: str = "") -> CandidateBlock:
    """Reserved transactions at r1, remaining slots filled with public transactions at r2.

    Unreserved private transactions stay out of the block and remain in the
    builder's mempool for later bids or blocks.
    """
    if len(reserved) > block_size:
        raise ProtocolViolation(f"{len(reserved)} reserved transactions exceed block size {block_size}")
    confirmed_ids = confirmed_ids or set()
    for tx in reserved:
        if tx.id in confirmed_ids:
            raise ProtocolViolation(f"reserved transaction {tx.id} already confirmed")
        if round is not None and tx.last_round < round:
            raise ProtocolViolation(f"reserved transaction {tx.id} expired at round {tx.last_round}")
    return _fill_block(builder, reserved, public_pool, block_size, r1, r2)


def select_proposer_block(candidates: Sequence[CandidateBlock], reservation_flag: bool,
                          primary: str, rng: np.random.Generator) -> CandidateBlock:
    """Forced primary block under a reservation, otherwise the best proposer value"""
    if reservation_flag:
        for block in candidates:
            if block.builder == primary:
                return block
        raise ProtocolViolation("reserved round without a primary block")

    best = max(block.proposer_value for block in candidates)
    tied = [block for block in candidates if block.proposer_value == best]
    if len(tied) == 1:
        return tied[0]
    return tied[int(rng.integers(len(tied)))]
