"""
Engine
Seeded round loop: transaction generation, routing, block settlement and scores
"""
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from itertools import islice
from typing import Deque, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
import pandas as pd

from config.settings import (
    CONSERVATION_TOLERANCE, CONVERGENCE_BAND, PRIMARY_BUILDER, ROLLING_WINDOW, SECONDARY_PREFIX,
)
from models.data_models import (
    BuilderKind, CandidateBlock, Reservation, RoundLog, SimConfig, Transaction, TxKind,
)
from models.errors import InvariantViolation, ProtocolViolation
from models.policies import (
    ProposerRewardEstimator, build_block_default, build_block_with_reservation, flashback_bid,
    proposer_decide_bid, select_proposer_block,
)
from utils.statistics import convergence_round, rolling_share

logger = logging.getLogger(__name__)


def builder_ids_for(config: SimConfig) -> List[str]:
    """Primary first, then secondary_1 .. secondary_n"""
    return [PRIMARY_BUILDER] + [f"{SECONDARY_PREFIX}_{i}" for i in range(1, config.n_secondary_builders + 1)]


@dataclass
class BuilderState:
    """Mempool, reservation and feedback windows of one builder"""
    id: str
    kind: BuilderKind
    window: int
    private_mempool: Dict[int, Transaction] = field(default_factory=dict)
    reservation: Optional[Reservation] = None
    reserved_ids: Set[int] = field(default_factory=set)
    reward_window: Deque[float] = field(init=False)
    inclusion_delay_window: Deque[float] = field(init=False)
    expiry_window: Deque[float] = field(init=False)

    def __post_init__(self):
        self.reward_window = deque(maxlen=self.window)
        self.inclusion_delay_window = deque(maxlen=self.window)
        self.expiry_window = deque(maxlen=self.window)


@dataclass
class ScoreBoard:
    """Per-builder score and its three components"""
    scores: Dict[str, float]
    components: Dict[str, Tuple[float, float, float]]

    def routing_probabilities(self, builder_ids: Sequence[str]) -> np.ndarray:
        weights = np.array([self.scores[b] for b in builder_ids], dtype=float)
        return weights / weights.sum()


def _window_mean(window: Deque[float], size: int) -> float:
    if not window:
        return 0.0
    if len(window) > size:
        values = list(islice(window, len(window) - size, None))
        return sum(values) / len(values)
    return sum(window) / len(window)


def update_scores(states: Sequence[BuilderState], weights: Tuple[float, float, float], window: int,
                  score_floor: float = 1e-6) -> ScoreBoard:
    """Weighted moving-average score of each builder, floored at score_floor"""
    w_r, w_d, w_m = weights
    scores: Dict[str, float] = {}
    components: Dict[str, Tuple[float, float, float]] = {}
    for state in states:
        f_r = _window_mean(state.reward_window, window)
        f_d = _window_mean(state.inclusion_delay_window, window)
        f_m = _window_mean(state.expiry_window, window)
        components[state.id] = (f_r, f_d, f_m)
        scores[state.id] = max(w_r * f_r + w_d * f_d + w_m * f_m, score_floor)
    return ScoreBoard(scores=scores, components=components)


def generate_round_transactions(rng: np.random.Generator, config: SimConfig, round: int, scores: ScoreBoard,
                                first_id: int = 0) -> Tuple[List[Transaction], List[Transaction]]:
    """Private transactions routed by score, plus k_public public transactions seen by every builder"""
    builder_ids = list(scores.scores)

    emitting_users = np.flatnonzero(rng.random(config.n_users) < config.q)
    private_values = rng.exponential(config.mean_private_fee, size=len(emitting_users))
    if config.uniform_routing:
        probabilities = np.full(len(builder_ids), 1.0 / len(builder_ids))
    else:
        probabilities = scores.routing_probabilities(builder_ids)
    targets = rng.choice(len(builder_ids), size=len(emitting_users), p=probabilities)
    public_values = rng.exponential(config.mean_public_fee, size=config.k_public)

    next_id = first_id
    private: List[Transaction] = []
    for user, value, target in zip(emitting_users, private_values, targets):
        private.append(Transaction(
            id=next_id, kind=TxKind.PRIVATE, value=float(value), created_round=round, ttl=config.ttl,
            origin_user=int(user), assigned_builder=builder_ids[int(target)],
        ))
        next_id += 1

    public: List[Transaction] = []
    for value in public_values:
        public.append(Transaction(id=next_id, kind=TxKind.PUBLIC, value=float(value), created_round=round, ttl=1))
        next_id += 1
    return private, public


@dataclass
class WorldState:
    """Everything a run carries from one round to the next"""
    config: SimConfig
    builders: List[BuilderState]
    scores: ScoreBoard
    estimator: ProposerRewardEstimator
    round: int = 0
    next_tx_id: int = 0
    logs: List[RoundLog] = field(default_factory=list)
    confirmed_ids: Set[int] = field(default_factory=set)

    @property
    def primary(self) -> BuilderState:
        return self.builders[0]

    @property
    def builder_ids(self) -> List[str]:
        return [b.id for b in self.builders]


def initial_state(config: SimConfig) -> WorldState:
    """Fresh world with initial scores injected as synthetic reward history"""
    builders = []
    w_r = config.score_weights[0]
    for index, builder_id in enumerate(builder_ids_for(config)):
        kind = BuilderKind.FLASHBACK if index == 0 else BuilderKind.DEFAULT
        state = BuilderState(id=builder_id, kind=kind, window=config.window)
        for _ in range(config.initial_knowledge_length):
            state.reward_window.append(config.initial_scores[index] / w_r)
        builders.append(state)

    return WorldState(
        config=config,
        builders=builders,
        scores=update_scores(builders, config.score_weights, config.window, config.score_floor),
        estimator=ProposerRewardEstimator(config.window, config.estimate_basis),
    )


def _expire(state: WorldState, rng: np.random.Generator) -> Tuple[Dict[str, int], List[int]]:
    t = state.round
    expired: Dict[str, int] = {}
    sampled: List[int] = []
    for builder in state.builders:
        gone = [tx_id for tx_id, tx in builder.private_mempool.items() if tx.last_round < t]
        for tx_id in gone:
            del builder.private_mempool[tx_id]
            builder.reserved_ids.discard(tx_id)
        expired[builder.id] = len(gone)
        sampled.append(int(rng.binomial(len(gone), state.config.feedback_fraction)))
    return expired, sampled


def _candidate_blocks(state: WorldState, public: List[Transaction],
                      reservation: Optional[Reservation]) -> List[CandidateBlock]:
    config = state.config
    candidates = []
    for builder in state.builders:
        if builder.kind == BuilderKind.FLASHBACK and reservation is not None:
            missing = [tx_id for tx_id in reservation.tx_ids if tx_id not in builder.private_mempool]
            if missing:
                raise ProtocolViolation(f"reserved transactions {missing} no longer available at round {state.round}")
            reserved = [builder.private_mempool[tx_id] for tx_id in reservation.tx_ids]
            block = build_block_with_reservation(
                reserved, public, config.block_size, reservation.r1, config.r2,
                round=state.round, confirmed_ids=state.confirmed_ids, builder=builder.id,
            )
        else:
            block = build_block_default(builder.private_mempool.values(), public, config.block_size,
                                        config.r2, builder=builder.id)
        candidates.append(block)
    return candidates


def _bundle_take(confirmed_private: List[Transaction], reservation: Optional[Reservation],
                 config: SimConfig) -> float:
    """Proposer take on the bid_count highest-fee private transactions of the block"""
    reserved_set = set(reservation.tx_ids) if reservation is not None else set()
    top = sorted(confirmed_private, key=lambda tx: tx.sort_key)[:config.bid_count]
    return math.fsum(
        (1.0 - (reservation.r1 if tx.id in reserved_set else config.r2)) * tx.value for tx in top
    )


def _check_settlement(state: WorldState, block: CandidateBlock, included: List[Transaction],
                      reservation_flag: bool):
    t = state.round
    fees = math.fsum(tx.value for tx in included)
    if abs(block.builder_value + block.proposer_value - fees) > CONSERVATION_TOLERANCE:
        raise InvariantViolation(
            f"round {t}: takes {block.builder_value + block.proposer_value!r} != confirmed fees {fees!r}"
        )
    if reservation_flag and block.builder != PRIMARY_BUILDER:
        raise InvariantViolation(f"round {t}: reserved proposer took the {block.builder} block")
    for tx in included:
        if tx.last_round < t:
            raise InvariantViolation(f"round {t}: transaction {tx.id} confirmed after expiry")
        if tx.kind == TxKind.PRIVATE and tx.id in state.confirmed_ids:
            raise InvariantViolation(f"round {t}: transaction {tx.id} confirmed twice")


def step(state: WorldState, rng: np.random.Generator) -> RoundLog:
    """Play one round and return its log.

    Random draws happen in a fixed order: expiry feedback, private emission,
    private values, routing, public values, block tie-break, proposer bid
    decision, inclusion feedback.
    """
    config = state.config
    t = state.round
    primary = state.primary

    expired, sampled_expired = _expire(state, rng)

    private, public = generate_round_transactions(rng, config, t, state.scores, first_id=state.next_tx_id)
    state.next_tx_id += len(private) + len(public)
    by_id = {b.id: b for b in state.builders}
    for tx in private:
        by_id[tx.assigned_builder].private_mempool[tx.id] = tx

    reservation = primary.reservation if primary.reservation and primary.reservation.round == t else None
    if primary.reservation is not None and reservation is None:
        raise InvariantViolation(f"round {t}: stale reservation for round {primary.reservation.round}")
    reservation_flag = reservation is not None

    candidates = _candidate_blocks(state, public, reservation)
    block = select_proposer_block(candidates, reservation_flag, PRIMARY_BUILDER, rng)
    winner = by_id[block.builder]

    public_by_id = {tx.id: tx for tx in public}
    included = [winner.private_mempool.get(tx_id) or public_by_id[tx_id] for tx_id in block.tx_ids]
    _check_settlement(state, block, included, reservation_flag)

    confirmed_private = [tx for tx in included if tx.kind == TxKind.PRIVATE]
    bundle_take = _bundle_take(confirmed_private, reservation, config)
    for tx in confirmed_private:
        for builder in state.builders:
            builder.private_mempool.pop(tx.id, None)
            builder.reserved_ids.discard(tx.id)
        state.confirmed_ids.add(tx.id)

    refunds: Tuple[float, ...] = ()
    if reservation is not None:
        rate_gap = max(0.0, config.r2 - reservation.r1)
        reserved_set = set(reservation.tx_ids)
        refunds = tuple(rate_gap * tx.value for tx in included if tx.id in reserved_set)
        primary.reservation = None

    bid = None
    accepted = False
    if config.bidding_enabled:
        e_hat = state.estimator.estimate(t)
        bid = flashback_bid(primary.private_mempool.values(), e_hat, config, t, primary.id,
                            excluded_ids=primary.reserved_ids)
        if bid is not None:
            accepted = proposer_decide_bid(config.proposer_bid_policy, bid, e_hat, rng)
            if accepted:
                primary.reservation = Reservation(round=t + 1, tx_ids=bid.tx_ids, r1=bid.r1)
                primary.reserved_ids.update(bid.tx_ids)

    feedback = rng.random(len(confirmed_private)) < config.feedback_fraction
    for tx, keep in zip(confirmed_private, feedback):
        if keep:
            winner.inclusion_delay_window.append(float(tx.created_round + tx.ttl - t))
    for builder, count in zip(state.builders, sampled_expired):
        builder.reward_window.append(block.builder_value if builder is winner else 0.0)
        builder.expiry_window.append(float(count))
    state.scores = update_scores(state.builders, config.score_weights, config.window, config.score_floor)

    log = RoundLog(
        round=t,
        winning_builder=block.builder,
        reservation_flag=reservation_flag,
        block_value=block.total_value,
        builder_take=block.builder_value,
        proposer_take=block.proposer_value,
        scores_after=dict(state.scores.scores),
        bid_issued=bid is not None,
        bid_value=bid.total_value if bid is not None else None,
        bid_rate=bid.r1 if bid is not None else None,
        expired_count=expired,
        bid_accepted=accepted,
        proposer_private_take=block.private_proposer_value,
        proposer_bundle_take=bundle_take,
        reserved_value=block.reserved_value,
        included_ids=block.tx_ids,
        refunds=refunds,
    )
    state.estimator.record(log)
    state.logs.append(log)
    state.round += 1
    return log


@dataclass
class SimResult:
    """Round logs of one run plus the aggregates reported per replication"""
    config: SimConfig
    builder_ids: List[str]
    logs: List[RoundLog]

    @property
    def rounds(self) -> int:
        return len(self.logs)

    def winners(self, warmup: int = 0) -> List[str]:
        return [log.winning_builder for log in self.logs if log.round >= warmup]

    def block_share(self, warmup: int = 0) -> Dict[str, float]:
        """Fraction of blocks won by each builder from round warmup on"""
        winners = self.winners(warmup)
        if not winners:
            return {b: 0.0 for b in self.builder_ids}
        return {b: winners.count(b) / len(winners) for b in self.builder_ids}

    def blocks_won(self, warmup: int = 0) -> Dict[str, int]:
        winners = self.winners(warmup)
        return {b: winners.count(b) for b in self.builder_ids}

    @property
    def cumulative_rewards(self) -> Dict[str, float]:
        totals = {b: [] for b in self.builder_ids}
        for log in self.logs:
            totals[log.winning_builder].append(log.builder_take)
        return {b: math.fsum(values) for b, values in totals.items()}

    @property
    def per_block_rewards(self) -> Dict[str, float]:
        """Mean builder take over the blocks each builder won"""
        won = self.blocks_won()
        cumulative = self.cumulative_rewards
        return {b: cumulative[b] / won[b] if won[b] else 0.0 for b in self.builder_ids}

    @property
    def proposer_rewards(self) -> Dict[str, List[float]]:
        """Proposer takes grouped by the builder whose block was chosen"""
        rewards = {b: [] for b in self.builder_ids}
        for log in self.logs:
            rewards[log.winning_builder].append(log.proposer_take)
        return rewards

    @property
    def user_refunds(self) -> List[float]:
        return [refund for log in self.logs for refund in log.refunds]

    @property
    def reservation_rate(self) -> float:
        if not self.logs:
            return 0.0
        return sum(log.reservation_flag for log in self.logs) / len(self.logs)

    @property
    def bids_issued(self) -> int:
        return sum(log.bid_issued for log in self.logs)

    @property
    def bids_accepted(self) -> int:
        return sum(log.bid_accepted for log in self.logs)

    def rolling_primary_share(self, window: int = ROLLING_WINDOW) -> np.ndarray:
        return rolling_share([log.winning_builder == PRIMARY_BUILDER for log in self.logs], window)

    def convergence_round(self, window: int = ROLLING_WINDOW, band: float = CONVERGENCE_BAND) -> Optional[int]:
        return convergence_round(self.rolling_primary_share(window), band)

    def round_frame(self) -> pd.DataFrame:
        """Per-round table in the round CSV column order"""
        rows = [log.to_row(self.builder_ids) for log in self.logs]
        columns = ['round', 'winning_builder', 'reservation_flag', 'block_value', 'builder_take',
                   'proposer_take', 'bid_issued', 'bid_value', 'bid_rate']
        columns += [f'score_{b}' for b in self.builder_ids] + [f'expired_{b}' for b in self.builder_ids]
        return pd.DataFrame(rows, columns=columns)


def run(config: SimConfig) -> SimResult:
    """Play config.rounds rounds from a fresh world seeded with config.seed"""
    rng = np.random.default_rng(config.seed)
    state = initial_state(config)
    for _ in range(config.rounds):
        step(state, rng)
    logger.debug("Run seed=%d finished after %d rounds", config.seed, config.rounds)
    return SimResult(config=config, builder_ids=state.builder_ids, logs=state.logs)
