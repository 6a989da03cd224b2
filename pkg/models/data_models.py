"""
Data models for the Flashback simulator
Simple data classes shared by the engine, policies, analytics and runners
"""
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from config.settings import DEFAULT_SIM_CONFIG, PARAMS_SUM_TOLERANCE
from models.errors import ConfigError

_DEFAULTS = DEFAULT_SIM_CONFIG


class TxKind(str, Enum):
    PRIVATE = "private"
    PUBLIC = "public"


class BuilderKind(str, Enum):
    FLASHBACK = "flashback"
    DEFAULT = "default"


class ProposerBidPolicy(str, Enum):
    GREEDY = "greedy"
    RANDOM_HALF = "random_half"
    PROPORTIONAL = "proportional"


class EstimateBasis(str, Enum):
    """Which part of the proposer take the reward estimate averages"""
    BLOCK = "block"
    PRIVATE = "private"
    BUNDLE = "bundle"


@dataclass
class Transaction:
    """A fee-bearing transaction, private or public"""
    id: int
    kind: TxKind
    value: float
    created_round: int
    ttl: int
    origin_user: Optional[int] = None
    assigned_builder: Optional[str] = None

    @property
    def last_round(self) -> int:
        """Last round in which the transaction can still be confirmed"""
        return self.created_round + self.ttl - 1

    @property
    def sort_key(self) -> Tuple[float, int]:
        """Highest fee first, ties by id"""
        return (-self.value, self.id)


@dataclass(frozen=True)
class SimConfig:
    """Complete description of one simulation run"""
    n_users: int = _DEFAULTS['n_users']
    q: float = _DEFAULTS['q']
    k_public: int = _DEFAULTS['k_public']
    ttl: int = _DEFAULTS['ttl']
    block_size: int = _DEFAULTS['block_size']
    bid_count: int = _DEFAULTS['bid_count']
    mean_private_fee: float = _DEFAULTS['mean_private_fee']
    mean_public_fee: float = _DEFAULTS['mean_public_fee']
    r2: float = _DEFAULTS['r2']
    epsilon: float = _DEFAULTS['epsilon']
    score_weights: Tuple[float, float, float] = _DEFAULTS['score_weights']
    window: int = _DEFAULTS['window']
    feedback_fraction: float = _DEFAULTS['feedback_fraction']
    initial_scores: Tuple[float, ...] = _DEFAULTS['initial_scores']
    initial_knowledge_length: int = _DEFAULTS['initial_knowledge_length']
    n_secondary_builders: int = _DEFAULTS['n_secondary_builders']
    proposer_bid_policy: ProposerBidPolicy = ProposerBidPolicy(_DEFAULTS['proposer_bid_policy'])
    rounds: int = _DEFAULTS['rounds']
    seed: int = _DEFAULTS['seed']
    bidding_enabled: bool = _DEFAULTS['bidding_enabled']
    fixed_bid_rate: Optional[float] = _DEFAULTS['fixed_bid_rate']
    uniform_routing: bool = _DEFAULTS['uniform_routing']
    score_floor: float = _DEFAULTS['score_floor']
    estimate_basis: EstimateBasis = EstimateBasis(_DEFAULTS['estimate_basis'])

    @property
    def n_builders(self) -> int:
        return 1 + self.n_secondary_builders

    def to_dict(self) -> Dict[str, Any]:
        """Convert to plain values for JSON output"""
        data = asdict(self)
        data['score_weights'] = list(self.score_weights)
        data['initial_scores'] = list(self.initial_scores)
        data['proposer_bid_policy'] = self.proposer_bid_policy.value
        data['estimate_basis'] = self.estimate_basis.value
        return data


@dataclass(frozen=True)
class AnalyticParams:
    """Parameters of the simplified two-builder reward model"""
    mu1: float
    mu2: float
    mu3: float
    rho: float
    r1: float
    r2: float

    def __post_init__(self):
        violations = []
        if not (0.0 < self.mu1 < 1.0 and 0.0 < self.mu2 < 1.0):
            violations.append(('mu1/mu2', "must lie in (0, 1)"))
        elif abs(self.mu1 + self.mu2 - 1.0) > PARAMS_SUM_TOLERANCE:
            violations.append(('mu1/mu2', f"must sum to 1, got {self.mu1 + self.mu2!r}"))
        if not self.mu3 > 0.0:
            violations.append(('mu3', "must be positive"))
        if not self.rho > 0.0:
            violations.append(('rho', "must be positive"))
        if not 0.0 <= self.r1 < 1.0:
            violations.append(('r1', "must lie in [0, 1)"))
        if not 0.0 <= self.r2 < 1.0:
            violations.append(('r2', "must lie in [0, 1)"))
        if violations:
            raise ConfigError(violations)

    @classmethod
    def from_mu2(cls, mu2: float, mu3: float, rho: float, r1: float, r2: float) -> "AnalyticParams":
        """Build params with mu1 = 1 - mu2"""
        return cls(mu1=1.0 - mu2, mu2=mu2, mu3=mu3, rho=rho, r1=r1, r2=r2)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass
class Reservation:
    """Transactions a proposer has pre-purchased for its round"""
    round: int
    tx_ids: Tuple[int, ...]
    r1: float


@dataclass
class Bid:
    """Offer of a reserved bundle to the next proposer"""
    bidder: str
    target_round: int
    tx_ids: Tuple[int, ...]
    total_value: float
    r1: float

    @property
    def proposer_payout_if_accepted(self) -> float:
        return (1.0 - self.r1) * self.total_value


@dataclass
class CandidateBlock:
    """Block offered by one builder to the current proposer"""
    builder: str
    tx_ids: Tuple[int, ...]
    reserved_ids: Tuple[int, ...]
    total_value: float
    proposer_value: float
    builder_value: float
    private_proposer_value: float = 0.0
    reserved_value: float = 0.0


@dataclass
class RoundLog:
    """Per-round record of the winning block and its split"""
    round: int
    winning_builder: str
    reservation_flag: bool
    block_value: float
    builder_take: float
    proposer_take: float
    scores_after: Dict[str, float]
    bid_issued: bool
    bid_value: Optional[float]
    bid_rate: Optional[float]
    expired_count: Dict[str, int]
    bid_accepted: bool = False
    proposer_private_take: float = 0.0
    proposer_bundle_take: float = 0.0
    reserved_value: float = 0.0
    included_ids: Tuple[int, ...] = ()
    refunds: Tuple[float, ...] = ()

    def to_row(self, builder_ids: List[str]) -> Dict[str, Any]:
        """Convert to a CSV row with one score and expiry column per builder"""
        row = {
            'round': self.round,
            'winning_builder': self.winning_builder,
            'reservation_flag': int(self.reservation_flag),
            'block_value': self.block_value,
            'builder_take': self.builder_take,
            'proposer_take': self.proposer_take,
            'bid_issued': int(self.bid_issued),
            'bid_value': self.bid_value,
            'bid_rate': self.bid_rate,
        }
        for builder in builder_ids:
            row[f'score_{builder}'] = self.scores_after[builder]
        for builder in builder_ids:
            row[f'expired_{builder}'] = self.expired_count[builder]
        return row


@dataclass
class ExpectedRewards:
    """Expected per-round rewards of validators and builders"""
    v_p_policy: float
    v_p_default: float
    v_primary: float
    v_secondary: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass
class OracleEstimate:
    """Monte Carlo means with their standard errors"""
    mean: ExpectedRewards
    stderr: ExpectedRewards
    n_rounds: int
    seed: int


@dataclass
class FixedPointResult:
    """Outcome of the equilibrium search, success or not"""
    success: bool
    mu2_star: Optional[float] = None
    residual: Optional[float] = None
    iterations: int = 0
    bracket: Optional[Tuple[float, float]] = None
    error: str = ""

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['bracket'] = list(self.bracket) if self.bracket else None
        return data


@dataclass
class CheckEntry:
    """One evaluated point of an analytic check"""
    check: str
    point: Dict[str, float]
    passed: bool
    values: Dict[str, Any] = field(default_factory=dict)


@dataclass
class CheckReport:
    """Pass/fail report of a named check over many points"""
    name: str
    entries: List[CheckEntry] = field(default_factory=list)
    error: str = ""

    @property
    def passed(self) -> bool:
        return not self.error and all(entry.passed for entry in self.entries)

    @property
    def failures(self) -> List[CheckEntry]:
        return [entry for entry in self.entries if not entry.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'passed': self.passed,
            'n_points': len(self.entries),
            'n_failures': len(self.failures),
            'error': self.error,
            'entries': [asdict(entry) for entry in self.entries],
        }


@dataclass
class TxRecord:
    """Transaction row of a block dump"""
    hash: str
    sender: str
    receiver: str
    direct_payment_fee: float
    transaction_fee: float
    gas_price: float
    gas_used: int

    @property
    def fee(self) -> float:
        return self.transaction_fee + self.direct_payment_fee


@dataclass
class BlockRecord:
    """Block row of a block dump"""
    number: int
    tx_hash_list: List[str]
    base_fee: float


@dataclass
class DatasetRecord:
    """A transaction joined with its block and private label"""
    tx: TxRecord
    block: BlockRecord
    private_flag: bool


@dataclass
class FittedDistributions:
    """Fee distribution summary derived from a dataset"""
    mean_private_fee: float
    mean_public_fee: float
    private_count_fraction: float
    private_fee_share: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass
class AcceptanceCheck:
    """Result of one statistical acceptance check on a preset"""
    name: str
    passed: bool
    observed: Any = None
    expected: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
