"""
Experiment Presets
Named experiments: base overrides, sweep points and acceptance checks
"""
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Mapping, Optional, Tuple

from config.settings import DEFAULT_SEEDS

ANALYTIC_CHECK = 'analytic_check'


@dataclass(frozen=True)
class ExperimentPreset:
    """One named experiment run over a list of seeds"""
    name: str
    description: str
    overrides: Mapping[str, Any] = field(default_factory=dict)
    points: Tuple[Tuple[str, Mapping[str, Any]], ...] = ()
    seeds: Tuple[int, ...] = DEFAULT_SEEDS
    checks: Optional[str] = None
    sweep: bool = False
    distributions: bool = False

    @property
    def replications(self) -> int:
        return len(self.seeds)

    def sweep_points(self) -> Tuple[Tuple[str, Mapping[str, Any]], ...]:
        """Labelled override sets; a single unlabelled point for plain presets"""
        return self.points or ((self.name, {}),)

    def with_seeds(self, seeds) -> "ExperimentPreset":
        return replace(self, seeds=tuple(seeds))


def _ratio_label(ratio: float) -> str:
    if ratio >= 1:
        return f"ratio_{int(ratio)}"
    return f"ratio_1_{int(round(1 / ratio))}"


SCORE_RATIOS = (16, 8, 4, 2, 1, 1 / 2, 1 / 4, 1 / 8, 1 / 16)
TTL_VALUES = (1, 2, 5, 10, 15, 20)

PRESETS: Dict[str, ExperimentPreset] = {
    'baseline': ExperimentPreset(
        name='baseline',
        description="Default config, one primary against one secondary",
        checks='baseline',
        distributions=True,
    ),
    'bid_policy_compare': ExperimentPreset(
        name='bid_policy_compare',
        description="Greedy, coin-flip and reward-proportional proposers",
        points=tuple((policy, {'proposer_bid_policy': policy})
                     for policy in ('greedy', 'random_half', 'proportional')),
        sweep=True,
        distributions=True,
    ),
    'initial_score_sweep': ExperimentPreset(
        name='initial_score_sweep',
        description="Primary/secondary initial score ratios with 200 rounds of injected history",
        overrides={'initial_knowledge_length': 200},
        points=tuple((_ratio_label(ratio), {'initial_scores': (float(ratio), 1.0)}) for ratio in SCORE_RATIOS),
        sweep=True,
    ),
    'bid_count_sweep': ExperimentPreset(
        name='bid_count_sweep',
        description="Bundles of 1 to 20 private transactions",
        points=tuple((f"bid_count_{k}", {'bid_count': k}) for k in range(1, 21)),
        sweep=True,
    ),
    'ttl_sweep': ExperimentPreset(
        name='ttl_sweep',
        description="Private transaction lifetimes",
        points=tuple((f"ttl_{ttl}", {'ttl': ttl}) for ttl in TTL_VALUES),
        sweep=True,
    ),
    'zero_bid_rate': ExperimentPreset(
        name='zero_bid_rate',
        description="Bids keep nothing for the builder (r1 = 0), uniform user routing",
        overrides={'fixed_bid_rate': 0.0, 'uniform_routing': True},
        checks='zero_bid_rate',
        distributions=True,
    ),
    'multi_builder': ExperimentPreset(
        name='multi_builder',
        description="One primary against two secondaries",
        overrides={'n_secondary_builders': 2, 'initial_scores': (1.0, 1.0, 1.0)},
        checks='multi_builder',
        distributions=True,
    ),
    'null_control': ExperimentPreset(
        name='null_control',
        description="Bidding disabled, r1 = r2 and uniform routing: both builders run the default policy",
        overrides={'bidding_enabled': False, 'fixed_bid_rate': 0.02, 'uniform_routing': True},
        checks='null_control',
    ),
}

PRESET_NAMES = tuple(PRESETS) + (ANALYTIC_CHECK,)
