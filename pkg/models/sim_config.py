"""
Simulation Config
Validation and key = value file handling for SimConfig
"""
import dataclasses
import logging
import typing
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from config.settings import MAX_SEED
from models.base_model import BaseModel
from models.data_models import EstimateBasis, ProposerBidPolicy, SimConfig
from models.errors import ConfigError

logger = logging.getLogger(__name__)

FIELD_TYPES = typing.get_type_hints(SimConfig)
FIELD_NAMES = [f.name for f in dataclasses.fields(SimConfig)]


def epsilon_lower_bound(r2: float) -> float:
    """Smallest epsilon for which an accepted bid pays more than the estimate"""
    return 1.0 / (1.0 - r2) - 1.0


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_real(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def validate_config(config: SimConfig) -> SimConfig:
    """Return the config unchanged if every field constraint holds, otherwise raise ConfigError"""
    violations: List[Tuple[str, str]] = []

    def require(name: str, condition: bool, message: str):
        if not condition:
            violations.append((name, message))

    for name in ('n_users', 'ttl', 'block_size', 'bid_count', 'window',
                 'initial_knowledge_length', 'n_secondary_builders'):
        value = getattr(config, name)
        require(name, _is_int(value) and value > 0, f"must be a positive integer, got {value!r}")

    require('k_public', _is_int(config.k_public) and config.k_public >= 0,
            f"must be a non-negative integer, got {config.k_public!r}")
    require('rounds', _is_int(config.rounds) and config.rounds >= 0,
            f"must be a non-negative integer, got {config.rounds!r}")
    require('seed', _is_int(config.seed) and 0 <= config.seed < MAX_SEED,
            f"must be an unsigned 64-bit integer, got {config.seed!r}")

    require('q', _is_real(config.q) and 0.0 < config.q < 1.0, f"must lie in (0, 1), got {config.q!r}")
    require('r2', _is_real(config.r2) and 0.0 < config.r2 < 1.0, f"must lie in (0, 1), got {config.r2!r}")
    require('feedback_fraction',
            _is_real(config.feedback_fraction) and 0.0 < config.feedback_fraction <= 1.0,
            f"must lie in (0, 1], got {config.feedback_fraction!r}")
    for name in ('mean_private_fee', 'mean_public_fee', 'score_floor'):
        value = getattr(config, name)
        require(name, _is_real(value) and value > 0, f"must be positive, got {value!r}")

    if _is_int(config.bid_count) and _is_int(config.block_size):
        require('bid_count', config.bid_count < config.block_size, "bid_count must be < block_size")

    if _is_real(config.r2) and 0.0 < config.r2 < 1.0:
        bound = epsilon_lower_bound(config.r2)
        require('epsilon', _is_real(config.epsilon) and config.epsilon > bound,
                f"epsilon below 1/(1-r2)-1 = {bound:.6g}")

    weights = tuple(config.score_weights)
    if len(weights) != 3:
        violations.append(('score_weights', f"expected (w_r, w_d, w_m), got {weights!r}"))
    else:
        w_r, w_d, w_m = weights
        require('score_weights', w_r > 0 and w_d > 0 and w_m < 0,
                f"need w_r > 0, w_d > 0, w_m < 0, got {weights!r}")

    scores = tuple(config.initial_scores)
    if _is_int(config.n_secondary_builders):
        require('initial_scores', len(scores) == config.n_builders,
                f"expected {config.n_builders} entries (primary first), got {len(scores)}")
    require('initial_scores', all(_is_real(s) and s > 0 for s in scores), "scores must be positive")

    require('proposer_bid_policy', isinstance(config.proposer_bid_policy, ProposerBidPolicy),
            f"unknown policy {config.proposer_bid_policy!r}")
    require('estimate_basis', isinstance(config.estimate_basis, EstimateBasis),
            f"unknown basis {config.estimate_basis!r}")
    if config.fixed_bid_rate is not None:
        require('fixed_bid_rate', _is_real(config.fixed_bid_rate) and 0.0 <= config.fixed_bid_rate < 1.0,
                f"must lie in [0, 1), got {config.fixed_bid_rate!r}")
    for name in ('bidding_enabled', 'uniform_routing'):
        require(name, isinstance(getattr(config, name), bool), "must be true or false")

    if violations:
        raise ConfigError(violations)
    return config


def coerce_field(name: str, value: Any) -> Any:
    """Convert a raw value (text or Python) into the field's type"""
    if name not in FIELD_TYPES:
        raise ConfigError([(name, "unknown config key")])
    target = FIELD_TYPES[name]
    try:
        if isinstance(value, str):
            return BaseModel.parse_value(value, target)
        inner, _ = BaseModel.unwrap_optional(target)
        if value is None:
            return None
        if isinstance(inner, type) and issubclass(inner, (ProposerBidPolicy, EstimateBasis)):
            return inner(value)
        if isinstance(value, list):
            return tuple(value)
        return value
    except ValueError as e:
        raise ConfigError([(name, str(e))]) from e


def config_from_mapping(values: Mapping[str, Any], base: Optional[SimConfig] = None) -> SimConfig:
    """Apply overrides on top of a base config (defaults when omitted)"""
    base = base or SimConfig()
    changes = {name: coerce_field(name, value) for name, value in values.items()}
    return dataclasses.replace(base, **changes)


def config_to_mapping(config: SimConfig) -> Dict[str, str]:
    """Field name to formatted text, in declaration order"""
    return {name: BaseModel.format_value(getattr(config, name)) for name in FIELD_NAMES}


def parse_config_text(text: str) -> Dict[str, str]:
    """Parse key = value lines; # starts a comment"""
    values: Dict[str, str] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError([(f"line {line_number}", f"expected 'key = value', got {raw.strip()!r}")])
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in FIELD_TYPES:
            raise ConfigError([(key, f"unknown config key on line {line_number}")])
        values[key] = value
    return values


def load_config_file(path: Union[str, Path], base: Optional[SimConfig] = None) -> SimConfig:
    """Read a config file and apply it on top of base"""
    text = Path(path).read_text(encoding='utf-8')
    values = parse_config_text(text)
    logger.debug("Loaded %d config keys from %s", len(values), path)
    return config_from_mapping(values, base)


def dump_config(config: SimConfig) -> str:
    """Write a config in the same key = value format load_config_file reads"""
    lines = [f"{name} = {value}" for name, value in config_to_mapping(config).items()]
    return "\n".join(lines) + "\n"
