"""
Shared test fixtures
"""
import dataclasses
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from models.data_models import SimConfig, Transaction, TxKind  # noqa: E402


@pytest.fixture
def small_config() -> SimConfig:
    """A config small enough to run a few hundred rounds in well under a second"""
    return SimConfig(
        n_users=20,
        q=0.2,
        k_public=10,
        ttl=5,
        block_size=10,
        bid_count=3,
        window=100,
        rounds=300,
        seed=7,
    )


@pytest.fixture
def tiny_config(small_config) -> SimConfig:
    return dataclasses.replace(small_config, rounds=40)


@pytest.fixture
def out_dir(tmp_path) -> Path:
    return tmp_path / "out"


def make_tx(tx_id: int, value: float, kind: TxKind = TxKind.PRIVATE, created_round: int = 0,
            ttl: int = 10, builder: str = "primary") -> Transaction:
    """Transaction factory used across test modules"""
    if kind == TxKind.PUBLIC:
        return Transaction(id=tx_id, kind=kind, value=value, created_round=created_round, ttl=1)
    return Transaction(id=tx_id, kind=kind, value=value, created_round=created_round, ttl=ttl,
                       origin_user=tx_id, assigned_builder=builder)


@pytest.fixture
def tx_factory():
    return make_tx
