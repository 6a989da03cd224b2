"""
Dataset
Block and transaction dump ingestion, private labels and fee distribution fits
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats

from models.data_models import BlockRecord, DatasetRecord, FittedDistributions, TxRecord
from models.errors import DatasetError

logger = logging.getLogger(__name__)

TX_COLUMNS = ['hash', 'sender', 'receiver', 'direct_payment_fee', 'transaction_fee', 'gas_price', 'gas_used']
BLOCK_COLUMNS = ['block_number', 'tx_hashes', 'base_fee']
HASH_SEPARATOR = ';'

PathLike = Union[str, Path]


class LoadedDataset(list):
    """List of DatasetRecord that also remembers label hashes with no matching transaction"""

    def __init__(self, records: Sequence[DatasetRecord] = (), unknown_labels: Sequence[str] = ()):
        super().__init__(records)
        self.unknown_labels = list(unknown_labels)


def _read_table(path: PathLike, columns: List[str]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        frame = pd.DataFrame(columns=columns)
    missing = [column for column in columns if column not in frame.columns]
    if missing:
        raise DatasetError(f"{path}: missing columns {missing}")
    return frame[columns]


def _to_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        return float('nan')


def _numeric(frame: pd.DataFrame, column: str, path: PathLike, integer: bool = False) -> pd.Series:
    # float() rather than pd.to_numeric so written values read back bit-exactly
    values = frame[column].map(_to_float).astype(float)
    bad = ~np.isfinite(values) | (values < 0)
    if integer:
        bad |= np.isfinite(values) & (values != values.round())
    if bad.any():
        index = int(np.flatnonzero(bad.to_numpy())[0])
        raise DatasetError(
            f"{path}: line {index + 2}: bad {column} value {frame[column].iloc[index]!r}"
        )
    return values


def _load_transactions(path: PathLike) -> Dict[str, TxRecord]:
    frame = _read_table(path, TX_COLUMNS)
    numbers = {column: _numeric(frame, column, path, integer=column == 'gas_used')
               for column in ('direct_payment_fee', 'transaction_fee', 'gas_price', 'gas_used')}

    transactions: Dict[str, TxRecord] = {}
    for index, tx_hash in enumerate(frame['hash']):
        if not tx_hash:
            raise DatasetError(f"{path}: line {index + 2}: empty hash")
        if tx_hash in transactions:
            raise DatasetError(f"{path}: line {index + 2}: duplicate hash {tx_hash}")
        transactions[tx_hash] = TxRecord(
            hash=tx_hash,
            sender=frame['sender'].iloc[index],
            receiver=frame['receiver'].iloc[index],
            direct_payment_fee=float(numbers['direct_payment_fee'].iloc[index]),
            transaction_fee=float(numbers['transaction_fee'].iloc[index]),
            gas_price=float(numbers['gas_price'].iloc[index]),
            gas_used=int(numbers['gas_used'].iloc[index]),
        )
    return transactions


def _load_blocks(path: PathLike) -> List[BlockRecord]:
    frame = _read_table(path, BLOCK_COLUMNS)
    numbers = _numeric(frame, 'block_number', path, integer=True)
    base_fees = _numeric(frame, 'base_fee', path)
    blocks = []
    for index in range(len(frame)):
        hashes = [h.strip() for h in frame['tx_hashes'].iloc[index].split(HASH_SEPARATOR) if h.strip()]
        blocks.append(BlockRecord(number=int(numbers.iloc[index]), tx_hash_list=hashes,
                                  base_fee=float(base_fees.iloc[index])))
    return blocks


def _load_labels(path: PathLike) -> List[str]:
    text = Path(path).read_text(encoding='utf-8')
    return [line.strip() for line in text.splitlines() if line.strip()]


def load_dataset(tx_path: PathLike, block_path: PathLike, private_labels_path: PathLike) -> LoadedDataset:
    """Join transactions, blocks and private labels into one record per confirmed transaction"""
    transactions = _load_transactions(tx_path)
    blocks = _load_blocks(block_path)
    labels = set(_load_labels(private_labels_path))

    records: List[DatasetRecord] = []
    placed: Dict[str, int] = {}
    for block in blocks:
        for tx_hash in block.tx_hash_list:
            if tx_hash not in transactions:
                raise DatasetError(f"{block_path}: block {block.number} lists unknown transaction {tx_hash}")
            if tx_hash in placed:
                raise DatasetError(
                    f"{block_path}: transaction {tx_hash} listed in blocks {placed[tx_hash]} and {block.number}"
                )
            placed[tx_hash] = block.number
            records.append(DatasetRecord(tx=transactions[tx_hash], block=block, private_flag=tx_hash in labels))

    orphans = len(transactions) - len(placed)
    if orphans:
        logger.warning("%d transactions in %s belong to no block and were skipped", orphans, tx_path)
    unknown = sorted(labels - set(transactions))
    if unknown:
        logger.warning("%d private labels match no transaction, e.g. %s", len(unknown), unknown[0])

    logger.info("Loaded %d transactions (%d private) from %d blocks",
                len(records), sum(r.private_flag for r in records), len(blocks))
    return LoadedDataset(records, unknown)


def write_dataset(records: Sequence[DatasetRecord], tx_path: PathLike, block_path: PathLike,
                  labels_path: PathLike):
    """Write records in the three-file layout load_dataset reads"""
    tx_rows = [{
        'hash': r.tx.hash, 'sender': r.tx.sender, 'receiver': r.tx.receiver,
        'direct_payment_fee': r.tx.direct_payment_fee, 'transaction_fee': r.tx.transaction_fee,
        'gas_price': r.tx.gas_price, 'gas_used': r.tx.gas_used,
    } for r in records]
    pd.DataFrame(tx_rows, columns=TX_COLUMNS).to_csv(tx_path, index=False)

    blocks: Dict[int, BlockRecord] = {}
    for r in records:
        blocks.setdefault(r.block.number, r.block)
    block_rows = [{
        'block_number': block.number, 'tx_hashes': HASH_SEPARATOR.join(block.tx_hash_list),
        'base_fee': block.base_fee,
    } for block in blocks.values()]
    pd.DataFrame(block_rows, columns=BLOCK_COLUMNS).to_csv(block_path, index=False)

    private = [r.tx.hash for r in records if r.private_flag]
    Path(labels_path).write_text("".join(f"{h}\n" for h in private), encoding='utf-8')


def generate_synthetic_dataset(n_blocks: int, seed: int, txs_per_block: int = 100,
                               private_fraction: float = 0.03, mean_private_fee: float = 3.59,
                               mean_public_fee: float = 1.0) -> List[DatasetRecord]:
    """Seeded schema-identical stand-in for a real block dump"""
    rng = np.random.default_rng(seed)
    records: List[DatasetRecord] = []
    counter = 0
    for block_index in range(n_blocks):
        private_flags = rng.random(txs_per_block) < private_fraction
        fees = np.where(private_flags,
                        rng.exponential(mean_private_fee, size=txs_per_block),
                        rng.exponential(mean_public_fee, size=txs_per_block))
        # private flow pays part of its fee directly to the builder
        direct_shares = np.where(private_flags, rng.uniform(0.2, 0.8, size=txs_per_block), 0.0)
        gas_used = rng.integers(21_000, 300_000, size=txs_per_block)

        hashes = [f"0x{counter + i:064x}" for i in range(txs_per_block)]
        counter += txs_per_block
        block = BlockRecord(number=block_index, tx_hash_list=hashes, base_fee=float(rng.uniform(5.0, 50.0)))
        for i, tx_hash in enumerate(hashes):
            direct = float(fees[i] * direct_shares[i])
            transaction_fee = float(fees[i]) - direct
            records.append(DatasetRecord(
                tx=TxRecord(
                    hash=tx_hash, sender=f"user{int(rng.integers(1000))}", receiver=f"contract{i % 17}",
                    direct_payment_fee=direct, transaction_fee=transaction_fee,
                    gas_price=transaction_fee / int(gas_used[i]), gas_used=int(gas_used[i]),
                ),
                block=block,
                private_flag=bool(private_flags[i]),
            ))
    return records


def fit_exponential(values: Sequence[float]) -> float:
    """Maximum-likelihood exponential mean"""
    array = np.asarray(values, dtype=float)
    if array.size == 0:
        raise DatasetError("cannot fit an exponential to no values")
    return float(array.mean())


def exponential_fit_quality(values: Sequence[float]) -> Tuple[float, float, float]:
    """(fitted mean, KS statistic, p-value) against the fitted exponential"""
    mean = fit_exponential(values)
    result = stats.kstest(np.asarray(values, dtype=float), 'expon', args=(0.0, mean))
    return mean, float(result.statistic), float(result.pvalue)


def derive_sim_distributions(records: Sequence[DatasetRecord]) -> FittedDistributions:
    """Per-kind fee means, private count fraction and private share of fees"""
    private = [r.tx.fee for r in records if r.private_flag]
    public = [r.tx.fee for r in records if not r.private_flag]
    if not private:
        raise DatasetError("dataset has no private transactions")
    if not public:
        raise DatasetError("dataset has no public transactions")

    private_total, public_total = float(np.sum(private)), float(np.sum(public))
    return FittedDistributions(
        mean_private_fee=fit_exponential(private),
        mean_public_fee=fit_exponential(public),
        private_count_fraction=len(private) / (len(private) + len(public)),
        private_fee_share=private_total / (private_total + public_total),
    )


def to_config_overrides(fitted: FittedDistributions, n_users: int = 100,
                        k_public: int = 100) -> Dict[str, Optional[float]]:
    """SimConfig overrides that reproduce the fitted count fraction and fee ratio"""
    f = fitted.private_count_fraction
    return {
        'mean_public_fee': 1.0,
        'mean_private_fee': fitted.mean_private_fee / fitted.mean_public_fee,
        'q': f * k_public / (n_users * (1.0 - f)),
        'n_users': n_users,
        'k_public': k_public,
    }
