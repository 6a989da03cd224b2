"""
Tests for dataset ingestion, the synthetic generator and fee fits
"""
import dataclasses

import numpy as np
import pytest

from models.data_models import FittedDistributions, SimConfig
from models.dataset import (
    derive_sim_distributions, exponential_fit_quality, fit_exponential, generate_synthetic_dataset,
    load_dataset, to_config_overrides, write_dataset,
)
from models.engine import ScoreBoard, generate_round_transactions
from models.errors import DatasetError

TX_HEADER = "hash,sender,receiver,direct_payment_fee,transaction_fee,gas_price,gas_used\n"
BLOCK_HEADER = "block_number,tx_hashes,base_fee\n"


@pytest.fixture
def paths(tmp_path):
    return tmp_path / "transactions.csv", tmp_path / "blocks.csv", tmp_path / "private_labels.txt"


def _write(paths, transactions, blocks, labels=""):
    tx_path, block_path, labels_path = paths
    tx_path.write_text(TX_HEADER + transactions, encoding='utf-8')
    block_path.write_text(BLOCK_HEADER + blocks, encoding='utf-8')
    labels_path.write_text(labels, encoding='utf-8')
    return paths


class TestLoadDataset:

    def test_written_dataset_loads_back(self, paths):
        records = generate_synthetic_dataset(5, seed=1, txs_per_block=20)
        write_dataset(records, *paths)
        loaded = load_dataset(*paths)
        assert list(loaded) == records
        assert loaded.unknown_labels == []

    def test_joins_blocks_and_labels(self, paths):
        _write(paths,
               "0xa,u1,c1,0.5,1.5,0.001,21000\n0xb,u2,c2,0,1.0,0.002,50000\n",
               "7,0xa;0xb,12.5\n",
               "0xa\n")
        records = load_dataset(*paths)
        assert [r.tx.hash for r in records] == ['0xa', '0xb']
        assert [r.private_flag for r in records] == [True, False]
        assert records[0].tx.fee == pytest.approx(2.0)
        assert records[0].block.number == 7 and records[0].block.base_fee == 12.5

    def test_empty_labels_mean_all_public(self, paths):
        _write(paths, "0xa,u1,c1,0,1.0,0.001,21000\n", "1,0xa,10\n")
        records = load_dataset(*paths)
        assert not any(r.private_flag for r in records)
        with pytest.raises(DatasetError, match="no private"):
            derive_sim_distributions(records)

    def test_duplicate_hash_reports_line(self, paths):
        _write(paths, "0xa,u1,c1,0,1.0,0.001,21000\n0xa,u2,c2,0,2.0,0.001,21000\n", "1,0xa,10\n")
        with pytest.raises(DatasetError, match="line 3: duplicate hash 0xa"):
            load_dataset(*paths)

    def test_malformed_number_reports_line(self, paths):
        _write(paths, "0xa,u1,c1,0,1.0,0.001,21000\n0xb,u2,c2,0,1.0,0.001,lots\n", "1,0xa;0xb,10\n")
        with pytest.raises(DatasetError, match="line 3: bad gas_used"):
            load_dataset(*paths)

    def test_negative_fee_rejected(self, paths):
        _write(paths, "0xa,u1,c1,-1,1.0,0.001,21000\n", "1,0xa,10\n")
        with pytest.raises(DatasetError, match="direct_payment_fee"):
            load_dataset(*paths)

    def test_unknown_block_hash_rejected(self, paths):
        _write(paths, "0xa,u1,c1,0,1.0,0.001,21000\n", "1,0xa;0xz,10\n")
        with pytest.raises(DatasetError, match="unknown transaction 0xz"):
            load_dataset(*paths)

    def test_transaction_in_two_blocks_rejected(self, paths):
        _write(paths, "0xa,u1,c1,0,1.0,0.001,21000\n", "1,0xa,10\n2,0xa,11\n")
        with pytest.raises(DatasetError, match="listed in blocks 1 and 2"):
            load_dataset(*paths)

    def test_missing_column_rejected(self, paths):
        tx_path, block_path, labels_path = paths
        tx_path.write_text("hash,sender\n0xa,u1\n", encoding='utf-8')
        block_path.write_text(BLOCK_HEADER, encoding='utf-8')
        labels_path.write_text("", encoding='utf-8')
        with pytest.raises(DatasetError, match="missing columns"):
            load_dataset(*paths)

    def test_unmatched_labels_kept(self, paths):
        _write(paths, "0xa,u1,c1,0,1.0,0.001,21000\n", "1,0xa,10\n", "0xa\n0xghost\n")
        assert load_dataset(*paths).unknown_labels == ['0xghost']


class TestSyntheticDataset:

    def test_seeded(self):
        assert generate_synthetic_dataset(3, seed=4) == generate_synthetic_dataset(3, seed=4)

    def test_private_fee_share_near_ten_percent(self):
        fitted = derive_sim_distributions(generate_synthetic_dataset(200, seed=5))
        assert fitted.private_fee_share == pytest.approx(0.10, abs=0.02)
        assert fitted.private_count_fraction == pytest.approx(0.03, abs=0.005)

    def test_public_flow_pays_no_direct_fee(self):
        records = generate_synthetic_dataset(2, seed=6)
        assert all(r.tx.direct_payment_fee == 0.0 for r in records if not r.private_flag)


class TestFits:

    def test_mean_of_two_values(self):
        assert fit_exponential([2.0, 4.0]) == 3.0

    def test_constant_data(self):
        assert fit_exponential([1.5] * 10) == 1.5

    def test_no_values_rejected(self):
        with pytest.raises(DatasetError):
            fit_exponential([])

    def test_large_sample_recovers_mean(self):
        samples = np.random.default_rng(7).exponential(2.5, size=100_000)
        mean, statistic, pvalue = exponential_fit_quality(samples)
        assert abs(mean - 2.5) < 4 * 2.5 / np.sqrt(100_000)
        assert statistic < 0.01
        assert pvalue > 1e-3

    def test_ks_rejects_wrong_shape(self):
        samples = np.random.default_rng(8).uniform(0.0, 2.0, size=10_000)
        _, _, pvalue = exponential_fit_quality(samples)
        assert pvalue < 1e-6

    def test_derive_needs_public_flow(self):
        records = [r for r in generate_synthetic_dataset(20, seed=9) if r.private_flag]
        with pytest.raises(DatasetError, match="no public"):
            derive_sim_distributions(records)

    def test_overrides_reproduce_count_fraction(self):
        fitted = FittedDistributions(mean_private_fee=7.18, mean_public_fee=2.0,
                                     private_count_fraction=0.03, private_fee_share=0.1)
        overrides = to_config_overrides(fitted)
        assert overrides['mean_private_fee'] == pytest.approx(3.59)
        assert overrides['mean_public_fee'] == 1.0
        private_per_round = overrides['n_users'] * overrides['q']
        assert private_per_round / (private_per_round + overrides['k_public']) == pytest.approx(0.03)

    def test_generated_traffic_matches_fitted_fractions(self):
        fitted = FittedDistributions(mean_private_fee=7.18, mean_public_fee=2.0,
                                     private_count_fraction=0.03, private_fee_share=0.1)
        config = dataclasses.replace(SimConfig(), **to_config_overrides(fitted))
        scores = ScoreBoard(scores={'primary': 1.0, 'secondary_1': 1.0}, components={})
        rng = np.random.default_rng(21)

        private_fees, public_fees = [], []
        t = next_id = 0
        while len(private_fees) + len(public_fees) < 100_000:
            private, public = generate_round_transactions(rng, config, t, scores, first_id=next_id)
            private_fees.extend(tx.value for tx in private)
            public_fees.extend(tx.value for tx in public)
            next_id += len(private) + len(public)
            t += 1

        n = len(private_fees) + len(public_fees)
        f = fitted.private_count_fraction
        assert abs(len(private_fees) / n - f) < 4 * np.sqrt(f * (1 - f) / n)

        # exponential fees: a compound sum of N draws with mean m has variance 2 N m^2
        ratio = config.mean_private_fee / config.mean_public_fee
        target = f * ratio / (f * ratio + (1 - f))
        private_total, public_total = float(np.sum(private_fees)), float(np.sum(public_fees))
        expected_total = n * config.mean_public_fee * (f * ratio + (1 - f))
        private_sd = config.mean_private_fee * np.sqrt(2 * len(private_fees))
        public_sd = config.mean_public_fee * np.sqrt(len(public_fees))
        bound = 4 * np.hypot((1 - target) * private_sd, target * public_sd) / expected_total
        assert target == pytest.approx(fitted.private_fee_share, abs=1e-3)
        assert abs(private_total / (private_total + public_total) - target) < bound
