"""
End-to-end tests through main() and the controllers
"""
import json
import logging

import pandas as pd
import pytest
from openpyxl import load_workbook

from config.presets import PRESETS
from controllers.analytic_controller import AnalyticCheckController
from controllers.experiment_controller import ExperimentController
from main import dataset_overrides, main, parse_seeds
from models.analytics import CLOSED_FORMS
from models.dataset import generate_synthetic_dataset, write_dataset
from models.errors import ConfigError
from models.sim_config import load_config_file
from views.analytic_view import AnalyticView
from views.experiment_view import ExperimentView

SMALL_FLAGS = ['--rounds', '30', '--seeds', '1,2', '--n_users', '20', '--k_public', '10',
               '--block_size', '10', '--window', '50']


def _summary(out_dir):
    return json.loads((out_dir / "summary.json").read_text(encoding='utf-8'))


class TestExperimentRuns:

    def test_sweep_writes_every_output(self, out_dir):
        assert main(['--preset', 'ttl_sweep', '--out', str(out_dir)] + SMALL_FLAGS) == 0
        summary = _summary(out_dir)
        assert summary['preset'] == 'ttl_sweep'
        assert summary['seeds'] == [1, 2]
        assert summary['warmup'] == 0
        assert [point['label'] for point in summary['points']] == [f"ttl_{ttl}" for ttl in (1, 2, 5, 10, 15, 20)]
        assert summary['checks'] == [] and summary['passed'] is True

        sweep = pd.read_csv(out_dir / "sweep.csv")
        assert list(sweep['ttl']) == [1, 2, 5, 10, 15, 20]
        rounds = pd.read_csv(out_dir / "rounds" / "ttl_5__seed2.csv")
        assert len(rounds) == 30
        assert list(rounds.columns[-2:]) == ['expired_primary', 'expired_secondary_1']
        assert load_config_file(out_dir / "config.txt").rounds == 30

    def test_same_seeds_same_summary_bytes(self, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        main(['--preset', 'baseline', '--out', str(first)] + SMALL_FLAGS)
        main(['--preset', 'baseline', '--out', str(second)] + SMALL_FLAGS)
        assert (first / "summary.json").read_bytes() == (second / "summary.json").read_bytes()
        assert (first / "distributions.csv").read_bytes() == (second / "distributions.csv").read_bytes()

    def test_checked_preset_exit_code_follows_checks(self, out_dir):
        code = main(['--preset', 'baseline', '--out', str(out_dir)] + SMALL_FLAGS)
        summary = _summary(out_dir)
        assert code == (0 if summary['passed'] else 1)
        assert {check['name'] for check in summary['checks']} == {
            'primary_share_band', 'primary_outearns_secondary'}

    def test_distributions_long_format(self, out_dir):
        main(['--preset', 'baseline', '--out', str(out_dir)] + SMALL_FLAGS)
        frame = pd.read_csv(out_dir / "distributions.csv", keep_default_na=False)
        assert list(frame.columns) == ['label', 'seed', 'kind', 'builder', 'value']
        assert set(frame['kind']) <= {'proposer_reward', 'user_refund'}
        assert len(frame[frame['kind'] == 'proposer_reward']) == 60

    def test_invalid_config_exits_two(self, out_dir):
        assert main(['--preset', 'baseline', '--out', str(out_dir), '--epsilon', '0'] + SMALL_FLAGS) == 2
        assert not (out_dir / "summary.json").exists()

    def test_config_file_applied_under_flags(self, out_dir, tmp_path):
        path = tmp_path / "run.txt"
        path.write_text("ttl = 3\nbid_count = 2\n", encoding='utf-8')
        main(['--preset', 'baseline', '--out', str(out_dir), '--config', str(path), '--bid_count', '4']
             + SMALL_FLAGS)
        config = _summary(out_dir)['config']
        assert config['ttl'] == 3 and config['bid_count'] == 4

    def test_unknown_preset_rejected(self, out_dir):
        with pytest.raises(SystemExit):
            main(['--preset', 'nope', '--out', str(out_dir)])

    def test_dataset_fit_feeds_config(self, out_dir, tmp_path):
        dataset_dir = tmp_path / "dump"
        dataset_dir.mkdir()
        write_dataset(generate_synthetic_dataset(20, seed=3), dataset_dir / "transactions.csv",
                      dataset_dir / "blocks.csv", dataset_dir / "private_labels.txt")
        main(['--preset', 'baseline', '--out', str(out_dir), '--dataset', str(dataset_dir)] + SMALL_FLAGS)
        config = _summary(out_dir)['config']
        assert config['mean_public_fee'] == 1.0
        assert config['mean_private_fee'] > 1.0
        assert config['n_users'] == 20

    def test_dataset_fit_logs_ks_statistics(self, tmp_path, caplog):
        write_dataset(generate_synthetic_dataset(20, seed=3), tmp_path / "transactions.csv",
                      tmp_path / "blocks.csv", tmp_path / "private_labels.txt")
        with caplog.at_level(logging.INFO, logger='main'):
            overrides = dataset_overrides(tmp_path)
        assert overrides['mean_public_fee'] == 1.0
        fit_lines = [r.getMessage() for r in caplog.records if 'KS' in r.getMessage()]
        assert len(fit_lines) == 2
        assert fit_lines[0].startswith("Exponential fit of private fees")
        assert fit_lines[1].startswith("Exponential fit of public fees")

    def test_missing_dataset_exits_two(self, out_dir, tmp_path):
        assert main(['--out', str(out_dir), '--dataset', str(tmp_path / "missing")] + SMALL_FLAGS) == 2

    def test_excel_workbook(self, out_dir):
        main(['--preset', 'baseline', '--out', str(out_dir), '--excel'] + SMALL_FLAGS)
        workbook = load_workbook(out_dir / "summary.xlsx")
        assert workbook.sheetnames == ['Summary', 'Checks', 'Config']
        assert workbook['Checks'].cell(row=1, column=1).value == 'Check'

    def test_worker_pool_matches_serial(self, tmp_path, small_config):
        preset = PRESETS['baseline'].with_seeds([1, 2, 3])
        serial, pooled = tmp_path / "serial", tmp_path / "pooled"
        ExperimentController(ExperimentView(), serial).run_preset(preset, small_config)
        ExperimentController(ExperimentView(), pooled, workers=2).run_preset(preset, small_config)
        assert (serial / "summary.json").read_bytes() == (pooled / "summary.json").read_bytes()

    def test_seed_list_parsing(self):
        assert parse_seeds("3, 1,2") == [3, 1, 2]
        with pytest.raises(ConfigError):
            parse_seeds("1,x")


class TestAnalyticRuns:

    def test_small_battery_passes(self, out_dir):
        code = main(['--preset', 'analytic_check', '--out', str(out_dir),
                     '--oracle-points', '2', '--oracle-rounds', '20000'])
        report = json.loads((out_dir / "analytic_report.json").read_text(encoding='utf-8'))
        assert code == 0
        assert report['passed'] is True
        assert [check['name'] for check in report['checks']] == [
            'oracle_grid', 'half_share_expression', 'lemma2', 'lemma1', 'general_expression', 'theorem1']

    def test_perturbed_closed_form_fails_battery(self, out_dir):
        forms = dict(CLOSED_FORMS)
        forms['v_secondary'] = lambda p: 1.5 * CLOSED_FORMS['v_secondary'](p)
        controller = AnalyticCheckController(AnalyticView(), out_dir)
        assert controller.run_analytic_check(5, 2, 50_000, closed_forms=forms) == 1
        report = json.loads((out_dir / "analytic_report.json").read_text(encoding='utf-8'))
        oracle = next(check for check in report['checks'] if check['name'] == 'oracle_grid')
        assert not oracle['passed']
