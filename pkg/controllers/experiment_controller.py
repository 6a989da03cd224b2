"""
Experiment Controller
Runs simulation presets over seeds and sweep points and writes their results
"""
import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Sequence

import pandas as pd

from config.presets import ExperimentPreset
from config.settings import (
    CONFIG_FILE, DISTRIBUTIONS_FILE, EXCEL_FILE, MESSAGES, ROUNDS_DIR, SUMMARY_FILE, SWEEP_FILE,
)
from controllers.base_controller import BaseController
from models.acceptance import CHECKS, point_aggregate, replication_summary, warmup_for
from models.data_models import SimConfig
from models.engine import SimResult, run
from models.errors import FlashbackError
from models.sim_config import config_from_mapping, dump_config, validate_config
from utils.result_exporter import (
    ExcelExporter, distribution_rows, sweep_frame, write_csv, write_json,
)

logger = logging.getLogger(__name__)


class ExperimentController(BaseController):
    """Controller for simulation presets"""

    def __init__(self, view, out_dir, workers: int = 1, excel: bool = False):
        super().__init__(view, out_dir)
        self.workers = max(1, workers)
        self.excel = excel

    def run_replications(self, configs: Sequence[SimConfig]) -> List[SimResult]:
        """Run configs in submission order, in a process pool when workers > 1"""
        if self.workers == 1 or len(configs) == 1:
            return [run(config) for config in configs]
        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(run, configs))

    def point_configs(self, preset: ExperimentPreset, base: SimConfig,
                      overrides: Dict[str, Any]) -> List[SimConfig]:
        point = config_from_mapping(overrides, base)
        return [validate_config(dataclasses.replace(point, seed=seed)) for seed in preset.seeds]

    def run_preset(self, preset: ExperimentPreset, base: SimConfig) -> int:
        """Run every point of a preset and return 0 iff all its acceptance checks pass"""
        self.view.clear_results()
        try:
            validate_config(base)
            self.prepare_output_dir(ROUNDS_DIR)
            (self.out_dir / CONFIG_FILE).write_text(dump_config(base), encoding='utf-8')

            points = preset.sweep_points()
            summaries: List[Dict[str, Any]] = []
            checks: List[Dict[str, Any]] = []
            distributions: List[Dict[str, Any]] = []

            self.view.set_status(MESSAGES['sweeping'] if preset.sweep else MESSAGES['running'])
            for index, (label, overrides) in enumerate(points, start=1):
                configs = self.point_configs(preset, base, overrides)
                results = self.run_replications(configs)
                self.update_progress(index, len(points), f"{label}: {len(results)} replications done")

                replications = []
                for result in results:
                    write_csv(self.out_dir / ROUNDS_DIR / f"{label}__seed{result.config.seed}.csv",
                              result.round_frame())
                    replications.append(replication_summary(result))
                    if preset.distributions:
                        distributions.extend(distribution_rows(
                            label, result.config.seed, result.proposer_rewards, result.user_refunds))

                summaries.append({
                    'label': label,
                    'overrides': {key: _plain(value) for key, value in overrides.items()},
                    'replications': replications,
                    'aggregate': point_aggregate(replications, results[0].builder_ids),
                })
                if preset.checks:
                    checks.extend(check.to_dict() for check in CHECKS[preset.checks](results))

            self.view.set_status(MESSAGES['writing'])
            passed = all(check['passed'] for check in checks)
            self.write_outputs(preset, base, summaries, checks, distributions, passed)

            self.view.show_points(summaries)
            self.view.show_checks(checks)
            self.view.set_status(MESSAGES['done'] if passed else MESSAGES['checks_failed'])
            return 0 if passed else 1

        except (FlashbackError, OSError) as e:
            self.handle_error(f"run preset {preset.name}", e)
            return 2
        finally:
            self.reset_progress()

    def write_outputs(self, preset: ExperimentPreset, base: SimConfig, summaries: List[Dict[str, Any]],
                      checks: List[Dict[str, Any]], distributions: List[Dict[str, Any]], passed: bool):
        summary = {
            'preset': preset.name,
            'description': preset.description,
            'seeds': list(preset.seeds),
            'rounds': base.rounds,
            'warmup': warmup_for(base.rounds),
            'config': base.to_dict(),
            'points': summaries,
            'checks': checks,
            'passed': passed,
        }
        write_json(self.out_dir / SUMMARY_FILE, summary)
        self.show_export_success(self.out_dir / SUMMARY_FILE, {'points': len(summaries), 'checks': len(checks)})

        if preset.sweep:
            write_csv(self.out_dir / SWEEP_FILE, sweep_frame(summaries))
            self.show_export_success(self.out_dir / SWEEP_FILE, {'rows': len(summaries)})
        if distributions:
            frame = pd.DataFrame(distributions, columns=['label', 'seed', 'kind', 'builder', 'value'])
            write_csv(self.out_dir / DISTRIBUTIONS_FILE, frame)
            self.show_export_success(self.out_dir / DISTRIBUTIONS_FILE, {'rows': len(frame)})
        if self.excel:
            with ExcelExporter(self.out_dir / EXCEL_FILE) as exporter:
                exporter.create_summary_sheet(summaries)
                exporter.create_checks_sheet(checks)
                exporter.create_config_sheet(base.to_dict())
            self.show_export_success(self.out_dir / EXCEL_FILE, {})


def _plain(value: Any) -> Any:
    if isinstance(value, tuple):
        return list(value)
    return value
