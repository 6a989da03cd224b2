"""
Flashback Simulator - Main Entry Point
Select a preset and run the matching tool
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from config.presets import ANALYTIC_CHECK, PRESET_NAMES, PRESETS
from config.settings import (
    ANALYTIC_SEED, DATASET_BLOCK_FILE, DATASET_LABELS_FILE, DATASET_TX_FILE, DEFAULT_SEEDS, MESSAGES,
    ORACLE_GRID_POINTS, ORACLE_ROUNDS,
)
from controllers.analytic_controller import AnalyticCheckController
from controllers.experiment_controller import ExperimentController
from models.data_models import SimConfig
from models.dataset import derive_sim_distributions, exponential_fit_quality, load_dataset, to_config_overrides
from models.errors import ConfigError, DatasetError
from models.sim_config import FIELD_NAMES, coerce_field, config_from_mapping, load_config_file, validate_config
from views.analytic_view import AnalyticView
from views.experiment_view import ExperimentView

logger = logging.getLogger(__name__)

LOG_FORMAT = "[%(asctime)s] %(levelname)s %(name)s: %(message)s"
LOG_DATE_FORMAT = "%H:%M:%S"

# Flags owned by the runner rather than SimConfig
RUNNER_FLAGS = ('rounds', 'seed')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flashback",
        description="Flashback PBS auction simulator and analytic checks",
    )
    parser.add_argument('--preset', choices=PRESET_NAMES, default='baseline')
    parser.add_argument('--config', help="key = value config file applied on top of the preset")
    parser.add_argument('--dataset', help="directory with transactions.csv, blocks.csv and private_labels.txt")
    parser.add_argument('--out', default='results', help="output directory")
    parser.add_argument('--seeds', help="comma-separated seed list (default 1..10)")
    parser.add_argument('--rounds', help="rounds per replication")
    parser.add_argument('--seed', help="single seed, used when --seeds is absent")
    parser.add_argument('--workers', type=int, default=1, help="processes for replications")
    parser.add_argument('--excel', action='store_true', help="also write summary.xlsx")
    parser.add_argument('--log-level', default='INFO',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    parser.add_argument('--oracle-points', type=int, default=ORACLE_GRID_POINTS)
    parser.add_argument('--oracle-rounds', type=int, default=ORACLE_ROUNDS)
    parser.add_argument('--analytic-seed', type=int, default=ANALYTIC_SEED)

    overrides = parser.add_argument_group("config overrides")
    for name in FIELD_NAMES:
        if name in RUNNER_FLAGS:
            continue
        overrides.add_argument(f"--{name}", dest=name, metavar='VALUE')
    return parser


def parse_seeds(text: str) -> List[int]:
    try:
        seeds = [int(part) for part in text.split(',') if part.strip()]
    except ValueError as e:
        raise ConfigError([('seeds', f"expected comma-separated integers, got {text!r}")]) from e
    if not seeds:
        raise ConfigError([('seeds', "at least one seed is required")])
    return seeds


def dataset_overrides(directory: Path) -> dict:
    """Fee distribution overrides fitted from a block dump directory"""
    records = load_dataset(directory / DATASET_TX_FILE, directory / DATASET_BLOCK_FILE,
                           directory / DATASET_LABELS_FILE)
    fitted = derive_sim_distributions(records)
    logger.info("Fitted %s: private fraction %.4f, private fee share %.4f",
                directory, fitted.private_count_fraction, fitted.private_fee_share)
    for kind, flag in (('private', True), ('public', False)):
        mean, statistic, pvalue = exponential_fit_quality([r.tx.fee for r in records if r.private_flag == flag])
        logger.info("Exponential fit of %s fees: mean %.4f, KS %.4f (p=%.3g)", kind, mean, statistic, pvalue)
    return to_config_overrides(fitted)


def resolve_config(args: argparse.Namespace) -> SimConfig:
    """Defaults < preset overrides < dataset fit < config file < command-line flags"""
    config = SimConfig()
    preset = PRESETS.get(args.preset)
    if preset is not None:
        config = config_from_mapping(preset.overrides, config)
    if args.dataset:
        config = config_from_mapping(dataset_overrides(Path(args.dataset)), config)
    if args.config:
        config = load_config_file(args.config, config)
    flags = {name: getattr(args, name) for name in FIELD_NAMES if getattr(args, name, None) is not None}
    if flags:
        config = config_from_mapping(flags, config)
    return validate_config(config)


def resolve_seeds(args: argparse.Namespace) -> List[int]:
    if args.seeds:
        return parse_seeds(args.seeds)
    if args.seed is not None:
        return [coerce_field('seed', args.seed)]
    return list(DEFAULT_SEEDS)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT, datefmt=LOG_DATE_FORMAT)

    if args.preset == ANALYTIC_CHECK:
        controller = AnalyticCheckController(AnalyticView(), args.out)
        return controller.run_analytic_check(args.analytic_seed, args.oracle_points, args.oracle_rounds)

    view = ExperimentView()
    try:
        config = resolve_config(args)
        seeds = resolve_seeds(args)
    except (ConfigError, DatasetError, OSError) as e:
        view.set_status(MESSAGES['run_failed'])
        view.log(f"✗ Invalid configuration: {e}")
        return 2

    preset = PRESETS[args.preset].with_seeds(seeds)
    controller = ExperimentController(view, args.out, workers=args.workers, excel=args.excel)
    return controller.run_preset(preset, config)


if __name__ == "__main__":
    sys.exit(main())
