"""
Analytic Check Controller
Runs the closed-form, oracle and fixed-point battery and writes its report
"""
import itertools
import logging
from typing import List, Optional, Tuple

import numpy as np

from config.settings import ANALYTIC_REPORT_FILE, MESSAGES
from controllers.base_controller import BaseController
from models.analytics import ClosedForms
from models.data_models import CheckReport
from models.equilibrium import (
    LEMMA2_RHO_BOUND, check_general_expression, check_half_share_expression, check_lemma1, check_lemma2,
    check_theorem1, theorem1_cases,
)
from models.oracle import check_oracle_grid
from utils.result_exporter import write_json

logger = logging.getLogger(__name__)

HALF_SHARE_RHOS = (0.6, 1.0, 2.0, 5.0)
HALF_SHARE_MU3S = (0.1, 0.5, 2.0)
HALF_SHARE_R2S = (0.02, 0.2)
REFERENCE_CASE = (2.0, 0.5, 0.02)


def lemma1_points(n: int, rng: np.random.Generator) -> List[Tuple[float, float, float, float]]:
    """(mu2, rho, mu3, r2) with mu2 < 1/2 and rho > mu2"""
    points = []
    for _ in range(n):
        mu2 = float(rng.uniform(0.01, 0.49))
        points.append((mu2, mu2 + float(rng.uniform(0.01, 5.0)),
                       float(rng.uniform(0.1, 2.0)), float(rng.uniform(0.01, 0.3))))
    return points


def lemma2_points(n: int, rng: np.random.Generator) -> List[Tuple[float, float, float]]:
    return [(float(rng.uniform(LEMMA2_RHO_BOUND + 0.01, 5.0)), float(rng.uniform(0.1, 2.0)),
             float(rng.uniform(0.01, 0.3))) for _ in range(n)]


def general_points(n: int, rng: np.random.Generator) -> List[Tuple[float, float, float, float]]:
    return [(float(rng.uniform(0.02, 0.98)), float(rng.uniform(0.1, 5.0)), float(rng.uniform(0.1, 2.0)),
             float(rng.uniform(0.01, 0.3))) for _ in range(n)]


class AnalyticCheckController(BaseController):
    """Controller for the analytic check battery"""

    def build_reports(self, seed: int, oracle_points: int, oracle_rounds: int,
                      closed_forms: Optional[ClosedForms] = None) -> List[CheckReport]:
        rng = np.random.default_rng(seed)
        half_share = list(itertools.product(HALF_SHARE_RHOS, HALF_SHARE_MU3S, HALF_SHARE_R2S))
        steps = [
            ("oracle grid", lambda: check_oracle_grid(oracle_points, oracle_rounds, seed,
                                                      closed_forms=closed_forms)),
            ("half-share expression", lambda: check_half_share_expression(half_share)),
            ("half-share sign", lambda: check_lemma2(lemma2_points(20, rng))),
            ("policy beats default", lambda: check_lemma1(lemma1_points(100, rng))),
            ("general expression", lambda: check_general_expression(general_points(100, rng))),
            ("fixed point", lambda: check_theorem1([REFERENCE_CASE] + theorem1_cases(5, seed))),
        ]
        reports = []
        for index, (label, build) in enumerate(steps, start=1):
            self.update_progress(index, len(steps), label)
            try:
                reports.append(build())
            except (ValueError, ArithmeticError) as e:
                logger.exception("Analytic step %s raised", label)
                reports.append(CheckReport(name=label.replace(' ', '_'), error=str(e)))
        return reports

    def run_analytic_check(self, seed: int, oracle_points: int, oracle_rounds: int,
                           closed_forms: Optional[ClosedForms] = None) -> int:
        """Run the battery; 0 when every check passes"""
        self.view.clear_results()
        try:
            self.prepare_output_dir()
            self.view.set_status(MESSAGES['checking'])
            reports = self.build_reports(seed, oracle_points, oracle_rounds, closed_forms)
            passed = all(report.passed for report in reports)

            path = self.out_dir / ANALYTIC_REPORT_FILE
            write_json(path, {
                'seed': seed,
                'oracle_points': oracle_points,
                'oracle_rounds': oracle_rounds,
                'passed': passed,
                'checks': [report.to_dict() for report in reports],
            })
            self.show_export_success(path, {'checks': len(reports)})
            self.view.show_reports(reports)
            self.view.set_status(MESSAGES['done'] if passed else MESSAGES['checks_failed'])
            return 0 if passed else 1

        except OSError as e:
            self.handle_error("write analytic report", e)
            return 2
        finally:
            self.reset_progress()
