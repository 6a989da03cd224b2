"""
Analytic View
Console output for the analytic check battery
"""
from typing import Sequence

import pandas as pd

from models.data_models import CheckReport
from views.base_view import ConsoleView


class AnalyticView(ConsoleView):
    """Shows one line per check and the first failing point of each"""

    def __init__(self):
        super().__init__("Analytic")

    def show_reports(self, reports: Sequence[CheckReport]):
        rows = [{
            'check': report.name,
            'points': len(report.entries),
            'failures': len(report.failures),
            'result': 'pass' if report.passed else 'FAIL',
        } for report in reports]
        self.show_table("Analytic checks", pd.DataFrame(rows))
        for report in reports:
            if report.error:
                self.log(f"✗ {report.name}: {report.error}")
            elif report.failures:
                self.log(f"✗ {report.name}: first failure at {report.failures[0].point}")
