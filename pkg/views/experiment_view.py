"""
Experiment View
Console output for simulation presets
"""
from typing import Any, Dict, Sequence

import pandas as pd

from views.base_view import ConsoleView


class ExperimentView(ConsoleView):
    """Shows replication progress, point aggregates and acceptance checks"""

    def __init__(self):
        super().__init__("Experiment")

    def show_points(self, points: Sequence[Dict[str, Any]]):
        rows = [{
            'point': point['label'],
            'primary share': round(point['aggregate']['primary_share_mean'], 4),
            'std': round(point['aggregate']['primary_share_std'], 4),
            'reservations': round(point['aggregate']['reservation_rate_mean'], 4),
            'convergence': point['aggregate']['convergence_round_mean'],
        } for point in points]
        self.show_table("Primary block share after warm-up", pd.DataFrame(rows))

    def show_checks(self, checks: Sequence[Dict[str, Any]]):
        for check in checks:
            mark = "✓" if check['passed'] else "✗"
            self.log(f"{mark} {check['name']}: observed {check['observed']} (expected {check['expected']})")
