"""
Result Export Utilities
Handles CSV, JSON and the optional formatted workbook
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import pandas as pd
from openpyxl.styles import Alignment, Font, PatternFill

from config.settings import COLORS, MAX_COLUMN_WIDTH, MAX_SHEET_NAME_LENGTH, MIN_COLUMN_WIDTH

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def write_json(path: PathLike, data: Dict[str, Any]):
    """Write JSON with sorted keys so equal data gives equal bytes"""
    text = json.dumps(data, indent=2, sort_keys=True)
    Path(path).write_text(text + "\n", encoding='utf-8')


def write_csv(path: PathLike, frame: pd.DataFrame):
    frame.to_csv(path, index=False, lineterminator="\n")


def sweep_frame(points: Sequence[Dict[str, Any]]) -> pd.DataFrame:
    """One row per sweep point with its aggregate columns flattened"""
    rows = []
    for point in points:
        row = {'label': point['label']}
        row.update({key: value for key, value in point['overrides'].items()})
        aggregate = point['aggregate']
        for key, value in aggregate.items():
            if isinstance(value, dict):
                for builder, number in value.items():
                    row[f"{key}_{builder}"] = number
            else:
                row[key] = value
        rows.append(row)
    return pd.DataFrame(rows)


def distribution_rows(label: str, seed: int, proposer_rewards: Dict[str, List[float]],
                      refunds: Sequence[float]) -> List[Dict[str, Any]]:
    """Long-format rows for per-player reward distributions"""
    rows = [
        {'label': label, 'seed': seed, 'kind': 'proposer_reward', 'builder': builder, 'value': value}
        for builder, values in proposer_rewards.items() for value in values
    ]
    rows.extend(
        {'label': label, 'seed': seed, 'kind': 'user_refund', 'builder': '', 'value': value}
        for value in refunds
    )
    return rows


class ExcelExporter:
    """Formatted workbook with summary, checks and config sheets"""

    def __init__(self, file_path: PathLike):
        self.file_path = file_path
        self.writer = None

    def __enter__(self):
        self.writer = pd.ExcelWriter(self.file_path, engine='openpyxl')
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self.writer:
            self.writer.close()

    def create_summary_sheet(self, points: Sequence[Dict[str, Any]]):
        """One row per point with aggregate columns"""
        frame = sweep_frame(points)
        frame.to_excel(self.writer, sheet_name='Summary', index=False)
        self._format_header('Summary')
        self._auto_adjust_columns('Summary')

    def create_checks_sheet(self, checks: Sequence[Dict[str, Any]]):
        """Acceptance checks with pass/fail highlighting"""
        rows = [{
            'Check': check['name'],
            'Passed': 'PASS' if check['passed'] else 'FAIL',
            'Observed': json.dumps(check['observed'], sort_keys=True),
            'Expected': check['expected'],
        } for check in checks]
        frame = pd.DataFrame(rows, columns=['Check', 'Passed', 'Observed', 'Expected'])
        frame.to_excel(self.writer, sheet_name='Checks', index=False)
        self._format_header('Checks')
        self._format_status_column('Checks', 2)
        self._auto_adjust_columns('Checks')

    def create_config_sheet(self, config: Dict[str, Any]):
        rows = [{'Field': key, 'Value': str(value)} for key, value in config.items()]
        name = self._make_safe_sheet_name('Config')
        pd.DataFrame(rows).to_excel(self.writer, sheet_name=name, index=False)
        self._format_header(name)
        self._auto_adjust_columns(name)

    def _make_safe_sheet_name(self, name: str) -> str:
        """Create Excel-safe sheet name"""
        safe_name = str(name)
        for char in ['\\', '/', '*', '?', ':', '[', ']']:
            safe_name = safe_name.replace(char, '_')
        if len(safe_name) > MAX_SHEET_NAME_LENGTH:
            safe_name = safe_name[:MAX_SHEET_NAME_LENGTH - 3] + "..."
        return safe_name

    def _format_header(self, sheet_name: str):
        """Format header row"""
        try:
            worksheet = self.writer.sheets[sheet_name]
            header_fill = PatternFill(start_color=COLORS['header'], end_color=COLORS['header'], fill_type="solid")
            header_font = Font(color=COLORS['header_text'], bold=True)
            for cell in worksheet[1]:
                cell.fill = header_fill
                cell.font = header_font
                cell.alignment = Alignment(horizontal="center")
        except KeyError as e:
            logger.warning("Could not format header for %s: %s", sheet_name, e)

    def _format_status_column(self, sheet_name: str, column: int):
        """Green PASS, red FAIL"""
        worksheet = self.writer.sheets[sheet_name]
        for row in range(2, worksheet.max_row + 1):
            cell = worksheet.cell(row=row, column=column)
            color = COLORS['pass'] if cell.value == 'PASS' else COLORS['fail']
            cell.fill = PatternFill(start_color=color, end_color=color, fill_type="solid")
            cell.font = Font(color=COLORS['status_text'], bold=True)

    def _auto_adjust_columns(self, sheet_name: str):
        """Auto-adjust column widths"""
        worksheet = self.writer.sheets[sheet_name]
        for column in worksheet.columns:
            longest = max((len(str(cell.value)) for cell in column if cell.value is not None), default=0)
            width = min(max(longest + 2, MIN_COLUMN_WIDTH), MAX_COLUMN_WIDTH)
            worksheet.column_dimensions[column[0].column_letter].width = width
