"""
Base Controller
Common functionality shared across all controllers
"""
from pathlib import Path
from typing import Union

from config.settings import MESSAGES


class BaseController:
    """Base controller with output directory, progress and error reporting"""

    def __init__(self, view, out_dir: Union[str, Path]):
        self.view = view
        self.out_dir = Path(out_dir)

    def prepare_output_dir(self, *subdirs: str):
        """Create out_dir (and subdirectories); raises OSError when not writable"""
        self.out_dir.mkdir(parents=True, exist_ok=True)
        for name in subdirs:
            (self.out_dir / name).mkdir(exist_ok=True)
        probe = self.out_dir / ".write_test"
        probe.write_text("", encoding='utf-8')
        probe.unlink()

    def show_export_success(self, file_path: Path, stats: dict):
        """Log written file and a few stats"""
        stats_text = ", ".join(f"{key}: {value}" for key, value in stats.items())
        self.view.log(f"✓ Wrote {file_path}" + (f" ({stats_text})" if stats_text else ""))

    def handle_error(self, operation: str, error: Exception):
        """Handle and display errors"""
        error_msg = f"Failed to {operation}: {error}"
        self.view.set_status(MESSAGES['run_failed'])
        self.view.log(f"✗ {error_msg}")

    def update_progress(self, current: int, total: int, message: str = ""):
        """Update progress and status"""
        self.view.set_progress(current, total)
        if message:
            self.view.set_status(message)

    def reset_progress(self):
        self.view.reset_progress()
