"""
Base View Components
Console output shared across all tools
"""
import logging

import pandas as pd

from config.settings import MESSAGES

CONSOLE_LOGGER = 'flashback.console'


class ConsoleView:
    """Base view writing progress and results through the console logger"""

    def __init__(self, title: str):
        self.title = title
        self.logger = logging.getLogger(CONSOLE_LOGGER)
        self.status = MESSAGES['ready']
        self.progress = (0, 0)

    def log(self, message: str):
        """Log message to the console"""
        self.logger.info(message)

    def set_status(self, message: str):
        """Update status line"""
        self.status = message
        self.logger.info("[%s] %s", self.title, message)

    def set_progress(self, value: int, maximum: int = 100):
        """Report progress as value/maximum"""
        self.progress = (value, maximum)
        self.logger.info("[%s] %d/%d", self.title, value, maximum)

    def reset_progress(self):
        """Reset progress counter"""
        self.progress = (0, 0)

    def clear_results(self):
        self.status = MESSAGES['ready']
        self.reset_progress()

    def show_table(self, heading: str, frame: pd.DataFrame):
        """Print a small table under a heading"""
        if frame.empty:
            self.log(f"{heading}: (empty)")
            return
        self.log(f"{heading}:\n{frame.to_string(index=False)}")
