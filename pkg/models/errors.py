"""
Errors
Exception types raised by the simulator and analytics
"""
from typing import List, Tuple


class FlashbackError(Exception):
    """Base class for all simulator errors"""


class ConfigError(FlashbackError, ValueError):
    """Raised when a configuration violates one or more field constraints"""

    def __init__(self, violations: List[Tuple[str, str]]):
        self.violations = list(violations)
        super().__init__("; ".join(f"{field}: {message}" for field, message in self.violations))


class ProtocolViolation(FlashbackError):
    """Raised when a reservation or bid breaks the bidding protocol"""


class InvariantViolation(FlashbackError):
    """Raised when a run breaks conservation, commitment or expiry"""


class DatasetError(FlashbackError, ValueError):
    """Raised for malformed or inconsistent dataset files"""
