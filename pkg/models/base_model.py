"""
Base Model
Common value parsing and formatting used by config files and CLI flags
"""
import typing
from enum import Enum
from typing import Any


class BaseModel:
    """Base model with common operations"""

    TRUE_WORDS = ('true', 'yes', '1', 'on')
    FALSE_WORDS = ('false', 'no', '0', 'off')
    NONE_WORDS = ('none', 'null', '')

    @staticmethod
    def unwrap_optional(target_type: Any) -> typing.Tuple[Any, bool]:
        """Return (inner type, is_optional) for Optional[...] hints"""
        args = typing.get_args(target_type)
        if typing.get_origin(target_type) is typing.Union and type(None) in args:
            inner = [arg for arg in args if arg is not type(None)]
            return inner[0], True
        return target_type, False

    @classmethod
    def parse_bool(cls, text: str) -> bool:
        """Parse a boolean word"""
        word = text.strip().lower()
        if word in cls.TRUE_WORDS:
            return True
        if word in cls.FALSE_WORDS:
            return False
        raise ValueError(f"expected true/false, got {text!r}")

    @classmethod
    def parse_value(cls, text: str, target_type: Any) -> Any:
        """Parse text into the given type hint"""
        inner, optional = cls.unwrap_optional(target_type)
        if optional and text.strip().lower() in cls.NONE_WORDS:
            return None

        origin = typing.get_origin(inner)
        if origin in (tuple, typing.Tuple):
            args = [arg for arg in typing.get_args(inner) if arg is not Ellipsis]
            item_type = args[0] if args else float
            parts = [part for part in text.split(',') if part.strip()]
            return tuple(cls.parse_value(part, item_type) for part in parts)

        if isinstance(inner, type) and issubclass(inner, Enum):
            return inner(text.strip())
        if inner is bool:
            return cls.parse_bool(text)
        if inner is int:
            return int(text.strip())
        if inner is float:
            return float(text.strip())
        return text.strip()

    @classmethod
    def format_value(cls, value: Any) -> str:
        """Format a value so that parse_value reads it back unchanged"""
        if value is None:
            return 'none'
        if isinstance(value, Enum):
            return str(value.value)
        if isinstance(value, bool):
            return 'true' if value else 'false'
        if isinstance(value, float):
            return repr(value)
        if isinstance(value, (tuple, list)):
            return ', '.join(cls.format_value(item) for item in value)
        return str(value)
