import os
from abc import ABC, abstractmethod
from datetime import datetime
from typing import Any, Optional

from dotenv import load_dotenv
from rich.console import Console
from rich.markup import escape
from rich.theme import Theme

from ..models import LogLevel

# Create a custom theme for our logger
theme = Theme({
    "info": "cyan",
    "warning": "yellow",
    "error": "red",
    "success": "green",
    "timestamp": "dim cyan",
    "context": "dim",
})

# stderr only; stdout is reserved for machine-comparable command output
console = Console(theme=theme, stderr=True, highlight=False)

_global_logger: Optional["RunLogger"] = None


def level_from_env(default: LogLevel = LogLevel.INFO) -> LogLevel:
    """Read LSW_LOG (quiet, info, debug), loading a .env file first"""
    load_dotenv()
    raw = os.getenv("LSW_LOG")
    if not raw:
        return default
    try:
        return LogLevel(raw.strip().lower())
    except ValueError:
        console.print(f"[warning]WARNING[/warning]: unknown LSW_LOG value {raw!r}, using {default.value}")
        return default


def get_logger() -> "RunLogger":
    """Get the process-wide logger, creating it from LSW_LOG if needed"""
    global _global_logger
    if _global_logger is None:
        _global_logger = ConsoleRunLogger("landslide", level=level_from_env())
    return _global_logger


def set_logger(logger: "RunLogger") -> None:
    global _global_logger
    _global_logger = logger


class RunLogger(ABC):
    """Abstract base class for pipeline logging"""

    def __init__(self, run_id: str, level: LogLevel = LogLevel.INFO):
        self.run_id = run_id
        self.level = level

    def enabled(self, level: LogLevel) -> bool:
        return self.level.rank >= level.rank

    @abstractmethod
    def info(self, message: str, **kwargs: Any) -> None:
        """Log an informational message"""
        pass

    @abstractmethod
    def warning(self, message: str, **kwargs: Any) -> None:
        """Log a warning message"""
        pass

    @abstractmethod
    def error(self, message: str, **kwargs: Any) -> None:
        """Log an error message"""
        pass

    @abstractmethod
    def debug(self, message: str, **kwargs: Any) -> None:
        """Log a debug message"""
        pass


class ConsoleRunLogger(RunLogger):
    """Console implementation of the run logger"""

    def _emit(self, tag: str, message: str, kwargs: dict) -> None:
        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        line = f"[timestamp]{timestamp}[/timestamp] {tag}: {escape(message)}"
        if kwargs:
            context = " ".join(f"{k}={_format_value(v)}" for k, v in kwargs.items())
            line += f" [context]{escape(context)}[/context]"
        console.print(line)

    def info(self, message: str, **kwargs: Any) -> None:
        if self.enabled(LogLevel.INFO):
            self._emit("[info]INFO[/info]", message, kwargs)

    def warning(self, message: str, **kwargs: Any) -> None:
        self._emit("[warning]WARNING[/warning]", message, kwargs)

    def error(self, message: str, **kwargs: Any) -> None:
        self._emit("[error]ERROR[/error]", message, kwargs)

    def debug(self, message: str, **kwargs: Any) -> None:
        if self.enabled(LogLevel.DEBUG):
            self._emit("[dim]DEBUG[/dim]", message, kwargs)


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)
