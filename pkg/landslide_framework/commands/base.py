import sys
import time
from abc import ABC, abstractmethod
from argparse import ArgumentParser, ArgumentTypeError
from datetime import date
from typing import Any, ClassVar, Dict, List, Optional, TextIO

from pydantic import ValidationError

from ..config import RunConfiguration, TrainConfig
from ..data.pairs import TilePair
from ..data.prepare import load_sites
from ..exceptions import ConfigurationError, DataError, GeometryError
from ..models import CommandMetadata, SizeClass
from ..utils.logging import RunLogger, get_logger
from ..utils.validation import validate_tile_pair

# CLI option name -> TrainConfig field
TRAIN_OPTION_FIELDS = {
    "epochs": "epochs",
    "folds": "folds",
    "batch_size": "batch_size",
    "learning_rate": "learning_rate",
    "augment": "augment",
    "tiles_per_site": "tiles_per_site",
    "tile": "tile_size",
    "seed": "master_seed",
    "threshold": "threshold",
    "max_cloud_fraction": "max_cloud_fraction",
}


class BaseCommand(ABC):
    """Base class for all CLI subcommands"""

    # Command metadata as class variables
    metadata: ClassVar[CommandMetadata]

    def __init__(self, run_config: RunConfiguration, logger: Optional[RunLogger] = None, out: Optional[TextIO] = None):
        self.run_config = run_config
        self.logger = logger or get_logger()
        self._out = out
        self._started = time.perf_counter()

    @classmethod
    def get_metadata(cls) -> CommandMetadata:
        return cls.metadata

    @classmethod
    def default_help(cls, key: str) -> str:
        default = cls.metadata.defaults.get(key)
        return "" if default is None else f" (default {default})"

    @classmethod
    @abstractmethod
    def add_arguments(cls, parser: ArgumentParser) -> None:
        """Declare this subcommand's flags; defaults live in the metadata"""
        raise NotImplementedError("Command must implement add_arguments")

    @abstractmethod
    def run(self, options: Dict[str, Any]) -> None:
        """Execute with fully resolved options (defaults < config file < flags)"""
        raise NotImplementedError("Command must implement run")

    def emit(self, line: str) -> None:
        """One machine-readable result line on stdout"""
        print(line, file=self._out or sys.stdout)

    def emit_timing(self) -> None:
        self.emit(f"# elapsed_s={time.perf_counter() - self._started:.3f}")

    def train_config(self, options: Dict[str, Any], **overrides: Any) -> TrainConfig:
        values = {field: options[key] for key, field in TRAIN_OPTION_FIELDS.items() if options.get(key) is not None}
        values.update(overrides)
        try:
            return TrainConfig(**values)
        except ValidationError as e:
            raise ConfigurationError(_validation_reason(e)) from e

    def load_pairs(self, options: Dict[str, Any], cfg: TrainConfig) -> Dict[str, List[TilePair]]:
        """Sites of the --data directory, every pair validated and sharing one tile size"""
        sites = load_sites(options["data"], cfg)
        pairs = [p for site in sorted(sites) for p in sites[site]]
        if not pairs:
            raise DataError(f"{options['data']}: no tile pairs")
        for pair in pairs:
            validate_tile_pair(pair)
        shapes = {p.before.shape for p in pairs}
        if len(shapes) > 1:
            raise GeometryError(f"{options['data']}: mixed tile shapes {sorted(shapes)}")
        return sites


def _validation_reason(error: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(part) for part in item['loc']) or 'value'}: {item['msg']}" for item in error.errors()
    )


# argparse value types; each failure becomes a usage error


def positive_int(text: str) -> int:
    value = _int(text)
    if value < 1:
        raise ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def non_negative_int(text: str) -> int:
    value = _int(text)
    if value < 0:
        raise ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def positive_float(text: str) -> float:
    value = _float(text)
    if not value > 0.0:
        raise ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def unit_float(text: str) -> float:
    value = _float(text)
    if not 0.0 <= value <= 1.0:
        raise ArgumentTypeError(f"expected a number in [0, 1], got {text}")
    return value


def iso_date(text: str) -> date:
    try:
        return date.fromisoformat(text.strip())
    except ValueError:
        raise ArgumentTypeError(f"expected an ISO date (YYYY-MM-DD), got {text}")


def size_class(text: str) -> SizeClass:
    try:
        return SizeClass.parse(text)
    except ValueError:
        choices = ", ".join(s.value for s in SizeClass)
        raise ArgumentTypeError(f"unknown size class {text!r} (choose from {choices})")


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ArgumentTypeError(f"expected an integer, got {text}")


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ArgumentTypeError(f"expected a number, got {text}")
