#!/usr/bin/env python3
"""
Landslide detection command line.

Wires the pipeline subcommands (synth, prepare, train, cv, eval, predict)
into one argparse front end. Option values resolve as built-in defaults,
then the --config file, then explicit flags. Results go to stdout, logs and
the single-line error report go to stderr.

Exit codes: 0 success, 1 usage or configuration error, 2 data or
validation error, 3 numerical abort.
"""
import argparse
import sys
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from commands import (
    CrossValidateCommand, EvaluateCommand, PredictCommand, PrepareCommand, SynthCommand, TrainCommand,
)
from landslide_framework.commands import CommandRegistry
from landslide_framework.commands.base import non_negative_int, positive_int
from landslide_framework.config import RunConfiguration
from landslide_framework.exceptions import (
    ConfigurationError, DataError, LandslideError, NumericalAbortError, UsageError,
)
from landslide_framework.models import CommandMetadata
from landslide_framework.utils.logging import ConsoleRunLogger, RunLogger, console, set_logger

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

TRUE_WORDS = {"1", "true", "yes", "on"}
FALSE_WORDS = {"0", "false", "no", "off"}

COMMANDS = (SynthCommand, PrepareCommand, TrainCommand, CrossValidateCommand, EvaluateCommand, PredictCommand)


class CliArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting with status 2"""

    def error(self, message: str) -> None:
        raise UsageError(f"{self.prog}: {message}")


class LandslideCli:
    """Registry of subcommands plus the parser built from it"""

    def __init__(self, run_config: Optional[RunConfiguration] = None, logger: Optional[RunLogger] = None):
        self.run_config = run_config or RunConfiguration.from_env()
        self.logger = logger or ConsoleRunLogger("landslide", level=self.run_config.log_level)
        set_logger(self.logger)

        self.registry = CommandRegistry()
        self._register_commands()
        self.parser, self.subparsers = self._build_parser()

    def _register_commands(self) -> None:
        for implementation in COMMANDS:
            self.registry.register(metadata=implementation.get_metadata(), implementation=implementation)

    def _build_parser(self):
        common = CliArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
        common.add_argument("--seed", type=non_negative_int, metavar="N",
                            help="master seed; fixes every random stream (default LSW_SEED or 0)")
        common.add_argument("--config", metavar="F", help="flat key=value file of option values; flags win")
        common.add_argument("--jobs", type=positive_int, metavar="J",
                            help="folds trained in parallel (default LSW_JOBS or 1)")

        parser = CliArgumentParser(
            prog="landslide",
            description="Train and evaluate a bitemporal 3D-CNN landslide detector",
        )
        sub = parser.add_subparsers(dest="command", metavar="COMMAND")
        subparsers: Dict[str, argparse.ArgumentParser] = {}
        for metadata in self.registry.list_commands():
            subparser = sub.add_parser(
                metadata.name,
                help=metadata.description,
                description=metadata.description,
                parents=[common],
                argument_default=argparse.SUPPRESS,
            )
            self.registry.get_implementation(metadata.name).add_arguments(subparser)
            subparsers[metadata.name] = subparser
        return parser, subparsers

    def config_file_options(self, metadata: CommandMetadata, path: str) -> Dict[str, Any]:
        """Parse a config file through the subcommand's own parser so values get the same checks as flags"""
        argv: List[str] = []
        for key, value in RunConfiguration.read_file(path).items():
            if key == "config":
                raise UsageError(f"{path}: a config file cannot name another config file")
            flag = "--" + key.replace("_", "-")
            if isinstance(metadata.defaults.get(key), bool):
                word = value.strip().lower()
                if word in TRUE_WORDS:
                    argv.append(flag)
                elif word in FALSE_WORDS:
                    argv.append("--no-" + key.replace("_", "-"))
                else:
                    raise UsageError(f"{path}: {key} expects true or false, got {value!r}")
            else:
                argv.append(f"{flag}={value}")
        try:
            return vars(self.subparsers[metadata.name].parse_args(argv))
        except UsageError as e:
            raise UsageError(f"config file {path}: {e}") from e

    def resolve_options(self, name: str, namespace: argparse.Namespace) -> Dict[str, Any]:
        metadata = self.registry.get_command(name)
        explicit = {k: v for k, v in vars(namespace).items() if k != "command"}
        config_path = explicit.pop("config", None)

        options: Dict[str, Any] = {
            "seed": self.run_config.seed if self.run_config.seed is not None else 0,
            "jobs": self.run_config.jobs,
        }
        options.update(metadata.defaults)
        if config_path:
            options.update(self.config_file_options(metadata, config_path))
        options.update(explicit)

        missing = [key for key in metadata.required if options.get(key) is None]
        if missing:
            flags = ", ".join("--" + key.replace("_", "-") for key in missing)
            raise UsageError(f"{name}: missing required option {flags}")
        return options

    def run(self, args: Sequence[str]) -> None:
        namespace = self.parser.parse_args(list(args))
        if namespace.command is None:
            names = ", ".join(m.name for m in self.registry.list_commands())
            raise UsageError(f"no subcommand given (choose from {names})")
        options = self.resolve_options(namespace.command, namespace)
        self.logger.debug(f"running {namespace.command}", **{k: v for k, v in sorted(options.items())})

        run_config = self.run_config.with_overrides(seed=options["seed"], jobs=options["jobs"])
        command = self.registry.get_implementation(namespace.command)(run_config, logger=self.logger)
        command.run(options)


def exit_code_for(error: Exception) -> int:
    if isinstance(error, NumericalAbortError):
        return EXIT_NUMERICAL
    if isinstance(error, DataError):
        return EXIT_DATA
    return EXIT_USAGE


def report_error(error: Exception) -> None:
    """Print the one-line machine-parseable error report on stderr"""
    reason = " ".join(str(error).split())
    console.print(f"error: kind={type(error).__name__} reason={reason}", markup=False, highlight=False, soft_wrap=True)


def run_cli(args: Optional[Sequence[str]] = None) -> int:
    """Run one CLI invocation and return its exit code"""
    args = sys.argv[1:] if args is None else args
    try:
        LandslideCli().run(args)
    except SystemExit as e:
        # --help exits through argparse
        return e.code if isinstance(e.code, int) else EXIT_OK
    except LandslideError as e:
        report_error(e)
        return exit_code_for(e)
    except ValidationError as e:
        error = ConfigurationError("; ".join(item["msg"] for item in e.errors()))
        report_error(error)
        return EXIT_USAGE
    return EXIT_OK
