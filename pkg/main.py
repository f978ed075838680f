"""
Merger Matching Toolkit - command-line entry point.

Handles logging setup, the uncaught-exception hook and dispatch to the
estimate, counterfactual and synthetic sub-commands.
"""

import argparse
import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path
import re
import sys

from commands import COMMANDS
from constants import (
    APP_NAME,
    APP_VERSION,
    EXIT_INPUT_ERROR,
    LOG_BACKUP_COUNT,
    LOG_DATE_FORMAT,
    LOG_DIR,
    LOG_FILE_NAME,
    LOG_FORMAT,
    LOG_MAX_BYTES,
)

logger = logging.getLogger(__name__)

# flags whose values are comma-separated numbers, often negative
NUMERIC_LIST_FLAGS = ("--bounds", "--beta")
NEGATIVE_VALUE = re.compile(r"^-\.?\d")


def attach_negative_values(argv: list[str]) -> list[str]:
    """Rewrite "--bounds -5,5" as "--bounds=-5,5", which argparse reads as a value."""
    joined: list[str] = []
    i = 0
    while i < len(argv):
        token = argv[i]
        if token in NUMERIC_LIST_FLAGS and i + 1 < len(argv) and NEGATIVE_VALUE.match(argv[i + 1]):
            joined.append(f"{token}={argv[i + 1]}")
            i += 2
            continue
        joined.append(token)
        i += 1
    return joined


class ToolkitArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with the input-error code.

    Negative values of the numeric list flags may follow the flag as a
    separate token.
    """

    def parse_known_args(self, args=None, namespace=None):
        argv = sys.argv[1:] if args is None else list(args)
        return super().parse_known_args(attach_negative_values(argv), namespace)

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT_ERROR, f"{self.prog}: error: {message}\n")


def setup_logging(log_dir: Path = LOG_DIR, verbose: bool = False) -> None:
    """
    Configure logging with file rotation and console output.

    The file receives everything; standard error receives warnings, or
    progress too when verbose.
    """
    log_dir.mkdir(parents=True, exist_ok=True)

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    root_logger.handlers.clear()

    file_handler = RotatingFileHandler(
        log_dir / LOG_FILE_NAME,
        maxBytes=LOG_MAX_BYTES,
        backupCount=LOG_BACKUP_COUNT,
        encoding="utf-8",
    )
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT))
    root_logger.addHandler(file_handler)

    # stdout carries the result tables
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.INFO if verbose else logging.WARNING)
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT))
    root_logger.addHandler(console_handler)

    logger.info(f"{APP_NAME} v{APP_VERSION} - Logging initialized")


def setup_exception_hook() -> None:
    """Install a global handler that logs uncaught exceptions."""

    def exception_handler(exc_type, exc_value, exc_traceback):
        if issubclass(exc_type, KeyboardInterrupt):
            sys.__excepthook__(exc_type, exc_value, exc_traceback)
            return

        logger.critical("Uncaught exception", exc_info=(exc_type, exc_value, exc_traceback))
        print(f"fatal: {exc_type.__name__}: {exc_value}", file=sys.stderr)

    sys.excepthook = exception_handler


def build_parser() -> argparse.ArgumentParser:
    parser = ToolkitArgumentParser(
        prog="merger-matching",
        description=f"{APP_NAME}: matching maximum-score estimation and merger counterfactuals",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {APP_VERSION}")
    parser.add_argument("--verbose", "-v", action="store_true", help="Log progress to standard error")
    parser.add_argument("--log-dir", type=Path, default=LOG_DIR, help="Directory of the rotating log file")

    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=ToolkitArgumentParser)
    for command_class in COMMANDS:
        command = command_class()
        subparser = subparsers.add_parser(command.name, help=command.help, description=command.help)
        command.add_arguments(subparser)
        subparser.set_defaults(handler=command)

    return parser


def main(argv: list[str] | None = None) -> int:
    """
    Main entry point.

    Returns:
        Exit code: 0 success, 1 input or validation error, 2 numerical error
    """
    args = build_parser().parse_args(argv)

    setup_logging(args.log_dir, args.verbose)
    setup_exception_hook()
    logger.info(f"Starting {APP_NAME} v{APP_VERSION}: {args.command}")

    exit_code = args.handler.execute(args)
    logger.info(f"Exiting with code {exit_code}")
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
