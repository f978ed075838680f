"""Base class for command-line sub-commands."""

from abc import ABC, abstractmethod
import argparse
from collections.abc import Iterator
from contextlib import contextmanager
import logging
from pathlib import Path
import sys
import time

from constants import (
    COORDS_FILE,
    DEFAULT_BOUNDS,
    DEFAULT_MAX_GENERATIONS,
    DEFAULT_POPULATION,
    DEFAULT_RUNS,
    EXIT_SUCCESS,
    MERGERS_DIR,
)
from core.exceptions import ConfigurationError, MatchingToolkitError
from core.Market import Market, MatchList
from core.RegimeLoader import AGENT_KEYS, load_regime
from core.ResultDocument import RunManifest, build_document, write_document

logger = logging.getLogger(__name__)

RESULTS_DIR = Path("results")


def parse_bounds(text: str) -> tuple[float, float]:
    """Parse "LO,HI" into an interval.

    Raises:
        ConfigurationError: If text is not two numbers with LO < HI
    """
    try:
        lo, hi = (float(part) for part in text.split(","))
    except ValueError as e:
        raise ConfigurationError(f"Invalid bounds '{text}': expected LO,HI") from e
    if not lo < hi:
        raise ConfigurationError(f"Invalid bounds '{text}': LO must be < HI")
    return lo, hi


class BaseCommand(ABC):
    """A sub-command of the toolkit CLI.

    Subclasses declare their flags in add_arguments and do their work in
    run. execute maps toolkit errors onto exit codes.
    """

    name: str = ""
    help: str = ""

    def __init__(self) -> None:
        self.timings: dict[str, float] = {}

    # ========================================
    # ARGUMENTS
    # ========================================

    @abstractmethod
    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        """Declare the sub-command's flags."""
        raise NotImplementedError(f"{self.__class__.__name__} must implement add_arguments()")

    @staticmethod
    def add_regime_arguments(parser: argparse.ArgumentParser) -> None:
        group = parser.add_argument_group("regime inputs")
        group.add_argument("--regime", required=True, help="Regime label, e.g. 1991-2005")
        group.add_argument(
            "--mergers", type=Path, help="Merger list CSV (default: bundled list of the regime)"
        )
        group.add_argument("--panel", type=Path, required=True, help="Firm-year panel CSV")
        group.add_argument(
            "--coords", type=Path, default=COORDS_FILE, help="Capital coordinates CSV"
        )
        group.add_argument(
            "--agent-key",
            choices=AGENT_KEYS,
            default="record",
            help="'firm' rejects a firm repeated on one side of a regime",
        )

    @staticmethod
    def add_search_arguments(parser: argparse.ArgumentParser) -> None:
        group = parser.add_argument_group("score search")
        group.add_argument("--runs", type=int, default=DEFAULT_RUNS, help="DE restarts")
        group.add_argument("--population", type=int, default=DEFAULT_POPULATION, help="DE population")
        group.add_argument(
            "--max-generations", type=int, default=DEFAULT_MAX_GENERATIONS, help="DE generation cap"
        )
        group.add_argument(
            "--bounds",
            default=f"{DEFAULT_BOUNDS[0]:g},{DEFAULT_BOUNDS[1]:g}",
            help="Search interval LO,HI for beta2 and beta3",
        )
        group.add_argument("--workers", type=int, default=1, help="Processes for DE restarts")

    @staticmethod
    def add_output_arguments(parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--seed", type=int, default=0, help="Root seed of all randomness")
        parser.add_argument("--out", type=Path, help="Result document path")

    # ========================================
    # EXECUTION
    # ========================================

    @abstractmethod
    def run(self, args: argparse.Namespace) -> int:
        """Do the work and return an exit code."""
        raise NotImplementedError(f"{self.__class__.__name__} must implement run()")

    def execute(self, args: argparse.Namespace) -> int:
        """Run the command, mapping toolkit errors onto their exit codes."""
        self.timings = {}
        logger.info(f"Running '{self.name}'")
        try:
            with self.timed("total"):
                return self.run(args)
        except MatchingToolkitError as e:
            logger.error(f"'{self.name}' failed: {e}")
            print(f"error: {e}", file=sys.stderr)
            return e.exit_code

    @contextmanager
    def timed(self, phase: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[phase] = time.perf_counter() - start

    # ========================================
    # HELPERS
    # ========================================

    def load_inputs(self, args: argparse.Namespace, manifest: RunManifest) -> tuple[Market, MatchList]:
        """Load the regime named by the flags and record input digests."""
        mergers = args.mergers or MERGERS_DIR / f"{args.regime}.csv"
        with self.timed("load"):
            market, matches = load_regime(
                mergers, args.panel, args.coords, args.regime, agent_key=args.agent_key
            )
        manifest.add_input("mergers", mergers)
        manifest.add_input("panel", args.panel)
        manifest.add_input("coords", args.coords)
        return market, matches

    def default_out(self, args: argparse.Namespace, label: str) -> Path:
        return args.out or RESULTS_DIR / f"{self.name}-{label}.json"

    def emit(self, kind: str, manifest: RunManifest, result: dict, table: str, out: Path) -> int:
        """Write the result document and print its table."""
        manifest.timings = dict(self.timings)
        write_document(build_document(kind, manifest, result), out)
        print(table)
        print(f"\nResult written to {out}")
        return EXIT_SUCCESS
