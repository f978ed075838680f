"""Synthetic fixture and estimator-recovery experiment."""

import argparse
from dataclasses import replace
import logging
from pathlib import Path

from commands.BaseCommand import RESULTS_DIR, BaseCommand, parse_bounds
from constants import DEFAULT_SHOCK_SD, DEFAULT_TRIALS, SYNTHETIC_COUNTRIES
from core.Estimator import EstimationConfig
from core.ResultDocument import RunManifest, render_recovery_table, synthetic_result
from core.Score import ParamVector
from core.SyntheticOracle import (
    SyntheticSpec,
    generate_fixture,
    recovery_experiment,
    write_fixture,
)

logger = logging.getLogger(__name__)


class SyntheticCommand(BaseCommand):
    name = "synthetic"
    help = "Write a synthetic fixture and measure sign recovery over trials"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        group = parser.add_argument_group("generator")
        group.add_argument("--n", type=int, required=True, help="Buyers (and sellers) per market")
        group.add_argument("--beta", default="1,5,-2", help="True coefficients b1,b2,b3")
        group.add_argument("--shock-sd", type=float, default=DEFAULT_SHOCK_SD, help="Pair shock standard deviation")
        group.add_argument("--country-count", type=int, default=SYNTHETIC_COUNTRIES, help="Countries")
        group.add_argument(
            "--distance-squared",
            type=float,
            default=0.0,
            help="Coefficient on Distance^2 in the generating values only",
        )
        group.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help="Recovery trials")
        group.add_argument("--fixture-dir", type=Path, help="Where the fixture CSVs go")
        self.add_search_arguments(parser)
        self.add_output_arguments(parser)

    def run(self, args: argparse.Namespace) -> int:
        spec = SyntheticSpec(
            n=args.n,
            beta_true=ParamVector.from_string(args.beta),
            country_count=args.country_count,
            shock_sd=args.shock_sd,
            seed=args.seed,
            distance_squared=args.distance_squared,
        )
        bounds = parse_bounds(args.bounds)
        config = EstimationConfig(
            bounds=(bounds, bounds),
            runs=args.runs,
            population=args.population,
            max_generations=args.max_generations,
            seed=args.seed,
        )
        label = f"n{args.n}-seed{args.seed}"
        fixture_dir = args.fixture_dir or RESULTS_DIR / f"fixture-{label}"

        manifest = RunManifest(
            command=self.name,
            config={"spec": spec.to_dict(), "trials": args.trials, "search": config.to_dict()},
            seed=args.seed,
        )

        with self.timed("fixture"):
            instance = generate_fixture(spec)
            _, matches = write_fixture(instance.market, instance.matches, fixture_dir)

        with self.timed("recovery"):
            summary = recovery_experiment(
                spec, args.trials, replace(config, workers=1), workers=args.workers
            )

        return self.emit(
            "synthetic",
            manifest,
            synthetic_result(fixture_dir, len(matches), summary),
            render_recovery_table(summary),
            self.default_out(args, label),
        )
