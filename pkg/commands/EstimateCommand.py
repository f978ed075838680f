"""Maximum-score estimation of a regime."""

import argparse
import logging

from commands.BaseCommand import BaseCommand, parse_bounds
from core.Estimator import EstimationConfig, fit_report, maximize_score_de, maximize_score_grid
from core.ResultDocument import RunManifest, estimate_result, render_estimate_table

logger = logging.getLogger(__name__)


class EstimateCommand(BaseCommand):
    name = "estimate"
    help = "Estimate the identified set of (beta2, beta3) for a regime"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        self.add_regime_arguments(parser)
        self.add_search_arguments(parser)
        parser.add_argument(
            "--grid-step",
            type=float,
            help="Score an exhaustive grid with this step instead of running DE",
        )
        parser.add_argument(
            "--no-refine",
            action="store_true",
            help="Skip the lattice extension of bracket ends",
        )
        self.add_output_arguments(parser)

    def run(self, args: argparse.Namespace) -> int:
        bounds = parse_bounds(args.bounds)
        config = EstimationConfig(
            bounds=(bounds, bounds),
            runs=args.runs,
            population=args.population,
            max_generations=args.max_generations,
            seed=args.seed,
            grid_step=args.grid_step,
            workers=args.workers,
            refine=not args.no_refine,
        )
        manifest = RunManifest(
            command=self.name,
            config={"regime": args.regime, "agent_key": args.agent_key, **config.to_dict()},
            seed=args.seed,
        )

        market, matches = self.load_inputs(args, manifest)

        with self.timed("estimate"):
            if config.grid_step is not None:
                identified = maximize_score_grid(market, matches, config.bounds, config.grid_step)
            else:
                identified = maximize_score_de(market, matches, config)
            report = fit_report(market, matches, identified)

        return self.emit(
            "estimate",
            manifest,
            estimate_result(report),
            render_estimate_table(report),
            self.default_out(args, args.regime),
        )
