"""Merger-prohibition counterfactual of a regime."""

import argparse
import logging
from pathlib import Path

from commands.BaseCommand import BaseCommand
from constants import DEFAULT_DRAWS, DEFAULT_SHOCK_SD
from core.Counterfactual import BETA_BOUNDS, CounterfactualConfig, select_beta, simulate
from core.ResultDocument import (
    RunManifest,
    counterfactual_result,
    load_brackets,
    render_counterfactual_table,
)
from core.Score import ParamVector

logger = logging.getLogger(__name__)


class CounterfactualCommand(BaseCommand):
    name = "counterfactual"
    help = "Simulate equilibrium matchings with same-country mergers prohibited"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        self.add_regime_arguments(parser)

        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument("--beta", help="Coefficients b1,b2,b3 (or b2,b3 with b1 = 1)")
        source.add_argument("--beta-from", type=Path, help="Estimate result to take brackets from")
        parser.add_argument(
            "--beta-bound",
            choices=BETA_BOUNDS,
            default="upper",
            help="Bracket end used with --beta-from",
        )

        parser.add_argument("--draws", type=int, default=DEFAULT_DRAWS, help="Shock draws")
        parser.add_argument("--shock-sd", type=float, default=DEFAULT_SHOCK_SD, help="Shock standard deviation")
        parser.add_argument(
            "--no-prohibit", action="store_true", help="Do not block same-country pairs"
        )
        parser.add_argument(
            "--drop-same-country-agents",
            action="store_true",
            help="Remove the agents of observed same-country pairs before simulating",
        )
        self.add_output_arguments(parser)

    def run(self, args: argparse.Namespace) -> int:
        if args.beta is not None:
            beta = ParamVector.from_string(args.beta)
            beta_source = "explicit"
        else:
            beta = select_beta(load_brackets(args.beta_from), args.beta_bound)
            beta_source = f"{args.beta_bound} bound of {args.beta_from}"

        config = CounterfactualConfig(
            beta=beta,
            draws=args.draws,
            shock_sd=args.shock_sd,
            seed=args.seed,
            prohibit_same_country=not args.no_prohibit,
            drop_same_country_agents=args.drop_same_country_agents,
        )
        manifest = RunManifest(
            command=self.name,
            config={
                "regime": args.regime,
                "agent_key": args.agent_key,
                "beta_source": beta_source,
                **config.to_dict(),
            },
            seed=args.seed,
        )
        if args.beta_from is not None:
            manifest.add_input("beta_from", args.beta_from)

        market, matches = self.load_inputs(args, manifest)

        with self.timed("simulate"):
            stats = simulate(market, matches, config)

        return self.emit(
            "counterfactual",
            manifest,
            counterfactual_result(args.regime, beta.to_dict(), stats),
            render_counterfactual_table(args.regime, stats),
            self.default_out(args, args.regime),
        )
