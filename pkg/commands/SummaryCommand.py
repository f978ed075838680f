"""Descriptive statistics of a regime's matched agents."""

import argparse
import logging

from commands.BaseCommand import BaseCommand
from core.RegimeSummary import summarize_regime
from core.ResultDocument import RunManifest, render_summary_table, summary_result

logger = logging.getLogger(__name__)


class SummaryCommand(BaseCommand):
    name = "summary"
    help = "Summarize normalized age, size and match distance of a regime"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        self.add_regime_arguments(parser)
        self.add_output_arguments(parser)

    def run(self, args: argparse.Namespace) -> int:
        manifest = RunManifest(
            command=self.name,
            config={"regime": args.regime, "agent_key": args.agent_key},
            seed=args.seed,
        )
        market, matches = self.load_inputs(args, manifest)

        with self.timed("summary"):
            summary = summarize_regime(market, matches)

        return self.emit(
            "summary",
            manifest,
            summary_result(summary),
            render_summary_table(summary),
            self.default_out(args, args.regime),
        )
