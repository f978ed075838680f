from commands.BaseCommand import BaseCommand
from commands.CounterfactualCommand import CounterfactualCommand
from commands.EstimateCommand import EstimateCommand
from commands.SummaryCommand import SummaryCommand
from commands.SyntheticCommand import SyntheticCommand

COMMANDS: tuple[type[BaseCommand], ...] = (
    EstimateCommand,
    CounterfactualCommand,
    SyntheticCommand,
    SummaryCommand,
)
