"""
Exception hierarchy shared by the toolkit.

Two families map onto the command-line exit codes: input problems
(exit 1) and numerical or solver problems (exit 2).
"""

from constants import EXIT_INPUT_ERROR, EXIT_NUMERICAL_ERROR

# ============================================================================
# Base
# ============================================================================


class MatchingToolkitError(Exception):
    """Base exception for all toolkit errors."""

    exit_code = EXIT_INPUT_ERROR


# ============================================================================
# Input / validation errors
# ============================================================================


class InputValidationError(MatchingToolkitError, ValueError):
    """Raised when user-supplied data or configuration is invalid."""

    exit_code = EXIT_INPUT_ERROR


class NormalizationError(InputValidationError):
    """Raised when a characteristic vector cannot be normalized."""

    pass


class MarketConstructionError(InputValidationError):
    """Raised when a market or match list violates its invariants."""

    pass


class ConfigurationError(InputValidationError):
    """Raised when a configuration object is out of range."""

    pass


class GridTooLargeError(InputValidationError):
    """Raised when an exhaustive grid would exceed the evaluation limit."""

    pass


class IngestError(InputValidationError):
    """Base exception for CSV ingestion errors."""

    pass


class InvalidFormatError(IngestError):
    """Raised when a CSV file is malformed or misses required columns."""

    pass


class UnresolvableFirmError(IngestError):
    """Raised when merger participants cannot be found in the panel."""

    def __init__(self, offenders: list[str]) -> None:
        self.offenders = offenders
        super().__init__(f"Unresolvable firm(s): {', '.join(offenders)}")


class DuplicateAgentError(IngestError):
    """Raised when a regime lists the same agent twice."""

    def __init__(self, offenders: list[str]) -> None:
        self.offenders = offenders
        super().__init__(f"Duplicate agent(s) in regime: {', '.join(offenders)}")


class MissingCoordinatesError(IngestError):
    """Raised when a country code is absent from the coordinates table."""

    def __init__(self, countries: list[str]) -> None:
        self.countries = countries
        super().__init__(f"Missing coordinates for: {', '.join(countries)}")


# ============================================================================
# Numerical errors
# ============================================================================


class NumericalError(MatchingToolkitError, RuntimeError):
    """Raised when a numerical routine fails."""

    exit_code = EXIT_NUMERICAL_ERROR


class SolverError(NumericalError):
    """Raised when the assignment solver or dual recovery fails."""

    pass


class ConsistencyError(NumericalError):
    """Raised when an internal cross-check fails."""

    pass


class SyntheticGenerationError(NumericalError):
    """Raised when no usable synthetic market could be drawn."""

    pass
