"""Severity levels for data diagnostics."""

from enum import Enum


class SeverityEnum(Enum):
    """Severity level for panel diagnostics."""

    ERROR = "error"
    WARNING = "warning"
    INFO = "info"
