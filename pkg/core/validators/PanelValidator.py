"""
Firm-year panel diagnostics.

Provides a set of panel rules:
- PanelRule: Base abstract rule
- NegativeValueRule: Rows with a negative age or capacity (error)
- DuplicateRowRule: Firm-years listed more than once (error)
- YearGapRule: Missing years inside a firm's observed span (warning)
- InactiveFirmRule: Firms with zero capacity in every row (warning)
- CarryForwardRule: Merger participants resolved from an earlier year (info)
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
import logging

import pandas as pd

from core.enums.SeverityEnum import SeverityEnum
from core.models.MergerRecords import (
    MergerRecord,
    latest_panel_rows,
    panel_frame,
    participants_frame,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class PanelDiagnostic:
    """A single finding about the panel."""

    severity: SeverityEnum
    firm: str
    year: int | None
    message: str

    @property
    def is_error(self) -> bool:
        return self.severity is SeverityEnum.ERROR

    def __str__(self) -> str:
        where = f"{self.firm} ({self.year})" if self.year is not None else self.firm
        return f"[{self.severity.value}] {where}: {self.message}"


# ============================================================================
# BASE RULE
# ============================================================================


class PanelRule(ABC):
    """Base abstract rule checked against the whole panel."""

    @abstractmethod
    def check(
        self,
        panel: pd.DataFrame,
        mergers: Sequence[MergerRecord],
    ) -> list[PanelDiagnostic]:
        """
        Check the panel.

        Args:
            panel: Panel rows from panel_frame, sorted by firm key and year
            mergers: Merger records the panel must serve (may be empty)

        Returns:
            Diagnostics found, empty when the rule holds
        """
        pass


# ============================================================================
# RULES
# ============================================================================


class NegativeValueRule(PanelRule):
    def check(self, panel, mergers):
        negative = panel[panel["age_years"].lt(0) | panel["size_teu"].lt(0)]
        return [
            PanelDiagnostic(
                SeverityEnum.ERROR,
                row.firm,
                int(row.year),
                f"negative value (age {row.age_years}, TEU {row.size_teu})",
            )
            for row in negative.itertuples(index=False)
        ]


class DuplicateRowRule(PanelRule):
    def check(self, panel, mergers):
        repeated = panel[panel.duplicated(["key", "year"], keep="first")]
        return [
            PanelDiagnostic(SeverityEnum.ERROR, row.firm, int(row.year), "firm-year listed twice")
            for row in repeated.itertuples(index=False)
        ]


class YearGapRule(PanelRule):
    def check(self, panel, mergers):
        previous = panel.groupby("key", sort=False)["year"].shift()
        gaps = panel.assign(previous=previous)[panel["year"] - previous > 1]
        return [
            PanelDiagnostic(
                SeverityEnum.WARNING,
                row.firm,
                int(row.year),
                f"no rows for {int(row.previous) + 1}-{int(row.year) - 1}",
            )
            for row in gaps.itertuples(index=False)
        ]


class InactiveFirmRule(PanelRule):
    def check(self, panel, mergers):
        grouped = panel.groupby("key", sort=False)
        firms = pd.DataFrame({"firm": grouped["firm"].first(), "active": grouped["size_teu"].max().gt(0)})
        return [
            PanelDiagnostic(SeverityEnum.WARNING, firm, None, "never active (TEU 0 in every row)")
            for firm in firms.loc[~firms["active"], "firm"]
        ]


class CarryForwardRule(PanelRule):
    """Reports merger participants whose merger year is missing but an earlier year exists."""

    def check(self, panel, mergers):
        participants = participants_frame(mergers)
        if participants.empty or panel.empty:
            return []

        resolved = latest_panel_rows(panel, participants)
        carried = resolved[resolved["panel_year"] < resolved["year"]]
        return [
            PanelDiagnostic(
                SeverityEnum.INFO,
                row.name,
                int(row.year),
                f"carried forward from {int(row.panel_year)}",
            )
            for row in carried.itertuples(index=False)
        ]


DEFAULT_RULES: tuple[PanelRule, ...] = (
    NegativeValueRule(),
    DuplicateRowRule(),
    YearGapRule(),
    InactiveFirmRule(),
    CarryForwardRule(),
)


def validate_panel(
    panel: pd.DataFrame | Iterable[tuple],
    mergers: Sequence[MergerRecord] = (),
    rules: Sequence[PanelRule] = DEFAULT_RULES,
) -> list[PanelDiagnostic]:
    """Run every panel rule and collect the diagnostics.

    Never raises; callers decide what to do with error-level findings.
    """
    panel = panel_frame(panel)
    diagnostics = [diagnostic for rule in rules for diagnostic in rule.check(panel, mergers)]

    counts = Counter(diagnostic.severity for diagnostic in diagnostics)
    logger.debug(
        f"Panel of {panel['key'].nunique()} firm(s): "
        + ", ".join(f"{counts[severity]} {severity.value}" for severity in SeverityEnum)
    )
    return diagnostics
