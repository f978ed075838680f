"""Merger type as listed in the merger tables."""

from enum import Enum


class MergerTypeEnum(Enum):
    """Type of a recorded merger.

    CONSOLIDATION marks a merger that creates a new entity; its buyer
    enters the market with the regime's lowest age and size.
    """

    MERGER = "merger"
    ACQUISITION = "acquisition"
    CONSOLIDATION = "consolidation"

    @classmethod
    def from_string(cls, value: str) -> "MergerTypeEnum":
        """Parse a type cell, case-insensitively.

        Raises:
            ValueError: If value is not a known merger type
        """
        normalized = value.strip().lower()
        try:
            return cls(normalized)
        except ValueError:
            allowed = ", ".join(member.value for member in cls)
            raise ValueError(f"Invalid merger type: '{value}'. Must be one of {allowed}")

    def __str__(self):
        return self.value
