"""Market side of a firm."""

from enum import Enum


class SideEnum(Enum):
    """Side of the two-sided merger market."""

    BUYER = "buyer"
    SELLER = "seller"

    def __str__(self):
        return self.value
