"""Parsed rows of the merger lists and the firm-year panel."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np
import pandas as pd

from core.enums.MergerTypeEnum import MergerTypeEnum
from core.enums.SideEnum import SideEnum

PANEL_COLUMNS = ("firm", "year", "age_years", "size_teu", "country")


def firm_key(name: str) -> str:
    """Lookup key for a firm name: whitespace-trimmed and case-folded."""
    return " ".join(name.split()).casefold()


@dataclass(frozen=True, slots=True)
class MergerRecord:
    """One row of a regime's merger list.

    Attributes:
        id: Record id; market order follows it
        seller_name: Seller firm as listed
        buyer_name: Buyer firm as listed
        year: Merger year
        merger_type: merger, acquisition or consolidation
    """

    id: int
    seller_name: str
    buyer_name: str
    year: int
    merger_type: MergerTypeEnum

    def __post_init__(self):
        if not self.seller_name.strip() or not self.buyer_name.strip():
            raise ValueError(f"Merger record {self.id}: firm names must be non-empty")

    @property
    def is_consolidation(self) -> bool:
        return self.merger_type is MergerTypeEnum.CONSOLIDATION

    @property
    def triple(self) -> tuple[str, str, int]:
        return firm_key(self.seller_name), firm_key(self.buyer_name), self.year


def panel_frame(rows: pd.DataFrame | Iterable[tuple]) -> pd.DataFrame:
    """Firm-year panel with a firm key, sorted by key then year.

    Accepts a DataFrame holding PANEL_COLUMNS or row tuples in that order.
    Negative values are kept here and reported by the panel validator.
    """
    if isinstance(rows, pd.DataFrame):
        frame = rows.loc[:, list(PANEL_COLUMNS)].copy()
    else:
        frame = pd.DataFrame(list(rows), columns=list(PANEL_COLUMNS))

    frame = frame.astype(
        {"firm": str, "year": "int64", "age_years": "float64", "size_teu": "float64", "country": str}
    )
    frame["country"] = frame["country"].str.strip().str.upper()
    frame["key"] = frame["firm"].map(firm_key)
    return frame.sort_values(["key", "year"], kind="stable").reset_index(drop=True)


def participants_frame(records: Iterable[MergerRecord]) -> pd.DataFrame:
    """Merger participants that must be found in the panel, in record order.

    Every seller and every buyer except consolidation buyers, which are new
    entities. Columns: record_id, side, name, year, key.
    """
    rows = []
    for record in records:
        rows.append((record.id, SideEnum.SELLER.value, record.seller_name, record.year))
        if not record.is_consolidation:
            rows.append((record.id, SideEnum.BUYER.value, record.buyer_name, record.year))

    frame = pd.DataFrame(rows, columns=["record_id", "side", "name", "year"])
    frame["year"] = frame["year"].astype("int64")
    frame["key"] = frame["name"].map(firm_key).astype(str)
    return frame


def latest_panel_rows(panel: pd.DataFrame, requests: pd.DataFrame) -> pd.DataFrame:
    """Latest panel row at or before each request's year (last-observation carry-forward).

    Args:
        panel: Output of panel_frame
        requests: Frame with 'key' and 'year' columns

    Returns:
        requests with panel_year, age_years, size_teu and country appended,
        in request order; panel_year is NaN where no row qualifies
    """
    left = requests.reset_index(drop=True)
    left = left.assign(order=np.arange(len(left))).sort_values("year", kind="stable")
    right = (
        panel.loc[:, ["key", "year", "age_years", "size_teu", "country"]]
        .assign(panel_year=panel["year"].astype("float64"))
        .sort_values("year", kind="stable")
    )
    merged = pd.merge_asof(left, right, on="year", by="key", direction="backward")
    return merged.sort_values("order").drop(columns="order").reset_index(drop=True)
