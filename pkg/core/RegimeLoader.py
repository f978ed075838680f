"""
Regime loading from CSV files.

Three inputs make up a regime:
- merger list: id, seller, buyer, year, type
- firm-year panel: firm, year, age_years, size_teu, country
- capital coordinates: country, capital, lat, lon

Every merger record contributes its own buyer agent and seller agent, in
record id order, so the observed matching pairs buyer i with seller i.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
import logging
from pathlib import Path
import re

import pandas as pd

from constants import REGIMES
from core.enums.MergerTypeEnum import MergerTypeEnum
from core.enums.SideEnum import SideEnum
from core.exceptions import (
    ConfigurationError,
    DuplicateAgentError,
    InvalidFormatError,
    UnresolvableFirmError,
)
from core.File import numeric_column, read_csv_frame
from core.Market import Firm, Market, MatchList, build_market
from core.models.MergerRecords import (
    PANEL_COLUMNS,
    MergerRecord,
    firm_key,
    latest_panel_rows,
    panel_frame,
    participants_frame,
)
from core.validators.PanelValidator import validate_panel

logger = logging.getLogger(__name__)

MERGER_COLUMNS = ("id", "seller", "buyer", "year", "type")
COORDINATE_COLUMNS = ("country", "capital", "lat", "lon")

AGENT_KEYS = ("record", "firm")

CoordinateTable = dict[str, tuple[float, float]]

_REGIME_LABEL = re.compile(r"^\s*(\d{4})\s*-\s*(\d{4})\s*$")


def regime_years(regime: str) -> tuple[int, int]:
    """First and last year of a regime, both inclusive.

    Known regimes come from REGIMES; any other "YYYY-YYYY" label is parsed.

    Raises:
        ConfigurationError: If the label is neither known nor a year range
    """
    if regime in REGIMES:
        return REGIMES[regime]

    match = _REGIME_LABEL.match(regime)
    if not match:
        raise ConfigurationError(
            f"Unknown regime '{regime}': expected one of {', '.join(REGIMES)} or 'YYYY-YYYY'"
        )
    first, last = int(match.group(1)), int(match.group(2))
    if first > last:
        raise ConfigurationError(f"Regime '{regime}' ends before it starts")
    return first, last


# ============================================================================
# Parsers
# ============================================================================


def _reject_blank(frame: pd.DataFrame, column: str, path: Path, what: str) -> None:
    blank = frame[column].eq("")
    if blank.any():
        raise InvalidFormatError(f"{path.name}:{blank.idxmax()}: {what} is empty")


def parse_mergers(path: Path | str) -> list[MergerRecord]:
    """Parse a merger list, sorted by record id.

    Raises:
        InvalidFormatError: On malformed rows, unknown merger types or empty names
    """
    path = Path(path)
    frame = read_csv_frame(path, MERGER_COLUMNS)
    frame = frame.assign(
        id=numeric_column(frame, "id", path, integer=True),
        year=numeric_column(frame, "year", path, integer=True),
    )

    records = []
    for line, row in zip(frame.index, frame.itertuples(index=False)):
        try:
            records.append(
                MergerRecord(
                    id=int(row.id),
                    seller_name=row.seller,
                    buyer_name=row.buyer,
                    year=int(row.year),
                    merger_type=MergerTypeEnum.from_string(row.type),
                )
            )
        except ValueError as e:
            raise InvalidFormatError(f"{path.name}:{line}: {e}") from e

    records.sort(key=lambda record: record.id)
    logger.debug(f"Parsed {len(records)} merger record(s) from {path.name}")
    return records


def parse_panel(path: Path | str) -> pd.DataFrame:
    """Parse a firm-year panel into a panel_frame. Values are checked later by validate_panel."""
    path = Path(path)
    frame = read_csv_frame(path, PANEL_COLUMNS)
    _reject_blank(frame, "firm", path, "firm name")
    frame = frame.assign(
        year=numeric_column(frame, "year", path, integer=True),
        age_years=numeric_column(frame, "age_years", path),
        size_teu=numeric_column(frame, "size_teu", path),
    )
    panel = panel_frame(frame)
    logger.debug(f"Parsed {len(panel)} panel row(s) from {path.name}")
    return panel


def load_coordinates(path: Path | str) -> CoordinateTable:
    """Parse a country -> (capital latitude, capital longitude) table.

    Raises:
        InvalidFormatError: On malformed rows or a country listed twice
    """
    path = Path(path)
    frame = read_csv_frame(path, COORDINATE_COLUMNS)
    frame = frame.assign(country=frame["country"].str.upper())
    _reject_blank(frame, "country", path, "country code")
    _reject_blank(frame, "capital", path, "capital")

    repeated = frame["country"].duplicated()
    if repeated.any():
        line = repeated.idxmax()
        raise InvalidFormatError(
            f"{path.name}:{line}: country '{frame.at[line, 'country']}' listed twice"
        )

    lat = numeric_column(frame, "lat", path)
    lon = numeric_column(frame, "lon", path)
    table: CoordinateTable = {
        country: (float(y), float(x)) for country, y, x in zip(frame["country"], lat, lon)
    }
    logger.debug(f"Parsed coordinates for {len(table)} countries from {path.name}")
    return table


# ============================================================================
# Regime assembly
# ============================================================================


def _check_duplicates(records: list[MergerRecord], agent_key: str) -> None:
    frame = pd.DataFrame(
        [(record.id, *record.triple) for record in records],
        columns=["id", "seller", "buyer", "year"],
    )
    offenders = [f"record id {record_id}" for record_id in frame.loc[frame.duplicated("id"), "id"].unique()]

    triples = frame.loc[frame.duplicated(["seller", "buyer", "year"]), ["seller", "buyer", "year"]]
    offenders += [
        f"{seller} -> {buyer} ({year})"
        for seller, buyer, year in triples.drop_duplicates().itertuples(index=False)
    ]

    if agent_key == "firm":
        for side in ("buyer", "seller"):
            offenders += [f"{side} {name}" for name in frame.loc[frame.duplicated(side), side].unique()]

    if offenders:
        raise DuplicateAgentError(offenders)


def assemble_regime(
    records: Iterable[MergerRecord],
    panel: pd.DataFrame | Iterable[tuple],
    coords: Mapping[str, tuple[float, float]],
    regime: str,
    agent_key: str = "record",
) -> tuple[Market, MatchList]:
    """Build a regime's Market and observed MatchList from parsed inputs.

    Args:
        records: Merger records of the regime
        panel: Firm-year characteristics, a panel_frame or PANEL_COLUMNS tuples
        coords: Country -> capital coordinates
        regime: Regime label
        agent_key: "record" gives every record its own agents; "firm" also
            rejects a firm name repeated on one side

    Raises:
        ConfigurationError: Unknown regime or agent_key
        InvalidFormatError: Record year outside the regime, or panel errors
        DuplicateAgentError: Repeated record ids or (seller, buyer, year) triples
        UnresolvableFirmError: Participants absent from the panel up to their merger year
        MissingCoordinatesError: Countries absent from coords
    """
    if agent_key not in AGENT_KEYS:
        raise ConfigurationError(f"agent_key must be one of {AGENT_KEYS}, got '{agent_key}'")

    first, last = regime_years(regime)
    records = sorted(records, key=lambda record: record.id)
    panel = panel_frame(panel)
    if not records:
        raise InvalidFormatError(f"Regime '{regime}' has no merger records")

    outside = [f"record {r.id} ({r.year})" for r in records if not first <= r.year <= last]
    if outside:
        raise InvalidFormatError(f"Regime '{regime}' ({first}-{last}) lists out-of-range years: {', '.join(outside)}")

    _check_duplicates(records, agent_key)

    diagnostics = validate_panel(panel, records)
    errors = [d for d in diagnostics if d.is_error]
    if errors:
        raise InvalidFormatError(
            f"Panel has {len(errors)} error(s): " + "; ".join(str(d) for d in errors)
        )
    for diagnostic in diagnostics:
        logger.warning(str(diagnostic))

    resolved = latest_panel_rows(panel, participants_frame(records))
    unresolved = resolved[resolved["panel_year"].isna()]
    if not unresolved.empty:
        raise UnresolvableFirmError(
            [f"{row.name} ({row.year})" for row in unresolved.itertuples(index=False)]
        )

    floor_age = float(resolved["age_years"].min())
    floor_size = float(resolved["size_teu"].min())
    rows = {(row.record_id, row.side): row for row in resolved.itertuples(index=False)}
    earliest = panel.drop_duplicates("key").set_index("key")

    buyers, sellers = [], []
    for record in records:
        seller_row = rows[(record.id, SideEnum.SELLER.value)]
        sellers.append(
            Firm(
                id=f"{record.id}:{SideEnum.SELLER}",
                name=record.seller_name,
                side=SideEnum.SELLER,
                age_raw=float(seller_row.age_years),
                size_raw=float(seller_row.size_teu),
                country=seller_row.country,
            )
        )

        if record.is_consolidation:
            # new entity: regime minimum of age and size
            key = firm_key(record.buyer_name)
            country = earliest.at[key, "country"] if key in earliest.index else seller_row.country
            age, size = floor_age, floor_size
        else:
            buyer_row = rows[(record.id, SideEnum.BUYER.value)]
            country = buyer_row.country
            age, size = float(buyer_row.age_years), float(buyer_row.size_teu)

        buyers.append(
            Firm(
                id=f"{record.id}:{SideEnum.BUYER}",
                name=record.buyer_name,
                side=SideEnum.BUYER,
                age_raw=age,
                size_raw=size,
                country=country,
            )
        )

    market = build_market(buyers, sellers, coords, regime)
    matches = MatchList.from_pairs((i, i) for i in range(len(records)))
    matches.validate_for(market)

    logger.info(
        f"Loaded regime {regime}: {market.size} matched pair(s), "
        f"{sum(r.is_consolidation for r in records)} consolidation(s)"
    )
    return market, matches


def load_regime(
    merger_csv: Path | str,
    panel_csv: Path | str,
    coords_csv: Path | str,
    regime: str,
    agent_key: str = "record",
) -> tuple[Market, MatchList]:
    """Parse the three CSV inputs and assemble the regime's Market and MatchList."""
    return assemble_regime(
        parse_mergers(merger_csv),
        parse_panel(panel_csv),
        load_coordinates(coords_csv),
        regime,
        agent_key=agent_key,
    )
