"""
Market data model: firms, regimes and observed matchings.

A Market holds one regime's buyers and sellers together with their
characteristics normalized onto [NORMALIZATION_FLOOR, 1] and the
buyer-seller distance matrix. All objects are immutable once built.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field, replace
from functools import cached_property
import logging
import math

import numpy as np

from constants import LATITUDE_RANGE, LONGITUDE_RANGE, NORMALIZATION_FLOOR
from core.enums.SideEnum import SideEnum
from core.exceptions import (
    MarketConstructionError,
    MissingCoordinatesError,
    NormalizationError,
)

logger = logging.getLogger(__name__)


# ============================================================================
# Firm
# ============================================================================


@dataclass(frozen=True, slots=True)
class Firm:
    """A buyer or seller taking part in a regime's merger market.

    Attributes:
        id: Opaque identifier, unique within a market side
        name: Firm name as listed in the merger table
        side: Buyer or seller
        age_raw: Years in the industry
        size_raw: Capacity in TEU
        country: Country code (upper case)
        capital_lat: Latitude of the country's capital, in degrees
        capital_lon: Longitude of the country's capital, in degrees
    """

    id: str
    name: str
    side: SideEnum
    age_raw: float
    size_raw: float
    country: str
    capital_lat: float | None = None
    capital_lon: float | None = None

    def __post_init__(self):
        """Validate characteristics and normalize the country code."""
        object.__setattr__(self, "country", self.country.strip().upper())

        for label, value in (("age_raw", self.age_raw), ("size_raw", self.size_raw)):
            if not math.isfinite(value) or value < 0:
                raise MarketConstructionError(
                    f"Firm '{self.name}': {label} must be finite and non-negative, got {value}"
                )

        if self.capital_lat is not None and not (
            LATITUDE_RANGE[0] <= self.capital_lat <= LATITUDE_RANGE[1]
        ):
            raise MarketConstructionError(
                f"Firm '{self.name}': latitude {self.capital_lat} out of range"
            )

        if self.capital_lon is not None and not (
            LONGITUDE_RANGE[0] <= self.capital_lon <= LONGITUDE_RANGE[1]
        ):
            raise MarketConstructionError(
                f"Firm '{self.name}': longitude {self.capital_lon} out of range"
            )

    @property
    def has_coordinates(self) -> bool:
        return self.capital_lat is not None and self.capital_lon is not None

    def with_coordinates(self, lat: float, lon: float) -> Firm:
        """Return a copy located at the given capital coordinates."""
        return replace(self, capital_lat=lat, capital_lon=lon)


# ============================================================================
# Normalization & distance
# ============================================================================


def normalize_vector(raw: Sequence[float] | np.ndarray) -> np.ndarray:
    """Map a non-negative vector affinely onto [NORMALIZATION_FLOOR, 1].

    The minimum maps to NORMALIZATION_FLOOR and the maximum to 1. A vector
    whose entries are all equal maps to 1 everywhere.

    Args:
        raw: Non-empty vector of finite, non-negative values

    Returns:
        Normalized float64 vector of the same length

    Raises:
        NormalizationError: If raw is empty, non-finite or negative
    """
    values = np.asarray(raw, dtype=np.float64).ravel()

    if values.size == 0:
        raise NormalizationError("Cannot normalize an empty vector")
    if not np.all(np.isfinite(values)):
        raise NormalizationError("Cannot normalize a vector with non-finite entries")
    if np.any(values < 0):
        raise NormalizationError("Cannot normalize a vector with negative entries")

    low = values.min()
    high = values.max()

    if high == low:
        return np.ones_like(values)

    scaled = (values - low) / (high - low)
    normalized = NORMALIZATION_FLOOR + (1.0 - NORMALIZATION_FLOOR) * scaled
    normalized = np.clip(normalized, NORMALIZATION_FLOOR, 1.0)
    # Pin the endpoints against rounding
    normalized[values == low] = NORMALIZATION_FLOOR
    normalized[values == high] = 1.0
    return normalized


def pair_distance(buyer: Firm, seller: Firm) -> float:
    """Raw planar distance between the capitals of two firms' countries.

    Distances are Euclidean on (latitude, longitude) in degrees. Firms
    sharing a country are at distance zero, coordinates or not.

    Args:
        buyer: Buyer firm
        seller: Seller firm

    Returns:
        Non-negative distance in degree units

    Raises:
        MarketConstructionError: If a cross-country pair lacks coordinates
    """
    if buyer.country == seller.country:
        return 0.0

    if not (buyer.has_coordinates and seller.has_coordinates):
        raise MarketConstructionError(
            f"Missing capital coordinates for pair '{buyer.name}' ({buyer.country}) / "
            f"'{seller.name}' ({seller.country})"
        )

    return math.hypot(buyer.capital_lat - seller.capital_lat, buyer.capital_lon - seller.capital_lon)


# ============================================================================
# Market
# ============================================================================


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.float64, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Market:
    """One regime's merger market.

    Attributes:
        regime: Regime label, e.g. "1991-2005"
        buyers: Buyer firms, in market order
        sellers: Seller firms, in market order
        age_b: Normalized buyer ages
        age_s: Normalized seller ages
        size_b: Normalized buyer sizes
        size_s: Normalized seller sizes
        distance: Normalized N x N buyer-seller distances
    """

    regime: str
    buyers: tuple[Firm, ...]
    sellers: tuple[Firm, ...]
    age_b: np.ndarray
    age_s: np.ndarray
    size_b: np.ndarray
    size_s: np.ndarray
    distance: np.ndarray

    def __post_init__(self):
        """Freeze arrays and check shape and range invariants."""
        n_buyers, n_sellers = len(self.buyers), len(self.sellers)
        if n_buyers != n_sellers:
            raise MarketConstructionError(
                f"Market '{self.regime}' has {n_buyers} buyers but {n_sellers} sellers"
            )
        if n_buyers == 0:
            raise MarketConstructionError(f"Market '{self.regime}' is empty")

        for name in ("age_b", "age_s", "size_b", "size_s", "distance"):
            array = _frozen(getattr(self, name))
            expected = (n_buyers, n_buyers) if name == "distance" else (n_buyers,)
            if array.shape != expected:
                raise MarketConstructionError(
                    f"Market '{self.regime}': {name} has shape {array.shape}, expected {expected}"
                )
            if np.any(array < NORMALIZATION_FLOOR) or np.any(array > 1.0):
                raise MarketConstructionError(
                    f"Market '{self.regime}': {name} leaves [{NORMALIZATION_FLOOR}, 1]"
                )
            object.__setattr__(self, name, array)

    @property
    def size(self) -> int:
        """Number of buyers (equal to the number of sellers)."""
        return len(self.buyers)

    @cached_property
    def same_country(self) -> np.ndarray:
        """Boolean N x N mask of buyer-seller pairs sharing a country."""
        buyer_countries = np.array([firm.country for firm in self.buyers])
        seller_countries = np.array([firm.country for firm in self.sellers])
        mask = buyer_countries[:, None] == seller_countries[None, :]
        mask.setflags(write=False)
        return mask

    @cached_property
    def features(self) -> np.ndarray:
        """Pair features stacked as (3, N, N): age product, size product, distance."""
        stacked = np.stack(
            [
                np.outer(self.age_b, self.age_s),
                np.outer(self.size_b, self.size_s),
                self.distance,
            ]
        )
        stacked.setflags(write=False)
        return stacked

    def subset(self, buyer_indices: Sequence[int], seller_indices: Sequence[int]) -> Market:
        """Restrict the market to some agents, keeping their normalized values.

        Args:
            buyer_indices: Buyers to keep, in the new order
            seller_indices: Sellers to keep, in the new order

        Returns:
            A smaller Market sharing this market's normalization
        """
        rows = np.asarray(buyer_indices, dtype=np.intp)
        cols = np.asarray(seller_indices, dtype=np.intp)
        return Market(
            regime=self.regime,
            buyers=tuple(self.buyers[i] for i in rows),
            sellers=tuple(self.sellers[j] for j in cols),
            age_b=self.age_b[rows],
            age_s=self.age_s[cols],
            size_b=self.size_b[rows],
            size_s=self.size_s[cols],
            distance=self.distance[np.ix_(rows, cols)],
        )

    def __repr__(self) -> str:
        return f"<Market {self.regime} n={self.size}>"


# ============================================================================
# MatchList
# ============================================================================


@dataclass(frozen=True, slots=True)
class MatchList:
    """Observed one-to-one matching as (buyer index, seller index) pairs."""

    pairs: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    def __post_init__(self):
        """Normalize pairs to int tuples and enforce one-to-one."""
        pairs = tuple((int(b), int(s)) for b, s in self.pairs)
        object.__setattr__(self, "pairs", pairs)

        buyers = [b for b, _ in pairs]
        sellers = [s for _, s in pairs]
        repeated_buyers = sorted({b for b in buyers if buyers.count(b) > 1})
        repeated_sellers = sorted({s for s in sellers if sellers.count(s) > 1})

        if repeated_buyers or repeated_sellers:
            raise MarketConstructionError(
                f"Match list is not one-to-one: buyers {repeated_buyers}, "
                f"sellers {repeated_sellers} appear more than once"
            )

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> MatchList:
        return cls(tuple(pairs))

    def validate_for(self, market: Market) -> None:
        """Check every index against a market.

        Raises:
            MarketConstructionError: If an index is out of range
        """
        bad = [(b, s) for b, s in self.pairs if not (0 <= b < market.size and 0 <= s < market.size)]
        if bad:
            raise MarketConstructionError(
                f"Match list has indices outside market '{market.regime}': {bad}"
            )

    @property
    def buyer_indices(self) -> np.ndarray:
        return np.array([b for b, _ in self.pairs], dtype=np.intp)

    @property
    def seller_indices(self) -> np.ndarray:
        return np.array([s for _, s in self.pairs], dtype=np.intp)

    def as_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.pairs)


# ============================================================================
# Market construction
# ============================================================================


def build_market(
    buyers: Sequence[Firm],
    sellers: Sequence[Firm],
    coords: Mapping[str, tuple[float, float]],
    regime: str,
) -> Market:
    """Build a normalized Market from raw firms.

    Ages and sizes are normalized on one scale pooled over both sides.
    The distance matrix is normalized over all N x N pairs, so same-country
    pairs sit at NORMALIZATION_FLOOR whenever some cross-country pair exists.

    Args:
        buyers: Buyer firms, in market order
        sellers: Seller firms, in market order
        coords: Country code -> (capital latitude, capital longitude)
        regime: Regime label

    Returns:
        Validated Market

    Raises:
        MarketConstructionError: If the sides differ in length
        MissingCoordinatesError: If a country is absent from coords
    """
    if len(buyers) != len(sellers):
        raise MarketConstructionError(
            f"Regime '{regime}': {len(buyers)} buyers but {len(sellers)} sellers"
        )
    if not buyers:
        raise MarketConstructionError(f"Regime '{regime}': no firms")

    table = {code.strip().upper(): latlon for code, latlon in coords.items()}
    missing = sorted({firm.country for firm in (*buyers, *sellers)} - table.keys())
    if missing:
        raise MissingCoordinatesError(missing)

    located_buyers = tuple(firm.with_coordinates(*table[firm.country]) for firm in buyers)
    located_sellers = tuple(firm.with_coordinates(*table[firm.country]) for firm in sellers)

    n = len(located_buyers)
    ages = normalize_vector([firm.age_raw for firm in (*located_buyers, *located_sellers)])
    sizes = normalize_vector([firm.size_raw for firm in (*located_buyers, *located_sellers)])

    raw_distance = np.array(
        [[pair_distance(b, s) for s in located_sellers] for b in located_buyers],
        dtype=np.float64,
    )
    distance = normalize_vector(raw_distance).reshape(n, n)

    logger.debug(
        f"Built market {regime}: n={n}, "
        f"{int(np.sum(raw_distance == 0.0))} same-country pair(s)"
    )

    return Market(
        regime=regime,
        buyers=located_buyers,
        sellers=located_sellers,
        age_b=ages[:n],
        age_s=ages[n:],
        size_b=sizes[:n],
        size_s=sizes[n:],
        distance=distance,
    )
