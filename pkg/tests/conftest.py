"""Shared fixtures for the test-suite."""

from collections.abc import Sequence

import numpy as np
import pytest

from core.enums.SideEnum import SideEnum
from core.Estimator import EstimationConfig
from core.Market import Firm, Market, MatchList, build_market
from core.Score import ParamVector
from core.SyntheticOracle import SyntheticSpec, generate_instance

COORDS = {
    "JP": (35.68, 139.69),
    "KR": (37.57, 126.98),
    "DK": (55.68, 12.57),
    "US": (38.91, -77.04),
    "FR": (48.86, 2.35),
}


def make_firm(
    index: int,
    side: SideEnum,
    age: float = 10.0,
    size: float = 1000.0,
    country: str = "JP",
) -> Firm:
    prefix = "B" if side is SideEnum.BUYER else "S"
    return Firm(
        id=f"{prefix}{index}",
        name=f"{prefix}{index}",
        side=side,
        age_raw=age,
        size_raw=size,
        country=country,
    )


def make_market(
    buyer_ages: Sequence[float],
    seller_ages: Sequence[float],
    buyer_sizes: Sequence[float] | None = None,
    seller_sizes: Sequence[float] | None = None,
    buyer_countries: Sequence[str] | None = None,
    seller_countries: Sequence[str] | None = None,
    regime: str = "test",
) -> Market:
    """Build a market from raw characteristics; missing columns default to constants."""
    n = len(buyer_ages)
    buyer_sizes = buyer_sizes if buyer_sizes is not None else [1000.0] * n
    seller_sizes = seller_sizes if seller_sizes is not None else [1000.0] * n
    buyer_countries = buyer_countries or ["JP"] * n
    seller_countries = seller_countries or ["JP"] * n

    buyers = [
        make_firm(i, SideEnum.BUYER, a, z, c)
        for i, (a, z, c) in enumerate(zip(buyer_ages, buyer_sizes, buyer_countries))
    ]
    sellers = [
        make_firm(i, SideEnum.SELLER, a, z, c)
        for i, (a, z, c) in enumerate(zip(seller_ages, seller_sizes, seller_countries))
    ]
    return build_market(buyers, sellers, COORDS, regime)


def direct_market(age_b, age_s, size_b=None, size_s=None, distance=None) -> Market:
    """Market built from already-normalized values."""
    n = len(age_b)
    return Market(
        regime="test",
        buyers=tuple(make_firm(i, SideEnum.BUYER) for i in range(n)),
        sellers=tuple(make_firm(i, SideEnum.SELLER) for i in range(n)),
        age_b=np.asarray(age_b, dtype=np.float64),
        age_s=np.asarray(age_s, dtype=np.float64),
        size_b=np.asarray(size_b if size_b is not None else [1.0] * n, dtype=np.float64),
        size_s=np.asarray(size_s if size_s is not None else [1.0] * n, dtype=np.float64),
        distance=np.asarray(distance if distance is not None else np.ones((n, n)), dtype=np.float64),
    )


def diagonal(n: int) -> MatchList:
    return MatchList.from_pairs((i, i) for i in range(n))


def random_market(rng: np.random.Generator, n: int, countries: Sequence[str] = tuple(COORDS)) -> Market:
    return make_market(
        buyer_ages=rng.uniform(0, 50, n),
        seller_ages=rng.uniform(0, 50, n),
        buyer_sizes=rng.uniform(0, 1e5, n),
        seller_sizes=rng.uniform(0, 1e5, n),
        buyer_countries=list(rng.choice(countries, n)),
        seller_countries=list(rng.choice(countries, n)),
    )


@pytest.fixture
def coords() -> dict[str, tuple[float, float]]:
    return dict(COORDS)


@pytest.fixture
def assortative_market() -> Market:
    """Two pairs matched on age: (old, old) and (young, young)."""
    return make_market(buyer_ages=[20.0, 10.0], seller_ages=[20.0, 10.0])


@pytest.fixture
def fast_config() -> EstimationConfig:
    return EstimationConfig(runs=3, population=30, max_generations=30, seed=11)


@pytest.fixture
def noiseless_instance():
    """Synthetic market whose observed matching is the deterministic optimum."""
    spec = SyntheticSpec(n=8, beta_true=ParamVector(1.0, 5.0, -2.0), shock_sd=0.0, seed=5)
    return spec, generate_instance(spec)
