"""
Descriptive statistics of a regime's matched agents.

Age and size are summarized over the normalized values of every matched
buyer and seller pooled together, so a regime with N matches reports 2N
observations. Distances are summarized over the N observed pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Any

import numpy as np
import pandas as pd

from core.exceptions import InputValidationError
from core.Market import Market, MatchList, pair_distance

logger = logging.getLogger(__name__)

VARIABLE_LABELS = {
    "age": "Age (normalized)",
    "size": "Size TEU (normalized)",
    "distance": "Distance (normalized)",
    "distance_degrees": "Distance (degrees)",
}

# describe() row -> reported statistic
STATISTICS = {
    "count": "n",
    "mean": "mean",
    "std": "sd",
    "min": "min",
    "25%": "q25",
    "50%": "median",
    "75%": "q75",
    "max": "max",
}


@dataclass(frozen=True)
class RegimeSummary:
    """Summary of one regime.

    Attributes:
        regime: Regime label
        n_matches: Observed pairs
        table: One row per VARIABLE_LABELS key, one column per STATISTICS value;
            sd is the sample standard deviation (NaN with a single observation)
        same_country_pairs: Observed pairs whose firms share a country
    """

    regime: str
    n_matches: int
    table: pd.DataFrame
    same_country_pairs: int

    @property
    def same_country_share(self) -> float:
        return self.same_country_pairs / self.n_matches

    def to_dict(self) -> dict[str, Any]:
        return {
            "regime": self.regime,
            "n_matches": self.n_matches,
            "n_agents": 2 * self.n_matches,
            "same_country_pairs": self.same_country_pairs,
            "same_country_share": self.same_country_share,
            "variables": {
                name: {stat: int(value) if stat == "n" else float(value) for stat, value in row.items()}
                for name, row in self.table.iterrows()
            },
        }


def summarize_regime(market: Market, matches: MatchList) -> RegimeSummary:
    """Descriptive statistics of the matched agents and their pair distances.

    Raises:
        InputValidationError: If matches is empty
        MarketConstructionError: If a pair index is outside the market
    """
    if len(matches) < 1:
        raise InputValidationError("A regime summary needs at least one observed pair")
    matches.validate_for(market)

    buyers, sellers = matches.buyer_indices, matches.seller_indices
    variables = {
        "age": np.concatenate([market.age_b[buyers], market.age_s[sellers]]),
        "size": np.concatenate([market.size_b[buyers], market.size_s[sellers]]),
        "distance": market.distance[buyers, sellers],
        "distance_degrees": [pair_distance(market.buyers[b], market.sellers[s]) for b, s in matches],
    }
    table = (
        pd.DataFrame({name: pd.Series(values, dtype="float64").describe() for name, values in variables.items()})
        .T.loc[:, list(STATISTICS)]
        .rename(columns=STATISTICS)
    )
    same_country = int(market.same_country[buyers, sellers].sum())

    logger.info(
        f"Summary of {market.regime}: {len(matches)} pair(s), "
        f"{same_country} same-country, mean normalized size {table.at['size', 'mean']:.3f}"
    )
    return RegimeSummary(market.regime, len(matches), table, same_country)
