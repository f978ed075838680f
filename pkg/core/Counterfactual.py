"""
Merger-prohibition counterfactuals.

For each shock draw, pair values f(b, s) + eps_bs are computed with the
estimated coefficients, same-country pairs are blocked when the
prohibition is active, and the assignment game is solved. The statistics
compare every simulated matching with the observed one.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
import logging
from typing import Any

import numpy as np

from constants import DEFAULT_DRAWS, DEFAULT_SHOCK_SD
from core.Assignment import ValueMatrix, solve_assignment
from core.exceptions import ConfigurationError, InputValidationError
from core.Market import Market, MatchList
from core.Score import ParamVector, joint_production_matrix

logger = logging.getLogger(__name__)

BETA_BOUNDS = ("upper", "lower")


# ============================================================================
# Configuration & results
# ============================================================================


@dataclass(frozen=True, slots=True)
class CounterfactualConfig:
    """Settings of a counterfactual simulation.

    Attributes:
        beta: Joint production coefficients
        draws: Number of shock draws
        shock_sd: Standard deviation of the i.i.d. normal pair shocks
        seed: Root seed; draw d uses the d-th spawned stream
        prohibit_same_country: Block same-country pairs
        drop_same_country_agents: Remove the agents of observed same-country
            pairs from the market instead of only masking pairs
    """

    beta: ParamVector
    draws: int = DEFAULT_DRAWS
    shock_sd: float = DEFAULT_SHOCK_SD
    seed: int = 0
    prohibit_same_country: bool = True
    drop_same_country_agents: bool = False

    def __post_init__(self):
        if self.draws < 1:
            raise ConfigurationError(f"draws must be >= 1, got {self.draws}")
        if not self.shock_sd >= 0:
            raise ConfigurationError(f"shock_sd must be >= 0, got {self.shock_sd}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.seed}")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CounterfactualConfig:
        return cls(
            beta=ParamVector.from_dict(data["beta"]),
            draws=data.get("draws", DEFAULT_DRAWS),
            shock_sd=data.get("shock_sd", DEFAULT_SHOCK_SD),
            seed=data.get("seed", 0),
            prohibit_same_country=data.get("prohibit_same_country", True),
            drop_same_country_agents=data.get("drop_same_country_agents", False),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "beta": self.beta.to_dict(),
            "draws": self.draws,
            "shock_sd": self.shock_sd,
            "seed": self.seed,
            "prohibit_same_country": self.prohibit_same_country,
            "drop_same_country_agents": self.drop_same_country_agents,
        }


@dataclass(frozen=True, slots=True)
class DrawOutcome:
    """Matching summary of a single shock draw.

    Attributes:
        total_matches: Matched pairs in the simulated equilibrium
        same_matches: Simulated pairs identical to an observed pair
        same_country_matches: Simulated pairs whose firms share a country
    """

    total_matches: int
    same_matches: int
    same_country_matches: int


@dataclass(frozen=True)
class CounterfactualStats:
    """Bounds over draws of the simulated-to-observed match ratios.

    Attributes:
        matching_num_data: Observed matched pairs (denominator)
        prop_total: (min, max) over draws of total_matches / data
        prop_same: (min, max) over draws of same_matches / data
        per_draw: Outcome of every draw, in draw order
    """

    matching_num_data: int
    prop_total: tuple[float, float]
    prop_same: tuple[float, float]
    per_draw: tuple[DrawOutcome, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict[str, Any]:
        return {
            "matching_num_data": self.matching_num_data,
            "prop_total": list(self.prop_total),
            "prop_same": list(self.prop_same),
            "per_draw": [
                {
                    "total_matches": draw.total_matches,
                    "same_matches": draw.same_matches,
                    "same_country_matches": draw.same_country_matches,
                }
                for draw in self.per_draw
            ],
        }


def select_beta(brackets: Mapping[str, Any], bound: str = "upper") -> ParamVector:
    """Pick one end of every identified-set bracket.

    Args:
        brackets: Parameter name -> (lower, upper)
        bound: "upper" or "lower"

    Raises:
        ConfigurationError: If bound is unknown or a bracket is missing
    """
    if bound not in BETA_BOUNDS:
        raise ConfigurationError(f"bound must be one of {BETA_BOUNDS}, got '{bound}'")

    side = 1 if bound == "upper" else 0
    try:
        return ParamVector(
            beta1=float(brackets.get("beta1", (1.0, 1.0))[side]),
            beta2=float(brackets["beta2"][side]),
            beta3=float(brackets["beta3"][side]),
        )
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise ConfigurationError(f"Cannot read parameter brackets: {e}") from e


# ============================================================================
# Simulation
# ============================================================================


def counterfactual_values(
    market: Market, beta: ParamVector, shocks: np.ndarray, prohibit: bool
) -> ValueMatrix:
    """Pair values under the shocks, with same-country pairs optionally blocked.

    Raises:
        InputValidationError: If shocks are non-finite or mis-shaped
    """
    shocks = np.asarray(shocks, dtype=np.float64)
    if shocks.shape != (market.size, market.size):
        raise InputValidationError(
            f"Shock matrix has shape {shocks.shape}, expected {(market.size, market.size)}"
        )
    if not np.all(np.isfinite(shocks)):
        raise InputValidationError("Shock matrix has non-finite entries")

    values = joint_production_matrix(market, beta, shocks)
    blocked = market.same_country & prohibit
    return ValueMatrix(values=values, blocked=blocked)


def _drop_same_country_agents(
    market: Market, matches: MatchList
) -> tuple[Market | None, MatchList]:
    """Remove the buyer and seller of every observed same-country pair."""
    dropped = [(b, s) for b, s in matches if market.same_country[b, s]]
    dropped_buyers = {b for b, _ in dropped}
    dropped_sellers = {s for _, s in dropped}

    keep_buyers = np.array([b for b in range(market.size) if b not in dropped_buyers], dtype=np.intp)
    keep_sellers = np.array(
        [s for s in range(market.size) if s not in dropped_sellers], dtype=np.intp
    )

    logger.info(
        f"Dropping {len(dropped)} observed same-country pair(s) from market {market.regime}"
    )

    if keep_buyers.size == 0:
        return None, MatchList()

    buyer_position = {int(b): i for i, b in enumerate(keep_buyers)}
    seller_position = {int(s): j for j, s in enumerate(keep_sellers)}
    remaining = MatchList.from_pairs(
        (buyer_position[b], seller_position[s])
        for b, s in matches
        if b in buyer_position and s in seller_position
    )
    return market.subset(keep_buyers, keep_sellers), remaining


def simulate(market: Market, matches: MatchList, config: CounterfactualConfig) -> CounterfactualStats:
    """Simulate equilibrium matchings over shock draws.

    Args:
        market: Regime market
        matches: Observed matching (at least one pair)
        config: Simulation settings

    Returns:
        CounterfactualStats with (min, max) bounds over draws

    Raises:
        InputValidationError: If matches is empty
        SolverError: If an assignment cannot be solved
    """
    if len(matches) < 1:
        raise InputValidationError("Counterfactual simulation needs at least one observed pair")
    matches.validate_for(market)

    n_data = len(matches)
    sim_market: Market | None = market
    observed = matches

    if config.drop_same_country_agents:
        sim_market, observed = _drop_same_country_agents(market, matches)

    observed_pairs = observed.as_set()
    streams = np.random.SeedSequence(config.seed).spawn(config.draws)
    outcomes: list[DrawOutcome] = []

    logger.info(
        f"Counterfactual on {market.regime}: {config.draws} draw(s), shock sd {config.shock_sd}, "
        f"prohibition {'on' if config.prohibit_same_country else 'off'}"
    )

    for stream in streams:
        if sim_market is None:
            outcomes.append(DrawOutcome(0, 0, 0))
            continue

        rng = np.random.default_rng(stream)
        shocks = rng.normal(0.0, config.shock_sd, size=(sim_market.size, sim_market.size))
        vm = counterfactual_values(sim_market, config.beta, shocks, config.prohibit_same_country)
        result = solve_assignment(vm)

        outcomes.append(
            DrawOutcome(
                total_matches=len(result.matching),
                same_matches=sum(1 for pair in result.matching if pair in observed_pairs),
                same_country_matches=sum(
                    1 for b, s in result.matching if sim_market.same_country[b, s]
                ),
            )
        )

    totals = np.array([o.total_matches for o in outcomes]) / n_data
    sames = np.array([o.same_matches for o in outcomes]) / n_data

    stats = CounterfactualStats(
        matching_num_data=n_data,
        prop_total=(float(totals.min()), float(totals.max())),
        prop_same=(float(sames.min()), float(sames.max())),
        per_draw=tuple(outcomes),
    )

    logger.info(
        f"Counterfactual on {market.regime}: prop total [{stats.prop_total[0]:.3f}, "
        f"{stats.prop_total[1]:.3f}], prop same [{stats.prop_same[0]:.3f}, {stats.prop_same[1]:.3f}]"
    )
    return stats
