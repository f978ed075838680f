"""
Joint production and the matching maximum-score objective.

The score of a parameter vector counts the unordered pairs of matched
pairs {(b, s), (b', s')} whose observed assignment is not beaten by the
swap (b, s'), (b', s):

    f(b, s) + f(b', s') >= f(b, s') + f(b', s)

Because f is linear in beta, each inequality reduces to D . beta >= 0 for
a difference vector D that depends on the data only. PairwiseInequalities
precomputes these vectors so that whole populations of parameter
vectors can be scored with one matrix product.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
import logging
import math
from typing import Any

import numpy as np

from constants import TIE_TOLERANCE
from core.exceptions import ConfigurationError, InputValidationError
from core.Market import Market, MatchList

logger = logging.getLogger(__name__)


# ============================================================================
# Parameters
# ============================================================================


@dataclass(frozen=True, slots=True)
class ParamVector:
    """Joint production coefficients.

    Attributes:
        beta1: Coefficient on Age_b * Age_s (fixed to 1 for estimation)
        beta2: Coefficient on Size_b * Size_s
        beta3: Coefficient on Distance_bs
    """

    beta1: float = 1.0
    beta2: float = 0.0
    beta3: float = 0.0

    def __post_init__(self):
        values = (float(self.beta1), float(self.beta2), float(self.beta3))
        if not all(math.isfinite(v) for v in values):
            raise ConfigurationError(f"Parameter vector must be finite, got {values}")
        object.__setattr__(self, "beta1", values[0])
        object.__setattr__(self, "beta2", values[1])
        object.__setattr__(self, "beta3", values[2])

    @classmethod
    def from_free(cls, beta2: float, beta3: float) -> ParamVector:
        """Build a vector with beta1 held at its normalized value of 1."""
        return cls(1.0, beta2, beta3)

    @classmethod
    def from_string(cls, text: str) -> ParamVector:
        """Parse "b1,b2,b3" (or "b2,b3" with beta1 = 1).

        Raises:
            ConfigurationError: If text does not hold two or three numbers
        """
        try:
            parts = [float(part) for part in text.split(",")]
        except ValueError as e:
            raise ConfigurationError(f"Invalid parameter vector '{text}': {e}") from e

        if len(parts) == 2:
            return cls.from_free(*parts)
        if len(parts) == 3:
            return cls(*parts)
        raise ConfigurationError(
            f"Invalid parameter vector '{text}': expected 2 or 3 values, got {len(parts)}"
        )

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ParamVector:
        return cls(
            beta1=data.get("beta1", 1.0), beta2=data.get("beta2", 0.0), beta3=data.get("beta3", 0.0)
        )

    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    def as_array(self) -> np.ndarray:
        return np.array([self.beta1, self.beta2, self.beta3], dtype=np.float64)

    def scaled(self, factor: float) -> ParamVector:
        return ParamVector(factor * self.beta1, factor * self.beta2, factor * self.beta3)

    def __str__(self) -> str:
        return f"({self.beta1:g}, {self.beta2:g}, {self.beta3:g})"


# ============================================================================
# Joint production
# ============================================================================


def joint_production(
    buyer: int, seller: int, market: Market, beta: ParamVector, shock: float = 0.0
) -> float:
    """Surplus of merging buyer with seller.

    Returns:
        beta1 * Age_b * Age_s + beta2 * Size_b * Size_s + beta3 * Distance_bs + shock
    """
    return (
        beta.beta1 * market.age_b[buyer] * market.age_s[seller]
        + beta.beta2 * market.size_b[buyer] * market.size_s[seller]
        + beta.beta3 * market.distance[buyer, seller]
        + shock
    )


def joint_production_matrix(
    market: Market, beta: ParamVector, shocks: np.ndarray | None = None
) -> np.ndarray:
    """Joint production for every buyer-seller pair as an N x N matrix."""
    values = np.tensordot(beta.as_array(), market.features, axes=1)
    if shocks is not None:
        values = values + np.asarray(shocks, dtype=np.float64)
    return values


# ============================================================================
# Pairwise inequalities
# ============================================================================


def max_possible_score(n_matches: int) -> int:
    """Number of unordered pairs of matched pairs."""
    return n_matches * (n_matches - 1) // 2


class PairwiseInequalities:
    """Difference vectors of every pairwise-stability inequality.

    Row k of `differences` holds, for the k-th unordered pair of matched
    pairs, the feature vector X(b,s) + X(b',s') - X(b,s') - X(b',s).
    """

    def __init__(self, market: Market, matches: MatchList):
        matches.validate_for(market)

        self.n_matches = len(matches)
        buyers = matches.buyer_indices
        sellers = matches.seller_indices
        first, second = np.triu_indices(self.n_matches, k=1)

        features = market.features
        b, s = buyers[first], sellers[first]
        b2, s2 = buyers[second], sellers[second]

        # (P, 3)
        self.differences = (
            features[:, b, s] + features[:, b2, s2] - features[:, b, s2] - features[:, b2, s]
        ).T
        self._magnitudes = np.abs(self.differences)

    @property
    def max_score(self) -> int:
        return self.differences.shape[0]

    def satisfied(self, betas: np.ndarray) -> np.ndarray:
        """Which inequalities hold for each parameter vector.

        Args:
            betas: Array of shape (3,) or (S, 3)

        Returns:
            Boolean array of shape (P,) or (P, S)
        """
        betas = np.asarray(betas, dtype=np.float64)
        margin = self.differences @ betas.T
        slack = TIE_TOLERANCE * (self._magnitudes @ np.abs(betas).T)
        return margin >= -slack

    def evaluate(self, betas: np.ndarray) -> np.ndarray:
        """Score a batch of full parameter vectors of shape (S, 3)."""
        return self.satisfied(np.atleast_2d(betas)).sum(axis=0)

    def evaluate_free(self, free: np.ndarray) -> np.ndarray:
        """Score a batch of (beta2, beta3) points of shape (S, 2) with beta1 = 1."""
        free = np.atleast_2d(np.asarray(free, dtype=np.float64))
        betas = np.column_stack([np.ones(free.shape[0]), free])
        return self.evaluate(betas)


# ============================================================================
# Objective
# ============================================================================


def score(market: Market, matches: MatchList, beta: ParamVector) -> int:
    """Count satisfied pairwise-stability inequalities.

    Ties count as satisfied. With fewer than two matched pairs the
    objective is vacuous and the score is 0.

    Returns:
        Integer in [0, |matches| * (|matches| - 1) / 2]
    """
    if len(matches) < 2:
        logger.warning(
            f"Score objective is vacuous for market {market.regime}: "
            f"{len(matches)} matched pair(s)"
        )
        return 0

    inequalities = PairwiseInequalities(market, matches)
    return int(inequalities.satisfied(beta.as_array()).sum())


def percent_of(score_value: int, n_matches: int) -> float:
    """Share of satisfied inequalities among all |matches| choose 2.

    Raises:
        InputValidationError: If n_matches < 2
    """
    if n_matches < 2:
        raise InputValidationError(
            f"Percent of correct matches is undefined for {n_matches} matched pair(s)"
        )
    return score_value / max_possible_score(n_matches)


def percent_correct(market: Market, matches: MatchList, beta: ParamVector) -> float:
    """Fit statistic: score divided by its maximum possible value.

    Raises:
        InputValidationError: If fewer than two pairs are matched
    """
    if len(matches) < 2:
        raise InputValidationError(
            f"Percent of correct matches is undefined for {len(matches)} matched pair(s)"
        )
    return percent_of(score(market, matches, beta), len(matches))
