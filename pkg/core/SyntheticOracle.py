"""
Synthetic markets with known coefficients.

The observed matching of a synthetic market is the assignment-game
equilibrium under the true coefficients, so the estimator can be checked
against a known answer without any proprietary panel.
"""

from __future__ import annotations

from collections.abc import Iterator
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from itertools import repeat
import logging
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from constants import (
    DEFAULT_SHOCK_SD,
    SYNTHETIC_COUNTRIES,
    SYNTHETIC_LATITUDE_RANGE,
    SYNTHETIC_LONGITUDE_RANGE,
    SYNTHETIC_MAX_ATTEMPTS,
    SYNTHETIC_REGIME,
    SYNTHETIC_YEAR,
)
from core.Assignment import ValueMatrix, solve_assignment
from core.enums.MergerTypeEnum import MergerTypeEnum
from core.enums.SideEnum import SideEnum
from core.Estimator import FREE_PARAMETERS, EstimationConfig, maximize_score_de
from core.exceptions import ConfigurationError, InputValidationError, SyntheticGenerationError
from core.File import write_csv_frame
from core.Market import Firm, Market, MatchList, build_market
from core.RegimeLoader import COORDINATE_COLUMNS, MERGER_COLUMNS, PANEL_COLUMNS
from core.Score import ParamVector, joint_production_matrix

logger = logging.getLogger(__name__)

MERGERS_FILE = "mergers.csv"
PANEL_FILE = "panel.csv"
COORDS_FILE = "coords.csv"


def _check_interval(label: str, interval: tuple[float, float]) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in interval)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"{label} must be a (low, high) pair: {e}") from e
    if not (0.0 <= lo <= hi and np.isfinite(hi)):
        raise ConfigurationError(f"{label} must satisfy 0 <= low <= high, got ({lo}, {hi})")
    return lo, hi


# ============================================================================
# Generation settings
# ============================================================================


@dataclass(frozen=True, slots=True)
class SyntheticSpec:
    """Generator settings.

    Attributes:
        n: Buyers (and sellers) in the market
        beta_true: Generating coefficients
        age_dist: Uniform (low, high) for raw ages
        size_dist: Uniform (low, high) for raw sizes
        country_count: Countries firms are spread over
        shock_sd: Standard deviation of the pair shocks
        seed: Root seed
        distance_squared: Coefficient on Distance^2 added to the generating
            values only (misspecification)
    """

    n: int
    beta_true: ParamVector = field(default_factory=ParamVector)
    age_dist: tuple[float, float] = (0.0, 1.0)
    size_dist: tuple[float, float] = (0.0, 1.0)
    country_count: int = SYNTHETIC_COUNTRIES
    shock_sd: float = DEFAULT_SHOCK_SD
    seed: int = 0
    distance_squared: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise ConfigurationError(f"n must be >= 2, got {self.n}")
        if self.country_count < 1:
            raise ConfigurationError(f"country_count must be >= 1, got {self.country_count}")
        if not self.shock_sd >= 0:
            raise ConfigurationError(f"shock_sd must be >= 0, got {self.shock_sd}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.seed}")
        if not np.isfinite(self.distance_squared):
            raise ConfigurationError("distance_squared must be finite")
        object.__setattr__(self, "age_dist", _check_interval("age_dist", self.age_dist))
        object.__setattr__(self, "size_dist", _check_interval("size_dist", self.size_dist))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SyntheticSpec:
        return cls(
            n=data["n"],
            beta_true=ParamVector.from_dict(data.get("beta_true", {})),
            age_dist=tuple(data.get("age_dist", (0.0, 1.0))),
            size_dist=tuple(data.get("size_dist", (0.0, 1.0))),
            country_count=data.get("country_count", SYNTHETIC_COUNTRIES),
            shock_sd=data.get("shock_sd", DEFAULT_SHOCK_SD),
            seed=data.get("seed", 0),
            distance_squared=data.get("distance_squared", 0.0),
        )

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["beta_true"] = self.beta_true.to_dict()
        data["age_dist"] = list(self.age_dist)
        data["size_dist"] = list(self.size_dist)
        return data


@dataclass(frozen=True, eq=False)
class SyntheticInstance:
    """A generated market with its equilibrium, the values behind it and the pair shocks."""

    market: Market
    matches: MatchList
    values: ValueMatrix
    attempt: int
    shocks: np.ndarray


# ============================================================================
# Generation
# ============================================================================


def generating_values(
    market: Market,
    beta: ParamVector,
    shocks: np.ndarray | None = None,
    distance_squared: float = 0.0,
) -> ValueMatrix:
    """Pair values used to draw the observed matching."""
    values = joint_production_matrix(market, beta, shocks)
    if distance_squared:
        values = values + distance_squared * market.distance**2
    return ValueMatrix(values=values)


def _draw_market(spec: SyntheticSpec, rng: np.random.Generator) -> Market:
    n = spec.n
    ages = rng.uniform(*spec.age_dist, size=2 * n)
    sizes = rng.uniform(*spec.size_dist, size=2 * n)
    country_of = rng.integers(0, spec.country_count, size=2 * n)

    codes = [f"C{k:02d}" for k in range(spec.country_count)]
    coords = {
        code: (
            float(rng.uniform(*SYNTHETIC_LATITUDE_RANGE)),
            float(rng.uniform(*SYNTHETIC_LONGITUDE_RANGE)),
        )
        for code in codes
    }

    def firm(index: int, side: SideEnum) -> Firm:
        prefix = "B" if side is SideEnum.BUYER else "S"
        k = index if side is SideEnum.BUYER else index - n
        return Firm(
            id=f"{prefix}{k:03d}",
            name=f"{prefix}{k:03d}",
            side=side,
            age_raw=float(ages[index]),
            size_raw=float(sizes[index]),
            country=codes[country_of[index]],
        )

    buyers = [firm(i, SideEnum.BUYER) for i in range(n)]
    sellers = [firm(n + j, SideEnum.SELLER) for j in range(n)]
    return build_market(buyers, sellers, coords, SYNTHETIC_REGIME)


def _draw_instances(spec: SyntheticSpec) -> Iterator[SyntheticInstance]:
    """Instances with a non-empty equilibrium, one per attempt stream.

    Attempt k uses the k-th stream spawned from spec.seed; an empty
    equilibrium matching moves on to the next attempt.
    """
    streams = np.random.SeedSequence(spec.seed).spawn(SYNTHETIC_MAX_ATTEMPTS)

    for attempt, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        market = _draw_market(spec, rng)
        shocks = spec.shock_sd * rng.standard_normal(size=(spec.n, spec.n))
        values = generating_values(market, spec.beta_true, shocks, spec.distance_squared)
        result = solve_assignment(values)

        if result.matching:
            logger.debug(
                f"Synthetic market n={spec.n} seed={spec.seed}: "
                f"{len(result.matching)} pair(s) on attempt {attempt}"
            )
            yield SyntheticInstance(market, result.as_match_list(), values, attempt, shocks)
            continue

        logger.warning(
            f"Synthetic draw {attempt} (seed {spec.seed}) has an empty equilibrium, redrawing"
        )


def generate_instance(spec: SyntheticSpec) -> SyntheticInstance:
    """Draw a market and its equilibrium matching.

    Raises:
        SyntheticGenerationError: If every attempt yields an empty matching
    """
    instance = next(_draw_instances(spec), None)
    if instance is None:
        raise SyntheticGenerationError(
            f"No non-empty equilibrium in {SYNTHETIC_MAX_ATTEMPTS} attempts (seed {spec.seed})"
        )
    return instance


def generate_market(spec: SyntheticSpec) -> tuple[Market, MatchList]:
    """Synthetic Market and its observed (equilibrium) MatchList."""
    instance = generate_instance(spec)
    return instance.market, instance.matches


def matched_market(market: Market, matches: MatchList) -> Market:
    """Market of the matched agents only, renormalized from their raw values.

    Pair k is buyer k with seller k. This is the market the regime loader
    builds from a fixture written for these matches.
    """
    buyers = [market.buyers[b] for b in matches.buyer_indices]
    sellers = [market.sellers[s] for s in matches.seller_indices]
    coords = {firm.country: (firm.capital_lat, firm.capital_lon) for firm in (*buyers, *sellers)}
    return build_market(buyers, sellers, coords, SYNTHETIC_REGIME)


def _closed_instance(instance: SyntheticInstance, spec: SyntheticSpec) -> SyntheticInstance | None:
    """Restrict an instance to its matched pairs until they are the whole equilibrium.

    Renormalizing over fewer agents moves the pair values, so the restriction
    repeats on each new equilibrium. None when no pair survives.
    """
    market, matches, shocks = instance.market, instance.matches, instance.shocks

    for _ in range(2 * spec.n):
        if len(matches) == 0:
            return None

        shocks = shocks[np.ix_(matches.buyer_indices, matches.seller_indices)]
        market = matched_market(market, matches)
        values = generating_values(market, spec.beta_true, shocks, spec.distance_squared)
        matches = solve_assignment(values).as_match_list()

        diagonal = MatchList.from_pairs((k, k) for k in range(market.size))
        if matches.as_set() == diagonal.as_set():
            return SyntheticInstance(market, diagonal, values, instance.attempt, shocks)

    return None


def generate_fixture(spec: SyntheticSpec) -> SyntheticInstance:
    """Draw a market whose matched pairs alone form a market with the same equilibrium.

    The returned market holds only matched agents and its matching is the
    full diagonal, so a fixture written from it loads back with its observed
    matching as the equilibrium under spec.beta_true and the same shocks.

    Raises:
        SyntheticGenerationError: If no attempt leaves a matched pair
    """
    for instance in _draw_instances(spec):
        closed = _closed_instance(instance, spec)
        if closed is not None:
            logger.debug(
                f"Synthetic fixture seed={spec.seed}: {len(closed.matches)} of "
                f"{len(instance.matches)} pair(s) kept"
            )
            return closed
        logger.warning(f"Synthetic draw {instance.attempt} (seed {spec.seed}) keeps no pair, redrawing")

    raise SyntheticGenerationError(
        f"No fixture market in {SYNTHETIC_MAX_ATTEMPTS} attempts (seed {spec.seed})"
    )
    return instance.market, instance.matches


# ============================================================================
# Recovery experiment
# ============================================================================


@dataclass(frozen=True, slots=True)
class TrialOutcome:
    """One recovery trial.

    Attributes:
        seed: Seed of the trial's market and search
        n_matches: Observed pairs
        max_score: Best score found (None when skipped)
        brackets: Parameter name -> (lower, upper), empty when skipped
        recovered: Every maximizer has the true signs
        skipped: Fewer than two observed pairs, nothing to estimate
    """

    seed: int
    n_matches: int
    max_score: int | None
    brackets: dict[str, tuple[float, float]]
    recovered: bool
    skipped: bool = False


@dataclass(frozen=True)
class RecoverySummary:
    """Aggregate of a recovery experiment over trials."""

    spec: SyntheticSpec
    trials: tuple[TrialOutcome, ...]

    @property
    def evaluated(self) -> tuple[TrialOutcome, ...]:
        return tuple(trial for trial in self.trials if not trial.skipped)

    @property
    def recovery_fraction(self) -> float:
        """Share of evaluated trials that recovered both signs (0 if none ran)."""
        evaluated = self.evaluated
        if not evaluated:
            return 0.0
        return sum(trial.recovered for trial in evaluated) / len(evaluated)

    @property
    def median_widths(self) -> dict[str, float]:
        evaluated = self.evaluated
        if not evaluated:
            return {name: float("nan") for name in FREE_PARAMETERS}
        return {
            name: float(np.median([t.brackets[name][1] - t.brackets[name][0] for t in evaluated]))
            for name in FREE_PARAMETERS
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "spec": self.spec.to_dict(),
            "n_trials": len(self.trials),
            "n_evaluated": len(self.evaluated),
            "recovery_fraction": self.recovery_fraction,
            "median_widths": self.median_widths,
            "trials": [
                {
                    "seed": t.seed,
                    "n_matches": t.n_matches,
                    "max_score": t.max_score,
                    "brackets": {name: list(b) for name, b in t.brackets.items()},
                    "recovered": t.recovered,
                    "skipped": t.skipped,
                }
                for t in self.trials
            ],
        }


def trial_seed(seed: int, trial: int) -> int:
    """Seed of one trial, derived from the root seed and the trial index."""
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])


def signs_recovered(brackets: dict[str, tuple[float, float]], beta_true: ParamVector) -> bool:
    """True when each non-zero true coefficient has its sign across the whole bracket."""
    for name in FREE_PARAMETERS:
        truth = getattr(beta_true, name)
        lo, hi = brackets[name]
        if truth > 0 and not lo > 0:
            return False
        if truth < 0 and not hi < 0:
            return False
    return True


def _run_trial(spec: SyntheticSpec, config: EstimationConfig, trial: int) -> TrialOutcome:
    seed = trial_seed(spec.seed, trial)
    market, matches = generate_market(replace(spec, seed=seed))

    try:
        identified = maximize_score_de(market, matches, replace(config, seed=seed, workers=1))
    except InputValidationError as e:
        logger.warning(f"Trial {trial} skipped: {e}")
        return TrialOutcome(seed, len(matches), None, {}, recovered=False, skipped=True)

    brackets = {name: identified.bounds[name] for name in FREE_PARAMETERS}
    return TrialOutcome(
        seed=seed,
        n_matches=len(matches),
        max_score=identified.max_score,
        brackets=brackets,
        recovered=signs_recovered(brackets, spec.beta_true),
    )


def recovery_experiment(
    spec: SyntheticSpec,
    trials: int,
    config: EstimationConfig | None = None,
    workers: int = 1,
) -> RecoverySummary:
    """Generate and estimate `trials` independent markets.

    Trial t draws its market and runs its search from trial_seed(spec.seed, t),
    so two experiments differing only in shock_sd see the same characteristics.

    Raises:
        ConfigurationError: If trials < 1
    """
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")
    config = config or EstimationConfig()

    logger.info(
        f"Recovery experiment: {trials} trial(s), n={spec.n}, beta {spec.beta_true}, "
        f"shock sd {spec.shock_sd}"
    )

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(_run_trial, repeat(spec), repeat(config), range(trials)))
    else:
        outcomes = [_run_trial(spec, config, trial) for trial in range(trials)]

    summary = RecoverySummary(spec=spec, trials=tuple(outcomes))
    logger.info(f"Recovery experiment: sign recovery {summary.recovery_fraction:.3f}")
    return summary


# ============================================================================
# Fixture persistence
# ============================================================================


def write_fixture(
    market: Market, matches: MatchList, directory: Path | str
) -> tuple[Market, MatchList]:
    """Write the matched sub-market in the regime CSV formats.

    Record k pairs the k-th matched buyer with its seller. Raw values are
    written with repr so they parse back exactly. Pass a generate_fixture
    instance to get a fixture whose observed matching is its own equilibrium.

    Returns:
        The matched sub-market rebuilt from the raw values and its
        diagonal MatchList, i.e. what the regime loader reads back
    """
    if len(matches) < 1:
        raise InputValidationError("Cannot write a fixture without matched pairs")
    matches.validate_for(market)

    directory = Path(directory)
    sub_market = matched_market(market, matches)
    firms = (*sub_market.buyers, *sub_market.sellers)

    mergers = pd.DataFrame(
        {
            "id": range(1, sub_market.size + 1),
            "seller": [firm.name for firm in sub_market.sellers],
            "buyer": [firm.name for firm in sub_market.buyers],
            "year": SYNTHETIC_YEAR,
            "type": MergerTypeEnum.MERGER.value,
        },
        columns=list(MERGER_COLUMNS),
    )
    panel = pd.DataFrame(
        {
            "firm": [firm.name for firm in firms],
            "year": SYNTHETIC_YEAR,
            "age_years": [repr(firm.age_raw) for firm in firms],
            "size_teu": [repr(firm.size_raw) for firm in firms],
            "country": [firm.country for firm in firms],
        },
        columns=list(PANEL_COLUMNS),
    )
    coords = (
        pd.DataFrame(
            {
                "country": [firm.country for firm in firms],
                "lat": [repr(firm.capital_lat) for firm in firms],
                "lon": [repr(firm.capital_lon) for firm in firms],
            }
        )
        .drop_duplicates("country")
        .sort_values("country")
    )
    coords.insert(1, "capital", "Capital " + coords["country"])

    write_csv_frame(directory / MERGERS_FILE, mergers)
    write_csv_frame(directory / PANEL_FILE, panel)
    write_csv_frame(directory / COORDS_FILE, coords.loc[:, list(COORDINATE_COLUMNS)])
    logger.info(f"Wrote fixture with {len(matches)} pair(s) to {directory}")

    return sub_market, MatchList.from_pairs((k, k) for k in range(sub_market.size))
