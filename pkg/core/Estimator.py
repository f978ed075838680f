"""
Maximum-score estimation of the joint production coefficients.

beta1 is held at 1 and (beta2, beta3) are searched over a box. Because the
score is piecewise constant, the estimate is a set: every point reaching
the best score is a maximizer, and the set is reported through its
per-coordinate brackets.

Two search paths are provided:
- maximize_score_de: independent differential evolution restarts, each on
  its own RNG stream, followed by a lattice refinement of the bracket ends
- maximize_score_grid: exhaustive evaluation of a regular grid (oracle)
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import repeat
import logging
import math
from typing import Any

import numpy as np
from scipy.optimize import differential_evolution

from constants import (
    DEDUP_TOLERANCE,
    DEFAULT_BOUNDS,
    DEFAULT_MAX_GENERATIONS,
    DEFAULT_POPULATION,
    DEFAULT_RUNS,
    GRID_CHUNK_SIZE,
    MAX_ARCHIVE_PER_RUN,
    MAX_GRID_POINTS,
    MIN_POPULATION,
    REFINEMENT_STEP,
)
from core.exceptions import (
    ConfigurationError,
    ConsistencyError,
    GridTooLargeError,
    InputValidationError,
)
from core.Market import Market, MatchList
from core.Score import PairwiseInequalities, ParamVector, max_possible_score, percent_of

logger = logging.getLogger(__name__)

PARAMETER_NAMES = ("beta1", "beta2", "beta3")
FREE_PARAMETERS = ("beta2", "beta3")

Box = tuple[tuple[float, float], tuple[float, float]]


# ============================================================================
# Configuration
# ============================================================================


def _check_box(bounds: Box) -> Box:
    try:
        box = tuple((float(lo), float(hi)) for lo, hi in bounds)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"Invalid bounds {bounds!r}: {e}") from e

    if len(box) != len(FREE_PARAMETERS):
        raise ConfigurationError(f"Expected {len(FREE_PARAMETERS)} intervals, got {len(box)}")
    for lo, hi in box:
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
            raise ConfigurationError(f"Invalid interval [{lo}, {hi}]: lower must be < upper")
    return box


@dataclass(frozen=True, slots=True)
class EstimationConfig:
    """Settings of the maximum-score search.

    Attributes:
        bounds: Search interval for beta2 and beta3
        runs: Number of independent DE restarts
        population: DE population size per restart
        max_generations: Generation cap per restart
        seed: Root seed; restart i uses the i-th spawned stream
        grid_step: When set, the exhaustive grid replaces DE
        workers: Processes used for the restarts
        refine: Extend bracket ends along a lattice of REFINEMENT_STEP
    """

    bounds: Box = (DEFAULT_BOUNDS, DEFAULT_BOUNDS)
    runs: int = DEFAULT_RUNS
    population: int = DEFAULT_POPULATION
    max_generations: int = DEFAULT_MAX_GENERATIONS
    seed: int = 0
    grid_step: float | None = None
    workers: int = 1
    refine: bool = True

    def __post_init__(self):
        object.__setattr__(self, "bounds", _check_box(self.bounds))

        if self.runs < 1:
            raise ConfigurationError(f"runs must be >= 1, got {self.runs}")
        if self.population < MIN_POPULATION:
            raise ConfigurationError(
                f"population must be >= {MIN_POPULATION}, got {self.population}"
            )
        if self.max_generations < 1:
            raise ConfigurationError(f"max_generations must be >= 1, got {self.max_generations}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.seed}")
        if self.grid_step is not None and not self.grid_step > 0:
            raise ConfigurationError(f"grid_step must be > 0, got {self.grid_step}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EstimationConfig:
        defaults = cls()
        return cls(
            bounds=tuple(tuple(interval) for interval in data.get("bounds", defaults.bounds)),
            runs=data.get("runs", defaults.runs),
            population=data.get("population", defaults.population),
            max_generations=data.get("max_generations", defaults.max_generations),
            seed=data.get("seed", defaults.seed),
            grid_step=data.get("grid_step"),
            workers=data.get("workers", defaults.workers),
            refine=data.get("refine", defaults.refine),
        )

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["bounds"] = [list(interval) for interval in self.bounds]
        # Process count does not change results
        data.pop("workers")
        return data


# ============================================================================
# Identified set
# ============================================================================


@dataclass(frozen=True, eq=False)
class IdentifiedSet:
    """Set of score maximizers found by a search.

    Maximizers are stored as an (M, 2) array of (beta2, beta3) with
    beta1 = 1; `maximizers` expands them into ParamVector objects.

    Attributes:
        points: Distinct (beta2, beta3) points reaching max_score
        max_score: Best score found
        n_matches: Number of matched pairs in the data
        bounds: Parameter name -> (lower, upper) over the maximizers
        method: "de" or "grid"
    """

    points: np.ndarray
    max_score: int
    n_matches: int
    bounds: dict[str, tuple[float, float]] = field(default_factory=dict)
    method: str = "de"

    def __post_init__(self):
        points = np.array(self.points, dtype=np.float64, copy=True).reshape(-1, 2)
        if points.shape[0] == 0:
            raise ConsistencyError("Identified set has no maximizer")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

        if not self.bounds:
            bounds = {"beta1": (1.0, 1.0)}
            for k, name in enumerate(FREE_PARAMETERS):
                bounds[name] = (float(points[:, k].min()), float(points[:, k].max()))
            object.__setattr__(self, "bounds", bounds)

        for name, (lo, hi) in self.bounds.items():
            if lo > hi:
                raise ConsistencyError(f"Bracket for {name} is reversed: [{lo}, {hi}]")

    @property
    def maximizers(self) -> tuple[ParamVector, ...]:
        return tuple(ParamVector.from_free(float(b2), float(b3)) for b2, b3 in self.points)

    @property
    def n_maximizers(self) -> int:
        return self.points.shape[0]

    @property
    def percent_correct(self) -> float:
        return percent_of(self.max_score, self.n_matches)

    @property
    def max_possible(self) -> int:
        return max_possible_score(self.n_matches)

    def is_point_identified(self, name: str) -> bool:
        lo, hi = self.bounds[name]
        return lo == hi


# ============================================================================
# Differential evolution
# ============================================================================


class _MaximizerArchive:
    """Keeps the points attaining the best score seen so far."""

    def __init__(self, capacity: int = MAX_ARCHIVE_PER_RUN):
        self.capacity = capacity
        self.best = -1
        self.points: list[np.ndarray] = []
        self.stored = 0
        self.lower = np.full(2, np.inf)
        self.upper = np.full(2, -np.inf)
        self.lower_witness = np.zeros((2, 2))
        self.upper_witness = np.zeros((2, 2))

    def record(self, points: np.ndarray, scores: np.ndarray) -> None:
        top = int(scores.max())
        if top < self.best:
            return
        if top > self.best:
            self.best = top
            self.points.clear()
            self.stored = 0
            self.lower.fill(np.inf)
            self.upper.fill(-np.inf)

        hits = points[scores == self.best]
        for k in range(2):
            low_row = hits[np.argmin(hits[:, k])]
            high_row = hits[np.argmax(hits[:, k])]
            if low_row[k] < self.lower[k]:
                self.lower[k] = low_row[k]
                self.lower_witness[k] = low_row
            if high_row[k] > self.upper[k]:
                self.upper[k] = high_row[k]
                self.upper_witness[k] = high_row

        room = self.capacity - self.stored
        if room > 0:
            kept = hits[:room].copy()
            self.points.append(kept)
            self.stored += kept.shape[0]

    def witnesses(self) -> np.ndarray:
        return np.vstack([self.lower_witness, self.upper_witness])

    def collected(self) -> np.ndarray:
        stacked = [self.witnesses(), *self.points]
        return np.vstack(stacked)


@dataclass
class RestartOutcome:
    """Result of one DE restart."""

    best_score: int
    points: np.ndarray
    evaluations: int


def _run_restart(
    inequalities: PairwiseInequalities, config: EstimationConfig, stream: np.random.SeedSequence
) -> RestartOutcome:
    rng = np.random.default_rng(stream)
    box = np.array(config.bounds)
    init = rng.uniform(box[:, 0], box[:, 1], size=(config.population, 2))
    archive = _MaximizerArchive()
    evaluations = 0

    def objective(x: np.ndarray) -> np.ndarray:
        nonlocal evaluations
        points = np.atleast_2d(x.T)
        scores = inequalities.evaluate_free(points)
        evaluations += points.shape[0]
        archive.record(points, scores)
        return -scores.astype(np.float64)

    differential_evolution(
        objective,
        bounds=config.bounds,
        maxiter=config.max_generations,
        init=init,
        seed=rng,
        polish=False,
        vectorized=True,
        updating="deferred",
    )

    return RestartOutcome(archive.best, archive.collected(), evaluations)


def _deduplicate(points: np.ndarray) -> np.ndarray:
    keys = np.round(points / DEDUP_TOLERANCE)
    _, first = np.unique(keys, axis=0, return_index=True)
    return points[np.sort(first)]


def _refine_brackets(
    inequalities: PairwiseInequalities, points: np.ndarray, best: int, box: Box
) -> np.ndarray:
    """Walk outward from each bracket end on a REFINEMENT_STEP lattice.

    Starting at the maximizer that attains a coordinate's lower (upper)
    bracket end, that coordinate is decreased (increased) step by step,
    the other held fixed, while the score stays at its best.
    """
    additions = []
    for k in range(2):
        lo, hi = box[k]
        for witness, direction in (
            (points[np.argmin(points[:, k])], -1.0),
            (points[np.argmax(points[:, k])], 1.0),
        ):
            start = witness[k]
            room = (start - lo) if direction < 0 else (hi - start)
            n_steps = int(math.floor(room / REFINEMENT_STEP))
            line = start + direction * REFINEMENT_STEP * np.arange(1, n_steps + 1)
            edge = lo if direction < 0 else hi
            if line.size == 0 or line[-1] != edge:
                line = np.append(line, edge)
            line = np.clip(line, lo, hi)

            candidates = np.repeat(witness[None, :], line.size, axis=0)
            candidates[:, k] = line
            hits = inequalities.evaluate_free(candidates) == best
            run = int(np.argmin(hits)) if not hits.all() else hits.size
            if run > 0:
                additions.append(candidates[run - 1])

    if not additions:
        return points
    return np.vstack([points, np.array(additions)])


def _to_identified_set(
    points: np.ndarray, best: int, n_matches: int, method: str
) -> IdentifiedSet:
    return IdentifiedSet(
        points=_deduplicate(points), max_score=best, n_matches=n_matches, method=method
    )


def _assert_rescored(inequalities: PairwiseInequalities, points: np.ndarray, best: int) -> None:
    scores = inequalities.evaluate_free(points)
    if np.any(scores != best):
        raise ConsistencyError(
            f"{int(np.sum(scores != best))} maximizer(s) do not re-score to {best}"
        )


def maximize_score_de(market: Market, matches: MatchList, config: EstimationConfig) -> IdentifiedSet:
    """Maximize the score with independent differential evolution restarts.

    Args:
        market: Regime market
        matches: Observed matching (at least two pairs)
        config: Search settings

    Returns:
        IdentifiedSet of every distinct point found at the best score

    Raises:
        InputValidationError: If fewer than two pairs are matched
        ConsistencyError: If a maximizer fails to re-score
    """
    if len(matches) < 2:
        raise InputValidationError(
            f"Estimation needs at least 2 matched pairs, got {len(matches)}"
        )

    inequalities = PairwiseInequalities(market, matches)
    streams = np.random.SeedSequence(config.seed).spawn(config.runs)

    logger.info(
        f"DE search on {market.regime}: {len(matches)} pairs, {inequalities.max_score} "
        f"inequalities, {config.runs} run(s) x population {config.population}"
    )

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            outcomes = list(executor.map(_run_restart, repeat(inequalities), repeat(config), streams))
    else:
        outcomes = [_run_restart(inequalities, config, stream) for stream in streams]

    best = max(outcome.best_score for outcome in outcomes)
    points = np.vstack([outcome.points for outcome in outcomes if outcome.best_score == best])
    for index, outcome in enumerate(outcomes):
        logger.debug(
            f"Run {index}: best score {outcome.best_score}, {outcome.evaluations} evaluations"
        )

    if config.refine:
        points = _refine_brackets(inequalities, points, best, config.bounds)

    _assert_rescored(inequalities, points, best)
    identified = _to_identified_set(points, best, len(matches), method="de")

    logger.info(
        f"DE search on {market.regime}: max score {best}/{inequalities.max_score}, "
        f"{identified.n_maximizers} distinct maximizer(s)"
    )
    return identified


# ============================================================================
# Grid oracle
# ============================================================================


def grid_axis(lower: float, upper: float, step: float) -> np.ndarray:
    """Regular axis from lower to upper; the last point is upper itself."""
    count = math.ceil(round((upper - lower) / step, 9)) + 1
    return np.minimum(lower + step * np.arange(count), upper)


def maximize_score_grid(
    market: Market, matches: MatchList, bounds: Box, grid_step: float
) -> IdentifiedSet:
    """Score every point of a regular grid and keep all maximizers.

    Raises:
        ConfigurationError: If grid_step is not positive
        GridTooLargeError: If the grid holds more than MAX_GRID_POINTS points
        InputValidationError: If fewer than two pairs are matched
    """
    box = _check_box(bounds)
    if not grid_step > 0:
        raise ConfigurationError(f"grid_step must be > 0, got {grid_step}")
    if len(matches) < 2:
        raise InputValidationError(
            f"Estimation needs at least 2 matched pairs, got {len(matches)}"
        )

    counts = [math.ceil(round((hi - lo) / grid_step, 9)) + 1 for lo, hi in box]
    total = counts[0] * counts[1]
    if total > MAX_GRID_POINTS:
        raise GridTooLargeError(
            f"Grid of {counts[0]} x {counts[1]} = {total:,} points exceeds "
            f"the limit of {MAX_GRID_POINTS:,}; increase grid_step"
        )

    inequalities = PairwiseInequalities(market, matches)
    axis2 = grid_axis(*box[0], grid_step)
    axis3 = grid_axis(*box[1], grid_step)

    logger.info(f"Grid search on {market.regime}: {total:,} points, step {grid_step}")

    best = -1
    found: list[np.ndarray] = []
    flat = np.arange(total)
    for start in range(0, total, GRID_CHUNK_SIZE):
        index = flat[start : start + GRID_CHUNK_SIZE]
        chunk = np.column_stack([axis2[index // axis3.size], axis3[index % axis3.size]])
        scores = inequalities.evaluate_free(chunk)
        top = int(scores.max())
        if top > best:
            best = top
            found.clear()
        if top == best:
            found.append(chunk[scores == best])

    points = np.vstack(found)
    identified = _to_identified_set(points, best, len(matches), method="grid")

    logger.info(
        f"Grid search on {market.regime}: max score {best}/{inequalities.max_score}, "
        f"{identified.n_maximizers} maximizer(s)"
    )
    return identified


# ============================================================================
# Report
# ============================================================================


@dataclass(frozen=True)
class FitReport:
    """Bracket report of an identified set.

    Attributes:
        regime: Regime label
        method: Search path that produced the set
        brackets: Parameter name -> (lower, upper)
        point_identified: Parameter name -> lower == upper
        max_score: Best score
        max_possible: Number of inequalities
        n_matches: Matched pairs in the data
        n_maximizers: Distinct maximizers in the set
        percent_correct: max_score / max_possible
    """

    regime: str
    method: str
    brackets: dict[str, tuple[float, float]]
    point_identified: dict[str, bool]
    max_score: int
    max_possible: int
    n_matches: int
    n_maximizers: int
    percent_correct: float

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["brackets"] = {name: list(bracket) for name, bracket in self.brackets.items()}
        return data


def fit_report(market: Market, matches: MatchList, identified: IdentifiedSet) -> FitReport:
    """Summarize an identified set as per-coordinate brackets and fit.

    Every maximizer is re-scored; they must all agree on max_score.

    Raises:
        ConsistencyError: If maximizers disagree on the score
    """
    inequalities = PairwiseInequalities(market, matches)
    scores = inequalities.evaluate_free(identified.points)
    distinct = sorted({int(s) for s in scores})

    if distinct != [identified.max_score]:
        raise ConsistencyError(
            f"Maximizers re-score to {distinct}, expected {identified.max_score}"
        )

    return FitReport(
        regime=market.regime,
        method=identified.method,
        brackets=dict(identified.bounds),
        point_identified={name: identified.is_point_identified(name) for name in PARAMETER_NAMES},
        max_score=identified.max_score,
        max_possible=identified.max_possible,
        n_matches=identified.n_matches,
        n_maximizers=identified.n_maximizers,
        percent_correct=identified.percent_correct,
    )
