"""
Assignment game solver with equilibrium prices.

Solves max sum f(b, s) m(b, s) over one-to-one partial matchings, where
every agent may stay unmatched at payoff 0 and blocked pairs are excluded
outright. The square assignment is formed by giving each agent a private
zero-value null partner; the shortest augmenting path solver in scipy
handles the 2N x 2N problem. Dual prices are then recovered as shortest
path distances of the difference constraints left by complementary
slackness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations
import logging

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse.csgraph import NegativeCycleError, bellman_ford, csgraph_from_dense

from constants import BRUTE_FORCE_MAX_N, DUAL_TOLERANCE
from core.exceptions import InputValidationError, SolverError
from core.Market import MatchList

logger = logging.getLogger(__name__)


# ============================================================================
# Data Models
# ============================================================================


@dataclass(frozen=True, eq=False)
class ValueMatrix:
    """Pair values of an assignment game.

    Attributes:
        values: N x N joint production values f(b, s)
        blocked: N x N mask of infeasible pairs (never matched)
    """

    values: np.ndarray
    blocked: np.ndarray | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] < 1:
            raise InputValidationError(f"Value matrix must be square and non-empty, got {values.shape}")

        if self.blocked is None:
            blocked = np.zeros(values.shape, dtype=bool)
        else:
            blocked = np.array(self.blocked, dtype=bool, copy=True)
            if blocked.shape != values.shape:
                raise InputValidationError(
                    f"Blocked mask has shape {blocked.shape}, expected {values.shape}"
                )

        bad = ~np.isfinite(values) & ~blocked
        if np.any(bad):
            cells = [tuple(int(i) for i in cell) for cell in np.argwhere(bad)[:5]]
            raise InputValidationError(f"Non-finite value(s) on unblocked pair(s): {cells}")

        values.setflags(write=False)
        blocked.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "blocked", blocked)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def value(self, buyer: int, seller: int) -> float:
        return float(self.values[buyer, seller])


@dataclass(frozen=True, eq=False)
class AssignmentResult:
    """Equilibrium matching of an assignment game.

    Attributes:
        matching: Matched (buyer, seller) pairs, sorted by buyer
        unmatched_buyers: Buyers left alone
        unmatched_sellers: Sellers left alone
        objective: Total value of the matched pairs
        buyer_duals: Buyer payoffs u_b (None when not computed)
        seller_duals: Seller prices p_s (None when not computed)
    """

    matching: tuple[tuple[int, int], ...]
    unmatched_buyers: tuple[int, ...]
    unmatched_sellers: tuple[int, ...]
    objective: float
    buyer_duals: np.ndarray | None = None
    seller_duals: np.ndarray | None = None

    @property
    def has_duals(self) -> bool:
        return self.buyer_duals is not None and self.seller_duals is not None

    @property
    def dual_total(self) -> float:
        """Sum of all buyer payoffs and seller prices."""
        if not self.has_duals:
            raise SolverError("Assignment result carries no dual prices")
        return float(self.buyer_duals.sum() + self.seller_duals.sum())

    def as_match_list(self) -> MatchList:
        return MatchList.from_pairs(self.matching)


@dataclass
class StabilityReport:
    """Outcome of an equilibrium check.

    Attributes:
        violations: Human-readable description of each failed condition
    """

    violations: list[str] = field(default_factory=list)

    @property
    def is_stable(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.is_stable

    def __repr__(self) -> str:
        status = "✅" if self.is_stable else "❌"
        return f"<StabilityReport {status} violations={len(self.violations)}>"


# ============================================================================
# Helpers
# ============================================================================


def _build_result(
    vm: ValueMatrix,
    pairs: list[tuple[int, int]],
    buyer_duals: np.ndarray | None = None,
    seller_duals: np.ndarray | None = None,
) -> AssignmentResult:
    pairs = sorted(pairs)
    matched_buyers = {b for b, _ in pairs}
    matched_sellers = {s for _, s in pairs}
    objective = float(sum(vm.values[b, s] for b, s in pairs))

    return AssignmentResult(
        matching=tuple(pairs),
        unmatched_buyers=tuple(b for b in range(vm.size) if b not in matched_buyers),
        unmatched_sellers=tuple(s for s in range(vm.size) if s not in matched_sellers),
        objective=objective,
        buyer_duals=buyer_duals,
        seller_duals=seller_duals,
    )


def _augmented_costs(vm: ValueMatrix) -> np.ndarray:
    """2N x 2N minimization costs with one private null partner per agent.

    Rows: buyers, then the sellers' null slots.
    Columns: sellers, then the buyers' null slots.
    """
    n = vm.size
    costs = np.full((2 * n, 2 * n), np.inf)
    costs[:n, :n] = np.where(vm.blocked, np.inf, -np.where(vm.blocked, 0.0, vm.values))

    diagonal = np.arange(n)
    costs[diagonal, n + diagonal] = 0.0
    costs[n + diagonal, diagonal] = 0.0
    costs[n:, n:] = 0.0
    return costs


def _recover_prices(vm: ValueMatrix, pairs: list[tuple[int, int]]) -> tuple[np.ndarray, np.ndarray]:
    """Dual prices supporting an optimal matching.

    With u_b eliminated through u_b = f(b, s*) - p_s* on matched pairs, the
    remaining dual conditions are difference constraints on the seller
    prices, p_j - p_i <= w, i.e. an edge i -> j of weight w. Node 0 is a
    virtual seller fixed at price 0. Shortest distances from node 0 satisfy
    every constraint; a negative cycle would mean the matching is not optimal.
    """
    n = vm.size
    values = vm.values
    weights = np.full((n + 1, n + 1), np.inf)

    def add_edge(tail: int, head: int, weight: float) -> None:
        if tail != head and weight < weights[tail, head]:
            weights[tail, head] = weight

    partner = dict(pairs)
    matched_sellers = {s for _, s in pairs}

    for b in range(n):
        feasible = np.flatnonzero(~vm.blocked[b])
        if b in partner:
            s_star = partner[b]
            # u_b >= 0
            add_edge(0, s_star + 1, values[b, s_star])
            # u_b + p_s >= f(b, s)
            for s in feasible:
                add_edge(s + 1, s_star + 1, values[b, s_star] - values[b, s])
        else:
            # u_b = 0, so p_s >= f(b, s)
            for s in feasible:
                add_edge(s + 1, 0, -values[b, s])

    for s in range(n):
        add_edge(s + 1, 0, 0.0)
        if s not in matched_sellers:
            add_edge(0, s + 1, 0.0)

    graph = csgraph_from_dense(weights, null_value=np.inf)
    try:
        distances = bellman_ford(graph, directed=True, indices=0)
    except NegativeCycleError as e:
        raise SolverError(f"No supporting prices: matching is not optimal ({e})") from e

    seller_duals = np.maximum(distances[1:] - distances[0], 0.0)
    buyer_duals = np.zeros(n)
    for b, s in pairs:
        buyer_duals[b] = max(values[b, s] - seller_duals[s], 0.0)

    return buyer_duals, seller_duals


# ============================================================================
# Solvers
# ============================================================================


def solve_assignment(vm: ValueMatrix) -> AssignmentResult:
    """Optimal one-to-one partial matching with equilibrium prices.

    Args:
        vm: Pair values and blocked mask

    Returns:
        AssignmentResult with buyer payoffs and seller prices

    Raises:
        SolverError: If the solver fails or prices cannot be recovered
    """
    n = vm.size
    costs = _augmented_costs(vm)

    try:
        rows, cols = linear_sum_assignment(costs)
    except ValueError as e:
        raise SolverError(f"Assignment solver failed: {e}") from e

    pairs = [(int(r), int(c)) for r, c in zip(rows, cols) if r < n and c < n]

    if any(vm.blocked[b, s] for b, s in pairs):
        raise SolverError("Assignment solver matched a blocked pair")

    buyer_duals, seller_duals = _recover_prices(vm, pairs)
    result = _build_result(vm, pairs, buyer_duals, seller_duals)

    logger.debug(
        f"Solved {n}x{n} assignment: {len(result.matching)} matched, "
        f"objective={result.objective:.6g}"
    )
    return result


def brute_force_assignment(vm: ValueMatrix) -> AssignmentResult:
    """Exhaustive optimum over all partial one-to-one matchings.

    Among optimal matchings the lexicographically smallest sorted pair
    list is returned. No dual prices are produced.

    Raises:
        InputValidationError: If N exceeds BRUTE_FORCE_MAX_N
    """
    n = vm.size
    if n > BRUTE_FORCE_MAX_N:
        raise InputValidationError(
            f"Brute-force assignment is limited to N <= {BRUTE_FORCE_MAX_N}, got N = {n}"
        )

    values = vm.values
    blocked = vm.blocked
    best_objective = 0.0
    best_pairs: list[tuple[int, int]] = []

    for k in range(1, n + 1):
        for buyers in combinations(range(n), k):
            for sellers in permutations(range(n), k):
                if any(blocked[b, s] for b, s in zip(buyers, sellers)):
                    continue
                objective = sum(values[b, s] for b, s in zip(buyers, sellers))
                if objective < best_objective:
                    continue
                pairs = list(zip(buyers, sellers))
                if objective > best_objective or pairs < best_pairs:
                    best_objective = objective
                    best_pairs = pairs

    return _build_result(vm, best_pairs)


# ============================================================================
# Verification
# ============================================================================


def verify_stability(
    vm: ValueMatrix, result: AssignmentResult, tolerance: float = DUAL_TOLERANCE
) -> StabilityReport:
    """Check that a matching and its prices form a stable outcome.

    Passing certifies that no buyer-seller pair could block the matching
    under transferable utility.

    Returns:
        StabilityReport listing every failed condition
    """
    report = StabilityReport()
    n = vm.size
    values = vm.values

    buyers = [b for b, _ in result.matching]
    sellers = [s for _, s in result.matching]
    if len(set(buyers)) != len(buyers) or len(set(sellers)) != len(sellers):
        report.violations.append("matching is not one-to-one")

    out_of_range = [(b, s) for b, s in result.matching if not (0 <= b < n and 0 <= s < n)]
    if out_of_range:
        report.violations.append(f"pairs outside the market: {out_of_range}")
        return report

    for b, s in result.matching:
        if vm.blocked[b, s]:
            report.violations.append(f"blocked pair ({b}, {s}) is matched")

    matched_total = float(sum(values[b, s] for b, s in result.matching if not vm.blocked[b, s]))
    if abs(matched_total - result.objective) > tolerance * max(1.0, abs(matched_total)):
        report.violations.append(
            f"objective {result.objective:.12g} differs from matched total {matched_total:.12g}"
        )

    if not result.has_duals:
        report.violations.append("no dual prices to certify the matching")
        return report

    u = np.asarray(result.buyer_duals, dtype=np.float64)
    p = np.asarray(result.seller_duals, dtype=np.float64)
    if u.shape != (n,) or p.shape != (n,):
        report.violations.append(f"dual vectors have shapes {u.shape}, {p.shape}, expected ({n},)")
        return report

    for b in np.flatnonzero(u < -tolerance):
        report.violations.append(f"buyer {b} payoff {u[b]:.3g} is negative")
    for s in np.flatnonzero(p < -tolerance):
        report.violations.append(f"seller {s} price {p[s]:.3g} is negative")

    surplus = u[:, None] + p[None, :] - np.where(vm.blocked, 0.0, values)
    for b, s in np.argwhere((surplus < -tolerance) & ~vm.blocked):
        report.violations.append(
            f"pair ({b}, {s}) blocks: u + p = {u[b] + p[s]:.6g} < f = {values[b, s]:.6g}"
        )

    for b, s in result.matching:
        if not vm.blocked[b, s] and abs(surplus[b, s]) > tolerance:
            report.violations.append(
                f"matched pair ({b}, {s}) is not tight: u + p - f = {surplus[b, s]:.3g}"
            )

    for b in result.unmatched_buyers:
        if u[b] > tolerance:
            report.violations.append(f"unmatched buyer {b} has payoff {u[b]:.3g}")
    for s in result.unmatched_sellers:
        if p[s] > tolerance:
            report.violations.append(f"unmatched seller {s} has price {p[s]:.3g}")

    return report
