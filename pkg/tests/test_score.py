from fractions import Fraction
import itertools

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from core.exceptions import ConfigurationError, InputValidationError
from core.Market import Market, MatchList
from core.Score import (
    PairwiseInequalities,
    ParamVector,
    joint_production,
    joint_production_matrix,
    max_possible_score,
    percent_correct,
    percent_of,
    score,
)
from tests.conftest import diagonal, direct_market, make_market, random_market


def recount(market: Market, matches: MatchList, beta: ParamVector) -> int:
    total = 0
    for (b, s), (b2, s2) in itertools.combinations(list(matches), 2):
        observed = joint_production(b, s, market, beta) + joint_production(b2, s2, market, beta)
        swapped = joint_production(b, s2, market, beta) + joint_production(b2, s, market, beta)
        total += observed >= swapped
    return total


# ========================================
# ParamVector
# ========================================


def test_param_vector_from_string():
    assert ParamVector.from_string("1,5,-2") == ParamVector(1.0, 5.0, -2.0)
    assert ParamVector.from_string("9.858,-1.55") == ParamVector(1.0, 9.858, -1.55)


@pytest.mark.parametrize("text", ["", "a,b", "1", "1,2,3,4", "1,nan,2"])
def test_param_vector_from_string_rejects(text):
    with pytest.raises(ConfigurationError):
        ParamVector.from_string(text)


def test_param_vector_dict_and_scaling():
    beta = ParamVector.from_dict({"beta2": 2.5})
    assert beta.to_dict() == {"beta1": 1.0, "beta2": 2.5, "beta3": 0.0}
    assert beta.scaled(2.0) == ParamVector(2.0, 5.0, 0.0)


# ========================================
# Joint production
# ========================================


def test_joint_production_with_floor_distance():
    market = direct_market([1.0], [1.0], distance=[[1e-6]])
    value = joint_production(0, 0, market, ParamVector(1.0, 1.0, -1.0))
    assert value == pytest.approx(1.999999, abs=1e-12)


def test_joint_production_age_term_only():
    market = direct_market([0.5], [0.5], size_b=[0.3], size_s=[0.7], distance=[[0.9]])
    assert joint_production(0, 0, market, ParamVector(1.0, 0.0, 0.0)) == 0.25


def test_joint_production_estimated_coefficients():
    market = direct_market([1.0], [1.0])
    value = joint_production(0, 0, market, ParamVector(1.0, 9.858, -1.550))
    assert value == pytest.approx(9.308, abs=1e-12)


def test_joint_production_adds_shock():
    market = direct_market([0.5], [0.5])
    assert joint_production(0, 0, market, ParamVector(), shock=0.75) == 1.0


def test_joint_production_matrix_matches_pointwise():
    market = random_market(np.random.default_rng(3), 5)
    beta = ParamVector(1.0, 2.0, -3.0)
    shocks = np.random.default_rng(4).normal(size=(5, 5))
    values = joint_production_matrix(market, beta, shocks)
    for b in range(5):
        for s in range(5):
            expected = joint_production(b, s, market, beta, shocks[b, s])
            assert values[b, s] == pytest.approx(expected, abs=1e-12)


# ========================================
# Score
# ========================================


def test_assortative_pair_satisfies_inequality():
    market = direct_market([1.0, 0.5], [1.0, 0.5])
    assert score(market, diagonal(2), ParamVector(1.0, 0.0, 0.0)) == 1


def test_anti_assortative_pair_fails_inequality():
    market = direct_market([1.0, 0.5], [0.5, 1.0])
    assert score(market, diagonal(2), ParamVector(1.0, 0.0, 0.0)) == 0


def test_tie_counts_as_satisfied():
    market = direct_market([0.5, 0.5], [0.5, 0.5])
    assert score(market, diagonal(2), ParamVector(1.0, 0.0, 0.0)) == 1


def test_fewer_than_two_matches_scores_zero():
    market = direct_market([1.0, 0.5], [1.0, 0.5])
    assert score(market, MatchList.from_pairs([(0, 1)]), ParamVector()) == 0
    assert score(market, MatchList(), ParamVector()) == 0


def test_score_bounded_by_max_possible():
    market = random_market(np.random.default_rng(0), 14)
    value = score(market, diagonal(14), ParamVector(1.0, 3.0, -1.0))
    assert 0 <= value <= max_possible_score(14) == 91


def test_score_matches_pairwise_recount():
    rng = np.random.default_rng(21)
    market = random_market(rng, 9)
    matches = MatchList.from_pairs(zip(range(9), rng.permutation(9).tolist()))
    for beta in (ParamVector(1.0, 0.0, 0.0), ParamVector(1.0, -4.0, 2.0), ParamVector(1.0, 7.5, -3.25)):
        assert score(market, matches, beta) == recount(market, matches, beta)


def test_evaluate_free_pins_beta1():
    market = random_market(np.random.default_rng(8), 6)
    inequalities = PairwiseInequalities(market, diagonal(6))
    points = np.array([[2.0, -1.0], [-3.0, 0.5]])
    batch = inequalities.evaluate_free(points)
    expected = [score(market, diagonal(6), ParamVector.from_free(*p)) for p in points]
    assert batch.tolist() == expected


@settings(max_examples=40, deadline=None)
@given(
    st.integers(min_value=0, max_value=2**32 - 1),
    st.sampled_from([0.5, 2.0, 10.0]),
    st.floats(min_value=-10, max_value=10),
    st.floats(min_value=-10, max_value=10),
)
def test_score_is_scale_invariant(seed, factor, beta2, beta3):
    market = random_market(np.random.default_rng(seed), 6)
    beta = ParamVector(1.0, beta2, beta3)
    matches = diagonal(6)
    assert score(market, matches, beta.scaled(factor)) == score(market, matches, beta)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.randoms(use_true_random=False))
def test_score_ignores_pair_order(seed, shuffler):
    market = random_market(np.random.default_rng(seed), 7)
    pairs = list(diagonal(7))
    shuffler.shuffle(pairs)
    beta = ParamVector(1.0, 2.0, -1.0)
    assert score(market, MatchList.from_pairs(pairs), beta) == score(market, diagonal(7), beta)


def test_relabelling_agents_keeps_score():
    market = make_market(
        [5.0, 10.0, 30.0, 12.0],
        [7.0, 1.0, 40.0, 3.0],
        buyer_sizes=[1.0, 9.0, 4.0, 2.0],
        seller_sizes=[8.0, 2.0, 6.0, 5.0],
        buyer_countries=["JP", "KR", "DK", "US"],
        seller_countries=["FR", "JP", "DK", "KR"],
    )
    order = [2, 0, 3, 1]
    permuted = market.subset(order, order)
    beta = ParamVector(1.0, 1.5, -0.5)
    assert score(permuted, diagonal(4), beta) == score(market, diagonal(4), beta)


def count_from_values(values: np.ndarray, matches: MatchList) -> int:
    total = 0
    for (b, s), (b2, s2) in itertools.combinations(list(matches), 2):
        total += values[b, s] + values[b2, s2] >= values[b, s2] + values[b2, s]
    return total


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.integers(min_value=0, max_value=16), min_size=20, max_size=20),
    st.integers(min_value=-1000, max_value=1000),
    st.tuples(*[st.integers(min_value=-5, max_value=5)] * 2),
)
def test_score_ignores_a_constant_added_to_every_pair(eighths, constant, free):
    grid = [k / 8 for k in eighths]
    market = direct_market(grid[0:5], grid[5:10], grid[10:15], grid[15:20])
    beta = ParamVector.from_free(*free)
    shifted = joint_production_matrix(market, beta, np.full((5, 5), float(constant)))
    assert count_from_values(shifted, diagonal(5)) == score(market, diagonal(5), beta)


# ========================================
# Percent of correct matches
# ========================================


def test_max_possible_score():
    assert max_possible_score(14) == 91
    assert max_possible_score(21) == 210
    assert max_possible_score(2) == 1


def test_percent_of_fourteen_matches():
    assert percent_of(91, 14) == 1.0
    assert round(percent_of(84, 14), 3) == 0.923
    assert Fraction(84, max_possible_score(14)) == Fraction(12, 13)


def test_percent_of_twenty_one_matches_is_representable():
    assert round(percent_of(206, 21), 3) == 0.981
    assert Fraction(206, max_possible_score(21)) == Fraction(103, 105)


@pytest.mark.parametrize("n_matches", [0, 1])
def test_percent_of_undefined_below_two(n_matches):
    with pytest.raises(InputValidationError):
        percent_of(0, n_matches)


def test_percent_correct_requires_two_matches():
    market = direct_market([1.0, 0.5], [1.0, 0.5])
    with pytest.raises(InputValidationError):
        percent_correct(market, MatchList.from_pairs([(0, 0)]), ParamVector())
    assert percent_correct(market, diagonal(2), ParamVector()) == 1.0
