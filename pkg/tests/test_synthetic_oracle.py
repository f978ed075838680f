from dataclasses import replace
import math

import numpy as np
import pytest

from constants import SYNTHETIC_REGIME
from core.Assignment import solve_assignment, verify_stability
from core.Counterfactual import CounterfactualConfig, simulate
from core.Estimator import EstimationConfig
from core.exceptions import ConfigurationError, SyntheticGenerationError
from core.RegimeLoader import load_regime
from core.Score import ParamVector, score
from core.SyntheticOracle import (
    COORDS_FILE,
    MERGERS_FILE,
    PANEL_FILE,
    RecoverySummary,
    SyntheticSpec,
    TrialOutcome,
    generate_fixture,
    generate_instance,
    generate_market,
    generating_values,
    matched_market,
    recovery_experiment,
    signs_recovered,
    trial_seed,
    write_fixture,
)
from tests.conftest import direct_market


# ========================================
# SyntheticSpec
# ========================================


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n": 1},
        {"country_count": 0},
        {"shock_sd": -0.1},
        {"seed": -3},
        {"age_dist": (2.0, 1.0)},
        {"size_dist": (-1.0, 1.0)},
        {"age_dist": (0.0,)},
        {"distance_squared": math.inf},
    ],
)
def test_spec_rejects(kwargs):
    fields = {"n": 5, **kwargs}
    with pytest.raises(ConfigurationError):
        SyntheticSpec(**fields)


def test_spec_dict_round_trip():
    spec = SyntheticSpec(n=6, beta_true=ParamVector(1.0, 5.0, -2.0), age_dist=(1, 50), seed=3)
    assert SyntheticSpec.from_dict(spec.to_dict()) == spec


# ========================================
# Generation
# ========================================


def test_two_firm_market_matches_assortatively():
    market = direct_market([1.0, 0.5], [1.0, 0.5])
    values = generating_values(market, ParamVector(1.0, 0.0, 0.0))
    result = solve_assignment(values)
    assert result.matching == ((0, 0), (1, 1))


def test_distance_squared_enters_generating_values_only():
    market = direct_market([1.0, 0.5], [1.0, 0.5], distance=[[0.5, 1.0], [1.0, 0.5]])
    plain = generating_values(market, ParamVector())
    bent = generating_values(market, ParamVector(), distance_squared=2.0)
    np.testing.assert_allclose(bent.values - plain.values, [[0.5, 2.0], [2.0, 0.5]])


def test_generation_is_deterministic():
    spec = SyntheticSpec(n=7, beta_true=ParamVector(1.0, 5.0, -2.0), seed=42)
    first, second = generate_instance(spec), generate_instance(spec)
    assert first.matches == second.matches
    assert first.attempt == second.attempt
    np.testing.assert_array_equal(first.market.distance, second.market.distance)
    np.testing.assert_array_equal(first.values.values, second.values.values)


def test_seeds_give_different_markets():
    spec = SyntheticSpec(n=7, seed=1)
    first = generate_instance(spec)
    second = generate_instance(replace(spec, seed=2))
    assert not np.array_equal(first.market.age_b, second.market.age_b)


def test_observed_matching_is_an_equilibrium():
    spec = SyntheticSpec(n=9, beta_true=ParamVector(1.0, 2.0, -1.0), shock_sd=0.5, seed=7)
    instance = generate_instance(spec)
    result = solve_assignment(instance.values)
    assert result.as_match_list() == instance.matches
    assert verify_stability(instance.values, result).is_stable


def test_shock_size_does_not_change_the_characteristics():
    spec = SyntheticSpec(n=6, beta_true=ParamVector(1.0, 5.0, -2.0), shock_sd=0.0, seed=9)
    calm, _ = generate_market(spec)
    noisy, _ = generate_market(replace(spec, shock_sd=3.0))
    np.testing.assert_array_equal(calm.age_b, noisy.age_b)
    np.testing.assert_array_equal(calm.size_s, noisy.size_s)
    np.testing.assert_array_equal(calm.distance, noisy.distance)


def test_noiseless_truth_satisfies_every_inequality(noiseless_instance):
    spec, instance = noiseless_instance
    n_matches = len(instance.matches)
    assert score(instance.market, instance.matches, spec.beta_true) == n_matches * (n_matches - 1) // 2


def test_market_without_surplus_cannot_be_generated():
    spec = SyntheticSpec(n=3, beta_true=ParamVector(-1.0, 0.0, 0.0), shock_sd=0.0)
    with pytest.raises(SyntheticGenerationError):
        generate_instance(spec)


# ========================================
# Recovery
# ========================================


def test_trial_seeds_are_distinct_and_stable():
    seeds = [trial_seed(7, trial) for trial in range(20)]
    assert len(set(seeds)) == 20
    assert seeds == [trial_seed(7, trial) for trial in range(20)]


def test_signs_recovered():
    truth = ParamVector(1.0, 5.0, -2.0)
    assert signs_recovered({"beta2": (1.0, 9.0), "beta3": (-4.0, -0.5)}, truth)
    assert not signs_recovered({"beta2": (-0.5, 9.0), "beta3": (-4.0, -0.5)}, truth)
    assert not signs_recovered({"beta2": (1.0, 9.0), "beta3": (-4.0, 0.0)}, truth)


def test_zero_coefficients_are_not_sign_checked():
    assert signs_recovered({"beta2": (-1.0, 1.0), "beta3": (-1.0, 1.0)}, ParamVector(1.0, 0.0, 0.0))


def test_summary_counts_only_evaluated_trials():
    spec = SyntheticSpec(n=4)
    trials = (
        TrialOutcome(1, 4, 6, {"beta2": (1.0, 3.0), "beta3": (-2.0, -1.0)}, recovered=True),
        TrialOutcome(2, 3, 3, {"beta2": (0.0, 1.0), "beta3": (-5.0, 0.0)}, recovered=False),
        TrialOutcome(3, 1, None, {}, recovered=False, skipped=True),
    )
    summary = RecoverySummary(spec, trials)
    assert summary.recovery_fraction == 0.5
    assert summary.median_widths == {"beta2": 1.5, "beta3": 3.0}

    data = summary.to_dict()
    assert data["n_trials"] == 3
    assert data["n_evaluated"] == 2
    assert data["trials"][2]["skipped"] is True


def test_summary_without_evaluated_trials():
    summary = RecoverySummary(SyntheticSpec(n=4), (TrialOutcome(1, 1, None, {}, False, True),))
    assert summary.recovery_fraction == 0.0
    assert all(math.isnan(width) for width in summary.median_widths.values())


def test_recovery_experiment_is_deterministic(fast_config):
    spec = SyntheticSpec(n=6, beta_true=ParamVector(1.0, 5.0, -2.0), shock_sd=0.2, seed=3)
    first = recovery_experiment(spec, trials=2, config=fast_config)
    second = recovery_experiment(spec, trials=2, config=fast_config)
    assert first.to_dict() == second.to_dict()
    assert [t.seed for t in first.trials] == [trial_seed(3, 0), trial_seed(3, 1)]
    for trial in first.evaluated:
        assert trial.recovered == signs_recovered(trial.brackets, spec.beta_true)


def test_recovery_experiment_needs_a_trial():
    with pytest.raises(ConfigurationError):
        recovery_experiment(SyntheticSpec(n=4), trials=0)


@pytest.mark.slow
def test_recovery_experiment_in_parallel_matches_serial():
    spec = SyntheticSpec(n=5, beta_true=ParamVector(1.0, 5.0, -2.0), seed=8)
    config = EstimationConfig(runs=2, population=20, max_generations=10)
    serial = recovery_experiment(spec, trials=3, config=config)
    parallel = recovery_experiment(spec, trials=3, config=config, workers=2)
    assert serial.to_dict() == parallel.to_dict()


# ========================================
# Fixtures
# ========================================


def test_fixture_round_trip(tmp_path):
    spec = SyntheticSpec(n=8, beta_true=ParamVector(1.0, 5.0, -2.0), shock_sd=0.5, seed=13)
    market, matches = generate_market(spec)
    written, written_matches = write_fixture(market, matches, tmp_path)

    loaded, loaded_matches = load_regime(
        tmp_path / MERGERS_FILE, tmp_path / PANEL_FILE, tmp_path / COORDS_FILE, SYNTHETIC_REGIME
    )
    assert loaded.size == written.size == len(matches)
    assert loaded_matches == written_matches
    for name in ("age_b", "age_s", "size_b", "size_s", "distance"):
        np.testing.assert_allclose(getattr(loaded, name), getattr(written, name), rtol=0, atol=1e-12)
    assert [firm.name for firm in loaded.buyers] == [firm.name for firm in written.buyers]
    assert "capital" in (tmp_path / COORDS_FILE).read_text(encoding="utf-8").splitlines()[0]


def test_fixture_market_keeps_only_its_matched_pairs():
    spec = SyntheticSpec(n=8, beta_true=ParamVector(1.0, 5.0, -2.0), shock_sd=0.0, seed=4)
    instance = generate_fixture(spec)
    assert len(instance.matches) == instance.market.size
    assert instance.matches.as_set() == {(k, k) for k in range(instance.market.size)}
    assert instance.shocks.shape == (instance.market.size, instance.market.size)

    result = solve_assignment(instance.values)
    assert result.as_match_list().as_set() == instance.matches.as_set()
    assert verify_stability(instance.values, result).is_stable


def test_matched_market_renormalizes_over_the_kept_agents():
    spec = SyntheticSpec(n=6, beta_true=ParamVector(1.0, 5.0, -2.0), shock_sd=0.0, seed=2)
    instance = generate_instance(spec)
    kept = matched_market(instance.market, instance.matches)
    pooled = np.concatenate([kept.age_b, kept.age_s])
    assert kept.size == len(instance.matches)
    assert pooled.max() == 1.0
    assert [firm.name for firm in kept.buyers] == [
        instance.market.buyers[b].name for b in instance.matches.buyer_indices
    ]


@pytest.mark.parametrize("seed", range(30))
def test_reloaded_fixture_reproduces_its_matching(tmp_path, seed):
    spec = SyntheticSpec(n=8, beta_true=ParamVector(1.0, 5.0, -2.0), shock_sd=0.0, seed=seed)
    instance = generate_fixture(spec)
    write_fixture(instance.market, instance.matches, tmp_path)

    loaded, loaded_matches = load_regime(
        tmp_path / MERGERS_FILE, tmp_path / PANEL_FILE, tmp_path / COORDS_FILE, SYNTHETIC_REGIME
    )
    config = CounterfactualConfig(
        beta=spec.beta_true, draws=1, shock_sd=0.0, prohibit_same_country=False
    )
    stats = simulate(loaded, loaded_matches, config)
    assert stats.prop_same == (1.0, 1.0)
    assert stats.prop_total == (1.0, 1.0)

    n_matches = len(loaded_matches)
    assert score(loaded, loaded_matches, spec.beta_true) == n_matches * (n_matches - 1) // 2
