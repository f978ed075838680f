import json
import logging
import re
import sys

import pytest

from constants import EXIT_INPUT_ERROR, EXIT_NUMERICAL_ERROR, EXIT_SUCCESS
from core.ResultDocument import result_body
from main import attach_negative_values, main
from validation.validator import JSONValidator

BRACKET = re.compile(r"\[-?\d+\.\d{3},-?\d+\.\d{3}\]")
FAST_SEARCH = ["--runs", "2", "--population", "10", "--max-generations", "5"]


@pytest.fixture(autouse=True)
def restore_logging(monkeypatch):
    """main() reconfigures the root logger and the exception hook."""
    monkeypatch.setattr(sys, "excepthook", sys.excepthook)
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    for handler in root.handlers:
        if handler not in handlers:
            handler.close()
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def run(tmp_path):
    def invoke(*argv):
        return main(["--log-dir", str(tmp_path / "logs"), *argv])

    return invoke


@pytest.fixture
def fixture_dir(tmp_path, run):
    directory = tmp_path / "fixture"
    code = run(
        "synthetic",
        "--n", "8",
        "--shock-sd", "0.5",
        "--trials", "1",
        *FAST_SEARCH,
        "--seed", "3",
        "--fixture-dir", str(directory),
        "--out", str(tmp_path / "synthetic.json"),
    )
    assert code == EXIT_SUCCESS
    return directory


def regime_args(directory):
    return [
        "--regime", "2000-2000",
        "--mergers", str(directory / "mergers.csv"),
        "--panel", str(directory / "panel.csv"),
        "--coords", str(directory / "coords.csv"),
    ]


def load(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_synthetic_writes_fixture_and_document(tmp_path, capsys, fixture_dir):
    assert {p.name for p in fixture_dir.iterdir()} == {"mergers.csv", "panel.csv", "coords.csv"}

    document = load(tmp_path / "synthetic.json")
    assert document["kind"] == "synthetic"
    assert document["result"]["fixture_matches"] >= 2
    assert document["result"]["recovery"]["n_trials"] == 1
    assert JSONValidator.for_kind("synthetic").validate_data(document).is_valid
    assert "Sign recovery" in capsys.readouterr().out


def test_estimate_on_fixture(tmp_path, fixture_dir, run, capsys):
    out = tmp_path / "estimate.json"
    code = run("estimate", *regime_args(fixture_dir), *FAST_SEARCH, "--out", str(out))
    assert code == EXIT_SUCCESS

    document = load(out)
    result = document["result"]
    assert result["brackets"]["beta1"] == [1.0, 1.0]
    assert result["method"] == "de"
    assert set(document["manifest"]["inputs"]) == {"mergers", "panel", "coords"}
    assert BRACKET.search(capsys.readouterr().out)


def test_grid_estimate_is_reproducible(tmp_path, fixture_dir, run):
    args = ["estimate", *regime_args(fixture_dir), "--grid-step", "0.25", "--bounds=-2,2"]
    assert run(*args, "--out", str(tmp_path / "a.json")) == EXIT_SUCCESS
    assert run(*args, "--out", str(tmp_path / "b.json")) == EXIT_SUCCESS

    first, second = load(tmp_path / "a.json"), load(tmp_path / "b.json")
    assert first["result"]["method"] == "grid"
    assert result_body(first) == result_body(second)


def test_counterfactual_from_estimate(tmp_path, fixture_dir, run, capsys):
    estimate = tmp_path / "estimate.json"
    assert run("estimate", *regime_args(fixture_dir), "--grid-step", "0.5", "--out", str(estimate)) == 0
    capsys.readouterr()

    out = tmp_path / "counterfactual.json"
    code = run(
        "counterfactual",
        *regime_args(fixture_dir),
        "--beta-from", str(estimate),
        "--beta-bound", "lower",
        "--draws", "3",
        "--out", str(out),
    )
    assert code == EXIT_SUCCESS

    document = load(out)
    brackets = load(estimate)["result"]["brackets"]
    assert document["result"]["beta"]["beta2"] == brackets["beta2"][0]
    assert len(document["result"]["per_draw"]) == 3
    assert "beta_from" in document["manifest"]["inputs"]
    assert "Prop same match" in capsys.readouterr().out


def test_counterfactual_with_explicit_negative_beta(tmp_path, fixture_dir, run):
    out = tmp_path / "counterfactual.json"
    code = run("counterfactual", *regime_args(fixture_dir), "--beta=-1,0.5", "--draws", "2", "--out", str(out))
    assert code == EXIT_SUCCESS
    assert load(out)["result"]["beta"] == {"beta1": 1.0, "beta2": -1.0, "beta3": 0.5}


def test_missing_panel_is_an_input_error(tmp_path, run, capsys):
    code = run("estimate", "--regime", "1991-2005", "--panel", str(tmp_path / "absent.csv"))
    assert code == EXIT_INPUT_ERROR
    assert capsys.readouterr().err.startswith("error:")


def test_bad_bounds_are_an_input_error(tmp_path, fixture_dir, run):
    assert run("estimate", *regime_args(fixture_dir), "--bounds=3,1") == EXIT_INPUT_ERROR


def test_usage_error_exits_with_input_code(run):
    with pytest.raises(SystemExit) as excinfo:
        run("estimate")
    assert excinfo.value.code == EXIT_INPUT_ERROR


def test_counterfactual_needs_a_beta_source(fixture_dir, run):
    with pytest.raises(SystemExit) as excinfo:
        run("counterfactual", *regime_args(fixture_dir))
    assert excinfo.value.code == EXIT_INPUT_ERROR


def test_generation_failure_is_a_numerical_error(tmp_path, run):
    code = run(
        "synthetic",
        "--n", "3",
        "--beta=-1,0,0",
        "--shock-sd", "0",
        "--fixture-dir", str(tmp_path / "fx"),
        "--out", str(tmp_path / "s.json"),
    )
    assert code == EXIT_NUMERICAL_ERROR


def test_noiseless_fixture_is_its_own_equilibrium(tmp_path, run):
    directory = tmp_path / "calm"
    code = run(
        "synthetic",
        "--n", "8",
        "--beta", "1,5,-2",
        "--shock-sd", "0",
        "--trials", "1",
        *FAST_SEARCH,
        "--seed", "3",
        "--fixture-dir", str(directory),
        "--out", str(tmp_path / "synthetic.json"),
    )
    assert code == EXIT_SUCCESS

    out = tmp_path / "counterfactual.json"
    code = run(
        "counterfactual",
        *regime_args(directory),
        "--beta", "1,5,-2",
        "--no-prohibit",
        "--shock-sd", "0",
        "--draws", "2",
        "--out", str(out),
    )
    assert code == EXIT_SUCCESS
    result = load(out)["result"]
    assert result["prop_same"] == [1.0, 1.0]
    assert result["prop_total"] == [1.0, 1.0]


def test_negative_values_may_follow_their_flag(tmp_path, fixture_dir, run):
    out = tmp_path / "counterfactual.json"
    code = run("counterfactual", *regime_args(fixture_dir), "--beta", "-1,0.5", "--draws", "2", "--out", str(out))
    assert code == EXIT_SUCCESS
    assert load(out)["result"]["beta"] == {"beta1": 1.0, "beta2": -1.0, "beta3": 0.5}

    estimate = tmp_path / "estimate.json"
    args = ["estimate", *regime_args(fixture_dir), "--grid-step", "0.5", "--bounds", "-2,2"]
    assert run(*args, "--out", str(estimate)) == EXIT_SUCCESS
    assert load(estimate)["manifest"]["config"]["bounds"] == [[-2.0, 2.0], [-2.0, 2.0]]


@pytest.mark.parametrize(
    "argv, expected",
    [
        (["--bounds", "-5,5"], ["--bounds=-5,5"]),
        (["--beta", "-.5,1", "--draws", "2"], ["--beta=-.5,1", "--draws", "2"]),
        (["--beta", "1,-2"], ["--beta", "1,-2"]),
        (["--bounds", "--verbose"], ["--bounds", "--verbose"]),
        (["--seed", "-1"], ["--seed", "-1"]),
        (["--bounds"], ["--bounds"]),
    ],
)
def test_attach_negative_values(argv, expected):
    assert attach_negative_values(argv) == expected


def test_summary_on_fixture(tmp_path, fixture_dir, run, capsys):
    out = tmp_path / "summary.json"
    assert run("summary", *regime_args(fixture_dir), "--out", str(out)) == EXIT_SUCCESS

    document = load(out)
    result = document["result"]
    assert document["kind"] == "summary"
    assert result["n_agents"] == 2 * result["n_matches"]
    assert result["variables"]["age"]["n"] == result["n_agents"]
    assert result["variables"]["distance"]["n"] == result["n_matches"]
    assert result["variables"]["age"]["max"] <= 1.0
    assert JSONValidator.for_kind("summary").validate_data(document).is_valid
    assert "Size TEU (normalized)" in capsys.readouterr().out
