"""
Result documents and text tables.

Every command writes one JSON document:

    {"schema_version": 1, "kind": ..., "manifest": {...}, "result": {...}}

The manifest records what is needed to re-derive the result (command,
configuration, input digests, seed, tool version). Timings live in the
manifest too and are the only part that changes between identical runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import json
import logging
import math
from pathlib import Path
from typing import Any

import numpy as np

from constants import APP_VERSION, RESULT_FLOAT_DIGITS, RESULT_SCHEMA_VERSION
from core.Counterfactual import CounterfactualStats
from core.Estimator import FitReport
from core.exceptions import ConsistencyError, InvalidFormatError
from core.File import file_digest, safe_read
from core.RegimeSummary import STATISTICS, VARIABLE_LABELS, RegimeSummary
from core.SyntheticOracle import RecoverySummary
from validation.validator import JSONValidator

logger = logging.getLogger(__name__)

PARAMETER_LABELS = {
    "beta1": "Age_b x Age_s",
    "beta2": "Size_b x Size_s",
    "beta3": "Distance_bs",
}


# ============================================================================
# Manifest
# ============================================================================


@dataclass
class RunManifest:
    """Provenance of a result.

    Attributes:
        command: Sub-command name
        config: Configuration snapshot
        seed: Root seed of all randomness
        inputs: Input label -> {"path", "sha256"}
        version: Tool version
        timings: Phase name -> wall-clock seconds
    """

    command: str
    config: dict[str, Any]
    seed: int
    inputs: dict[str, dict[str, str]] = field(default_factory=dict)
    version: str = APP_VERSION
    timings: dict[str, float] = field(default_factory=dict)

    def add_input(self, label: str, path: Path | str) -> None:
        self.inputs[label] = {"path": str(path), "sha256": file_digest(path)}

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "version": self.version,
            "seed": self.seed,
            "config": self.config,
            "inputs": self.inputs,
            "timings": self.timings,
        }


# ============================================================================
# Documents
# ============================================================================


def _clean(value: Any) -> Any:
    """Convert to plain JSON types, rounding floats to RESULT_FLOAT_DIGITS decimals."""
    if isinstance(value, dict):
        return {str(key): _clean(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_clean(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if not math.isfinite(number):
            return None
        # + 0.0 turns -0.0 into 0.0
        return round(number, RESULT_FLOAT_DIGITS) + 0.0
    return value


def build_document(kind: str, manifest: RunManifest, result: dict[str, Any]) -> dict[str, Any]:
    return {
        "schema_version": RESULT_SCHEMA_VERSION,
        "kind": kind,
        "manifest": _clean(manifest.to_dict()),
        "result": _clean(result),
    }


def estimate_result(report: FitReport) -> dict[str, Any]:
    return report.to_dict()


def counterfactual_result(regime: str, beta: dict[str, float], stats: CounterfactualStats) -> dict[str, Any]:
    return {"regime": regime, "beta": beta, **stats.to_dict()}


def summary_result(summary: RegimeSummary) -> dict[str, Any]:
    return summary.to_dict()


def synthetic_result(fixture_dir: Path | str, fixture_matches: int, summary: RecoverySummary) -> dict[str, Any]:
    return {
        "fixture_dir": str(fixture_dir),
        "fixture_matches": fixture_matches,
        "recovery": summary.to_dict(),
    }


def dumps_document(document: dict[str, Any]) -> str:
    """Serialize with sorted keys so equal documents are byte-identical."""
    return json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def result_body(document: dict[str, Any]) -> str:
    """Serialized document without the timings."""
    body = json.loads(json.dumps(document))
    body["manifest"].pop("timings", None)
    return dumps_document(body)


def validate_document(document: dict[str, Any]) -> None:
    """
    Raises:
        ConsistencyError: If the document does not conform to its schema
    """
    validator = JSONValidator.for_kind(document["kind"])
    result = validator.validate_data(document, f"{document['kind']} result")
    if not result.is_valid:
        raise ConsistencyError(
            f"{document['kind']} result violates its schema: " + "; ".join(result.errors)
        )


def write_document(document: dict[str, Any], path: Path | str) -> Path:
    """Validate the document and write it as UTF-8 JSON."""
    validate_document(document)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_document(document), encoding="utf-8")
    logger.info(f"Wrote {document['kind']} result to {path}")
    return path


def load_brackets(path: Path | str) -> dict[str, tuple[float, float]]:
    """Parameter brackets of a previously written estimate result.

    Raises:
        InvalidFormatError: If the file is not a valid estimate result
    """
    path = Path(path)
    try:
        document = json.loads(safe_read(path))
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidFormatError(f"Cannot read estimate result {path}: {e}") from e

    result = JSONValidator.for_kind("estimate").validate_data(document, path)
    if not result.is_valid:
        raise InvalidFormatError(f"{path.name} is not an estimate result: {result.errors[0]}")

    return {name: (lo, hi) for name, (lo, hi) in document["result"]["brackets"].items()}


# ============================================================================
# Text tables
# ============================================================================


def format_bracket(bracket: tuple[float, float] | list[float]) -> str:
    lo, hi = bracket
    return f"[{lo:.3f},{hi:.3f}]"


def render_estimate_table(report: FitReport) -> str:
    rows = [(f"beta1 ({PARAMETER_LABELS['beta1']})", "+1 (fixed)")]
    rows += [
        (f"{name} ({PARAMETER_LABELS[name]})", format_bracket(report.brackets[name]))
        for name in ("beta2", "beta3")
    ]
    rows += [
        ("Matching Num", str(report.n_matches)),
        ("Num of inequalities", str(report.max_possible)),
        ("Max score", str(report.max_score)),
        ("Percent of correct matches", f"{report.percent_correct:.3f}"),
    ]
    return _render(f"Regime {report.regime} ({report.method}, {report.n_maximizers} maximizer(s))", rows)


def render_counterfactual_table(regime: str, stats: CounterfactualStats) -> str:
    rows = [
        ("Matching Num (data)", str(stats.matching_num_data)),
        ("Prop total match", format_bracket(stats.prop_total)),
        ("Prop same match", format_bracket(stats.prop_same)),
    ]
    return _render(f"Counterfactual {regime} ({len(stats.per_draw)} draw(s))", rows)


def render_recovery_table(summary: RecoverySummary) -> str:
    widths = summary.median_widths
    rows = [
        ("Trials", f"{len(summary.evaluated)}/{len(summary.trials)}"),
        ("Sign recovery", f"{summary.recovery_fraction:.3f}"),
        ("Median width beta2", f"{widths['beta2']:.3f}"),
        ("Median width beta3", f"{widths['beta3']:.3f}"),
    ]
    return _render(f"Recovery n={summary.spec.n}, beta {summary.spec.beta_true}", rows)


def render_summary_table(summary: RegimeSummary) -> str:
    shown = [stat for stat in STATISTICS.values() if stat not in ("q25", "median", "q75")]
    table = summary.table.loc[:, shown].rename(index=VARIABLE_LABELS).astype({"n": int})
    title = (
        f"Regime {summary.regime}: {summary.n_matches} matched pair(s), "
        f"{summary.same_country_pairs} same-country ({summary.same_country_share:.3f})"
    )
    body = table.to_string(float_format=lambda value: f"{value:.3f}", na_rep="-")
    rule = "-" * max(len(line) for line in body.splitlines())
    return "\n".join([title, rule, body, rule])


def _render(title: str, rows: list[tuple[str, str]]) -> str:
    label_width = max(len(label) for label, _ in rows)
    value_width = max(len(value) for _, value in rows)
    rule = "-" * (label_width + value_width + 3)
    lines = [title, rule]
    lines += [f"{label:<{label_width}}   {value:>{value_width}}" for label, value in rows]
    lines.append(rule)
    return "\n".join(lines)
