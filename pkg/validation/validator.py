#!/usr/bin/env python3
"""JSON schema validator for result documents.

Validates estimate, counterfactual and synthetic result documents against
their schemas, either in memory before a document is written or offline
for files and directories of files.
"""

import json
import logging
from pathlib import Path
import sys
from typing import Any

from jsonschema import Draft7Validator

from constants import SCHEMAS_DIR

logger = logging.getLogger(__name__)

RESULT_KINDS = ("estimate", "counterfactual", "synthetic", "summary")


def schema_path_for(kind: str) -> Path:
    """Schema file of a result kind.

    Raises:
        ValueError: If kind is unknown
    """
    if kind not in RESULT_KINDS:
        raise ValueError(f"Unknown result kind '{kind}': expected one of {', '.join(RESULT_KINDS)}")
    return SCHEMAS_DIR / f"{kind}-result.json"


class ValidationResult:
    """Result of a JSON validation operation.

    Attributes:
        source: File path or label of the validated document
        errors: List of validation error messages
        is_valid: Whether validation passed
    """

    def __init__(self, source: Path | str, errors: list[str] | None = None) -> None:
        self.source = source
        self.errors = errors or []
        self.is_valid = len(self.errors) == 0

    def __repr__(self) -> str:
        status = "✅" if self.is_valid else "❌"
        return f"<ValidationResult {status} {self.source} errors={len(self.errors)}>"


class JSONValidator:
    """JSON schema validator with support for batch validation."""

    def __init__(self, schema_path: Path) -> None:
        """Initialize validator with a schema.

        Args:
            schema_path: Path to JSON schema file

        Raises:
            FileNotFoundError: If schema file doesn't exist
            json.JSONDecodeError: If schema is invalid JSON
        """
        self.schema_path = schema_path
        self.schema = self._load_schema()
        self.validator = Draft7Validator(self.schema)

        logger.debug(f"Schema loaded: {schema_path}")

    @classmethod
    def for_kind(cls, kind: str) -> "JSONValidator":
        return cls(schema_path_for(kind))

    def _load_schema(self) -> dict:
        if not self.schema_path.exists():
            raise FileNotFoundError(f"Schema not found: {self.schema_path}")

        try:
            with self.schema_path.open(encoding="utf-8") as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            logger.error(f"Invalid schema JSON: {e}")
            raise

    def validate_data(self, data: Any, source: Path | str = "<document>") -> ValidationResult:
        """Validate an already parsed document."""
        errors = []
        for error in sorted(self.validator.iter_errors(data), key=lambda e: list(e.path)):
            path = ".".join(str(p) for p in error.path) or "root"
            errors.append(f"{path}: {error.message}")
        return ValidationResult(source, errors)

    def validate_file(self, file_path: Path) -> ValidationResult:
        """Validate a single JSON file against the schema."""
        try:
            with file_path.open(encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            return ValidationResult(file_path, [f"Invalid JSON syntax: {e}"])
        except OSError as e:
            return ValidationResult(file_path, [f"Cannot read file: {e}"])

        return self.validate_data(data, file_path)

    def validate_directory(self, directory: Path, pattern: str = "*.json") -> list[ValidationResult]:
        """Validate all JSON files in a directory."""
        if not directory.is_dir():
            logger.error(f"Not a directory: {directory}")
            return []

        files = sorted(directory.glob(pattern))
        if not files:
            logger.warning(f"No JSON files found in {directory}")
            return []

        logger.info(f"Validating {len(files)} files in {directory}")
        return [self.validate_file(file_path) for file_path in files]

    def validate_target(self, target: Path) -> list[ValidationResult]:
        """Validate a file or directory."""
        if target.is_file():
            return [self.validate_file(target)]
        if target.is_dir():
            return self.validate_directory(target)
        logger.error(f"Target not found: {target}")
        return []


def print_results(results: list[ValidationResult]) -> int:
    """Print validation results to console.

    Returns:
        Number of failed validations
    """
    failed_count = 0

    for result in results:
        if result.is_valid:
            print(f"✅ {result.source}")
        else:
            failed_count += 1
            print(f"❌ {result.source}", file=sys.stderr)
            for error in result.errors:
                print(f"  → {error}", file=sys.stderr)
            print(file=sys.stderr)

    total = len(results)
    if total > 1:
        print(f"\n{'=' * 60}")
        print(f"Summary: {total - failed_count}/{total} files passed validation")
        if failed_count > 0:
            print(f"Failed: {failed_count}")

    return failed_count


def main(argv: list[str] | None = None) -> int:
    """Validate result files offline.

    Returns:
        Exit code (0 for success, 1 for validation failures)
    """
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) < 2:
        print("Usage: validator.py <file_or_dir> <kind>")
        print("\nValidate result documents against their JSON schema.")
        print(f"\n  kind   One of: {', '.join(RESULT_KINDS)}")
        print("\nExamples:")
        print("  validator.py results/estimate.json estimate")
        print("  validator.py results/ counterfactual")
        return 1

    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    target_path = Path(argv[0])

    if not target_path.exists():
        logger.error(f"Target not found: {target_path}")
        return 1

    try:
        validator = JSONValidator.for_kind(argv[1])
    except (ValueError, OSError) as e:
        logger.error(f"Failed to load schema: {e}")
        return 1

    results = validator.validate_target(target_path)
    if not results:
        logger.warning("No files validated")
        return 0

    return 1 if print_results(results) > 0 else 0


if __name__ == "__main__":
    sys.exit(main())
