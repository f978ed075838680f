import hashlib
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from core.exceptions import InvalidFormatError

logger = logging.getLogger(__name__)

# ------------------------------
#         CONSTANTS
# ------------------------------

# UTF-8 files, with or without a byte order mark
DEFAULT_ENCODINGS: list[str] = [
    "utf-8",
    "utf-8-sig",
]

DIGEST_CHUNK_SIZE = 65536


def safe_read(
    path: Path | str,
    encodings: list[str] | None = None,
) -> str:
    """Read a UTF-8 text file, stripping a leading byte order mark.

    Args:
        path: Path to file to read
        encodings: Encodings to try (uses DEFAULT_ENCODINGS if None)

    Returns:
        The file content

    Raises:
        FileNotFoundError: If file doesn't exist
        InvalidFormatError: If no encoding decodes the file
    """
    path = Path(path)
    encodings = encodings or DEFAULT_ENCODINGS

    logger.debug(f"Attempting to read file: {path}")

    if not path.exists():
        error_msg = f"File not found: {path}"
        logger.error(error_msg)
        raise FileNotFoundError(error_msg)

    raw = path.read_bytes()
    for encoding in encodings:
        try:
            return raw.decode(encoding).removeprefix("﻿")
        except UnicodeDecodeError:
            continue

    raise InvalidFormatError(f"{path.name} is not valid {' / '.join(encodings)} text")


def read_csv_frame(path: Path | str, required_columns: tuple[str, ...]) -> pd.DataFrame:
    """Read the required columns of a CSV file with a header row.

    Columns are matched by name; extra columns are ignored. Cells are kept
    as stripped strings, blank rows are dropped, and the index holds the
    file line of every row (the header is line 1).

    Args:
        path: CSV file path
        required_columns: Column names that must be present

    Returns:
        DataFrame with exactly required_columns, in that order

    Raises:
        InvalidFormatError: If the file is unreadable, has no header or
            misses a required column
    """
    path = Path(path)
    wanted = set(required_columns)
    try:
        frame = pd.read_csv(
            path,
            dtype=str,
            encoding="utf-8-sig",
            keep_default_na=False,
            skip_blank_lines=False,
            skipinitialspace=True,
            usecols=lambda column: column.strip() in wanted,
        )
    except FileNotFoundError as e:
        raise InvalidFormatError(f"File not found: {path}") from e
    except pd.errors.EmptyDataError as e:
        raise InvalidFormatError(f"{path.name}: header row required") from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise InvalidFormatError(f"{path.name}: {e}") from e
    except OSError as e:
        raise InvalidFormatError(f"Cannot read {path}: {e}") from e

    frame.columns = [column.strip() for column in frame.columns]
    missing = [column for column in required_columns if column not in frame.columns]
    if missing:
        raise InvalidFormatError(f"{path.name}: missing column(s) {', '.join(missing)}")

    frame = frame.loc[:, list(required_columns)].fillna("").map(str.strip)
    frame.index = frame.index + 2
    frame = frame[frame.ne("").any(axis=1)]

    logger.debug(f"Read {len(frame)} row(s) from {path.name}")
    return frame


def numeric_column(
    frame: pd.DataFrame, column: str, path: Path | str, integer: bool = False
) -> pd.Series:
    """Convert a string column of read_csv_frame output to finite numbers.

    Raises:
        InvalidFormatError: Naming the first offending line and cell
    """
    values = pd.to_numeric(frame[column], errors="coerce").astype("float64")
    bad = ~np.isfinite(values)
    if integer:
        bad |= values.mod(1).ne(0)

    if bad.any():
        line = bad.idxmax()
        kind = "an integer" if integer else "a finite number"
        raise InvalidFormatError(
            f"{Path(path).name}:{line}: {column} must be {kind}, got '{frame.at[line, column]}'"
        )
    if integer:
        return values.astype("int64")
    # exact decimal parsing, so written reprs read back bit for bit
    return frame[column].map(float).astype("float64")


def write_csv_frame(path: Path | str, frame: pd.DataFrame) -> None:
    """Write a DataFrame as a UTF-8 CSV file with a header row and no index."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")


def file_digest(path: Path | str) -> str:
    """SHA-256 hex digest of a file's bytes."""
    digest = hashlib.sha256()
    with Path(path).open("rb") as f:
        for chunk in iter(lambda: f.read(DIGEST_CHUNK_SIZE), b""):
            digest.update(chunk)
    return digest.hexdigest()
