"""Utility functions for float, CSV and JSON formatting.

All floats are written in their shortest round-trip form so that every
artifact re-parses to bit-identical values and repeated runs produce
byte-identical files.
"""

import json
import math
from typing import Any, Iterable, List, Sequence, Tuple
import logging

from ..errors import ArgumentError

logger = logging.getLogger(__name__)


def format_float(value: float) -> str:
    """Format a float with the shortest representation that round-trips.

    Args:
        value: Any real number (ints and numpy scalars are accepted)

    Returns:
        String such as '0.1', '1e-05' or '2.0'

    Raises:
        ArgumentError: If the value is not finite
    """
    number = float(value)
    if not math.isfinite(number):
        raise ArgumentError(f"Cannot serialize non-finite value {value!r}")
    return repr(number)


def parse_float(text: str, field: str = "value") -> float:
    """Parse a float field, rejecting blanks and non-finite values.

    Args:
        text: Raw field text
        field: Field name used in error messages

    Returns:
        Parsed float

    Raises:
        ArgumentError: If the text is not a finite number
    """
    try:
        number = float(text.strip())
    except (AttributeError, ValueError):
        raise ArgumentError(f"Invalid {field}: {text!r}")
    if not math.isfinite(number):
        raise ArgumentError(f"Non-finite {field}: {text!r}")
    return number


def format_points_csv(points: Iterable[Tuple[float, float]],
                      header: Sequence[str] = ("x", "y")) -> str:
    """Render (x, y) pairs as CSV with a header row and a trailing newline."""
    lines = [",".join(header)]
    for x, y in points:
        lines.append(f"{format_float(x)},{format_float(y)}")
    return "\n".join(lines) + "\n"


def parse_points_csv(text: str, header: Sequence[str] = ("x", "y")) -> List[Tuple[float, float]]:
    """Parse CSV text produced by format_points_csv.

    Args:
        text: CSV content
        header: Expected column names

    Returns:
        List of (x, y) pairs in file order

    Raises:
        ArgumentError: On a missing/unexpected header or malformed rows
    """
    rows = [line.strip() for line in text.splitlines() if line.strip()]
    if not rows:
        raise ArgumentError("Empty CSV input")

    found = [cell.strip() for cell in rows[0].split(",")]
    if found != list(header):
        raise ArgumentError(f"Expected CSV header {','.join(header)!r}, got {rows[0]!r}")

    points = []
    for line_no, row in enumerate(rows[1:], start=2):
        cells = row.split(",")
        if len(cells) != 2:
            raise ArgumentError(f"Line {line_no}: expected 2 columns, got {len(cells)}")
        points.append((parse_float(cells[0], f"{header[0]} on line {line_no}"),
                       parse_float(cells[1], f"{header[1]} on line {line_no}")))
    return points


def dumps_json(data: Any) -> str:
    """Serialize to deterministic JSON (sorted keys, 2-space indent, newline)."""
    try:
        return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"
    except ValueError as e:
        raise ArgumentError(f"Cannot serialize to JSON: {e}")


def format_gap(value: float) -> str:
    """Short form of a gap or residual for log messages."""
    return f"{value:.3e}"
