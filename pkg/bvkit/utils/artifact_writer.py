"""Atomic artifact output for CLI runs.

Every artifact is written to a temporary sibling and moved into place, so
a crashed or interrupted run never leaves a half-written CSV behind.
Artifacts carry no timestamps; identical inputs give identical bytes.
"""

from pathlib import Path
from typing import Any, List, Union
import logging

from ..models.piecewise import PiecewiseLinear
from ..errors import ArgumentError
from .formatters import dumps_json

logger = logging.getLogger(__name__)


class ArtifactWriter:
    """Writes run artifacts into one output directory."""

    def __init__(self, out_dir: Union[str, Path], function_format: str = "csv"):
        """Initialize writer.

        Args:
            out_dir: Output directory (created if missing)
            function_format: 'csv' or 'json' for piecewise-linear functions
        """
        if function_format not in ("csv", "json"):
            raise ArgumentError(f"Unknown function format: {function_format}")

        self.out_dir = Path(out_dir)
        self.function_format = function_format
        self.written: List[Path] = []

        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ArgumentError(f"Output directory {self.out_dir} is not writable: {e}")

    def write_text(self, name: str, content: str) -> Path:
        """Write text atomically and return the final path."""
        target = self.out_dir / name
        temp_file = target.with_suffix(target.suffix + '.tmp')
        with open(temp_file, 'w', newline='\n') as f:
            f.write(content)
        temp_file.replace(target)

        self.written.append(target)
        logger.info(f"Wrote {target} ({len(content):,} bytes)")
        return target

    def write_json(self, name: str, data: Any) -> Path:
        """Write deterministic JSON."""
        return self.write_text(name, dumps_json(data))

    def write_function(self, stem: str, f: PiecewiseLinear) -> Path:
        """Write a piecewise-linear function as <stem>.csv or <stem>.json."""
        if self.function_format == "csv":
            return self.write_text(f"{stem}.csv", f.to_csv())
        return self.write_json(f"{stem}.json", f.to_dict())
