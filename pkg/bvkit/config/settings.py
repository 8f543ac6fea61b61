"""Configuration settings for bvkit.

This module holds every numeric tolerance and grid density in one place,
together with output and test-driver options. Values are layered:
dataclass defaults, then an optional JSON file, then environment
variables (optionally read from a .env file), then CLI overrides.
"""

import os
from dataclasses import dataclass, asdict
from typing import Optional, List
from pathlib import Path
import json
import logging

import numpy as np
from dotenv import load_dotenv

from ..errors import ArgumentError

logger = logging.getLogger(__name__)


@dataclass
class ToleranceConfig:
    """Numeric tolerances and grid densities."""
    eq_tol: float = 1e-9  # absolute comparison tolerance
    grid_n: int = 2048  # grid density for sup-approximations
    bisect_tol: float = 1e-12  # root-bracket width
    stop_x: float = 1e-4  # anchor truncation threshold
    max_anchors: int = 10000

    def validate(self) -> List[str]:
        """Validate tolerance values.

        Returns:
            List of validation error messages (empty if valid)
        """
        errors = []

        for name in ("eq_tol", "bisect_tol", "stop_x"):
            value = getattr(self, name)
            if not value > 0:
                errors.append(f"{name} must be positive, got {value}")

        if self.grid_n < 16:
            errors.append(f"grid_n must be at least 16, got {self.grid_n}")
        if self.max_anchors < 1:
            errors.append(f"max_anchors must be positive, got {self.max_anchors}")

        return errors

    def table_grid(self) -> np.ndarray:
        """Node set used when an analytic modulus is tabulated on [0, 1].

        A uniform grid of grid_n steps merged with grid_n/2 geometric nodes
        reaching below stop_x, so behaviour near 0 stays resolved.

        Returns:
            Sorted array of distinct nodes starting at 0 and ending at 1
        """
        uniform = np.linspace(0.0, 1.0, self.grid_n + 1)
        start = min(self.stop_x / 100.0, 1.0 / self.grid_n)
        geometric = np.geomspace(start, 1.0, max(self.grid_n // 2, 2))
        return np.unique(np.concatenate([uniform, geometric]))


@dataclass
class OutputConfig:
    """Configuration for artifact output."""
    output_dir: str = "bvkit_output"
    function_format: str = "csv"  # csv or json
    show_progress: bool = False


@dataclass
class RandomConfig:
    """Configuration for randomised property-test drivers."""
    seed: int = 20240521


_SECTIONS = ("tolerance", "output", "random")


def _coerce(name: str, current, value):
    """Convert a JSON value to the type of the field it replaces."""
    kind = type(current)
    if kind is bool:
        if isinstance(value, bool):
            return value
    elif kind is str:
        if isinstance(value, str):
            return value
    elif not isinstance(value, bool):
        try:
            converted = kind(value)
        except (TypeError, ValueError):
            pass
        else:
            if kind is not int or converted == value:
                return converted
    raise ArgumentError(f"{name} must be {kind.__name__}, got {value!r}")


class Settings:
    """Main settings class that combines all configuration sections."""

    def __init__(self, config_file: Optional[str] = None, env_prefix: str = "BVKIT_",
                 use_dotenv: bool = True):
        """Initialize settings from file and environment variables.

        Args:
            config_file: Path to JSON configuration file
            env_prefix: Prefix for environment variables
            use_dotenv: Read a .env file from the working directory first
        """
        self.tolerance = ToleranceConfig()
        self.output = OutputConfig()
        self.random = RandomConfig()

        if use_dotenv:
            load_dotenv(override=False)

        # Load from config file if provided
        if config_file:
            if not Path(config_file).exists():
                raise FileNotFoundError(f"Config file not found: {config_file}")
            self._load_from_file(config_file)

        # Override with environment variables
        self._load_from_env(env_prefix)

    def _load_from_file(self, config_file: str):
        """Load settings from JSON configuration file.

        Raises:
            ArgumentError: If a section is not an object or a value does not
                convert to the type of its field
        """
        with open(config_file, 'r') as f:
            config = json.load(f)
        if not isinstance(config, dict):
            raise ArgumentError(f"{config_file}: top level must be a JSON object")

        # Update each configuration section
        for section_name, section_config in config.items():
            if section_name not in _SECTIONS:
                logger.warning(f"Unknown section {section_name} ignored")
                continue
            if not isinstance(section_config, dict):
                raise ArgumentError(f"{config_file}: section {section_name} must be a JSON object")
            section = getattr(self, section_name)
            for key, value in section_config.items():
                if hasattr(section, key):
                    setattr(section, key, _coerce(f"{section_name}.{key}", getattr(section, key), value))
                else:
                    logger.warning(f"Unknown setting {section_name}.{key} ignored")

    def _load_from_env(self, env_prefix: str):
        """Load settings from environment variables."""
        # Tolerances
        if eq_tol := os.getenv(f"{env_prefix}EQ_TOL"):
            self.tolerance.eq_tol = float(eq_tol)

        if grid_n := os.getenv(f"{env_prefix}GRID_N"):
            self.tolerance.grid_n = int(grid_n)

        if bisect_tol := os.getenv(f"{env_prefix}BISECT_TOL"):
            self.tolerance.bisect_tol = float(bisect_tol)

        if stop_x := os.getenv(f"{env_prefix}STOP_X"):
            self.tolerance.stop_x = float(stop_x)

        if max_anchors := os.getenv(f"{env_prefix}MAX_ANCHORS"):
            self.tolerance.max_anchors = int(max_anchors)

        # Output
        if output_dir := os.getenv(f"{env_prefix}OUTPUT_DIR"):
            self.output.output_dir = output_dir

        if function_format := os.getenv(f"{env_prefix}FORMAT"):
            self.output.function_format = function_format.lower()

        if show_progress := os.getenv(f"{env_prefix}SHOW_PROGRESS"):
            self.output.show_progress = show_progress.lower() in ('true', '1', 'yes')

        # Property-test seed
        if seed := os.getenv(f"{env_prefix}SEED"):
            self.random.seed = int(seed)

    def validate(self) -> List[str]:
        """Validate all sections.

        Returns:
            List of validation error messages (empty if valid)
        """
        errors = self.tolerance.validate()
        if self.output.function_format not in ("csv", "json"):
            errors.append(f"function_format must be csv or json, got {self.output.function_format}")
        return errors

    def to_dict(self) -> dict:
        """Convert settings to dictionary for serialization."""
        return {
            'tolerance': asdict(self.tolerance),
            'output': asdict(self.output),
            'random': asdict(self.random)
        }

    def save_to_file(self, file_path: str):
        """Save current settings to JSON file."""
        with open(file_path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2)
