"""Piecewise-linear functions, intervals and partitions.

PiecewiseLinear is the concrete function representation used everywhere:
parent functions, variation profiles, modulus tables and constructed
functions. Instances are immutable; their coordinate arrays are read-only.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple, Union
import json
import logging

import numpy as np

from ..config.settings import ToleranceConfig
from ..errors import ArgumentError, DomainError
from ..utils.formatters import format_points_csv, parse_points_csv

logger = logging.getLogger(__name__)

DEFAULT_EQ_TOL = ToleranceConfig.eq_tol

Point = Tuple[float, float]


@dataclass(frozen=True)
class Interval:
    """A closed interval [a, b]."""

    a: float
    b: float

    def __post_init__(self):
        if not float(self.a) <= float(self.b):
            raise ArgumentError(f"Interval requires a <= b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return float(self.b) - float(self.a)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.a - tol <= x <= self.b + tol

    def __str__(self) -> str:
        return f"[{self.a}, {self.b}]"


@dataclass(frozen=True)
class Partition:
    """A finite non-decreasing sequence of points spanning [points[0], points[-1]].

    Repeated points are allowed; they contribute zero to partition sums.
    """

    points: Tuple[float, ...]

    def __post_init__(self):
        points = tuple(float(p) for p in self.points)
        if not points:
            raise ArgumentError("Partition needs at least one point")
        if not np.all(np.isfinite(points)):
            raise ArgumentError("Partition points must be finite")
        if any(q < p for p, q in zip(points, points[1:])):
            raise ArgumentError("Partition points must be non-decreasing")
        object.__setattr__(self, "points", points)

    @classmethod
    def from_points(cls, points: Iterable[float]) -> "Partition":
        return cls(tuple(points))

    @property
    def interval(self) -> Interval:
        return Interval(self.points[0], self.points[-1])

    def refine(self, extra_points: Iterable[float]) -> "Partition":
        """Union with extra points inside the same span; the result is finer."""
        extra = [float(p) for p in extra_points]
        a, b = self.points[0], self.points[-1]
        outside = [p for p in extra if p < a or p > b]
        if outside:
            raise DomainError(f"Refinement points {outside[:3]} lie outside [{a}, {b}]")
        return Partition(tuple(sorted(self.points + tuple(extra))))

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True, eq=False)
class PiecewiseLinear:
    """Continuous piecewise-linear function given by breakpoints.

    Evaluation returns the linear interpolation between the surrounding
    breakpoints and the stored y exactly at a breakpoint. Points within
    ``tol`` outside the domain are clamped to the nearest endpoint.
    """

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float)
        ys = np.array(self.ys, dtype=float)

        if xs.ndim != 1 or ys.ndim != 1 or xs.shape != ys.shape:
            raise ArgumentError(f"Breakpoint arrays must be 1-D of equal length, got {xs.shape} and {ys.shape}")
        if xs.size < 2:
            raise ArgumentError(f"At least 2 breakpoints required, got {xs.size}")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ArgumentError("Breakpoints must be finite")
        if np.any(np.diff(xs) <= 0):
            bad = int(np.argmax(np.diff(xs) <= 0))
            raise ArgumentError(f"Breakpoint x must be strictly increasing (index {bad}: {xs[bad]} -> {xs[bad + 1]})")

        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def from_points(cls, points: Iterable[Point]) -> "PiecewiseLinear":
        """Create from (x, y) pairs in increasing x."""
        pairs = [(float(x), float(y)) for x, y in points]
        if not pairs:
            raise ArgumentError("No breakpoints given")
        xs, ys = zip(*pairs)
        return cls(np.array(xs), np.array(ys))

    @classmethod
    def constant(cls, a: float, b: float, value: float = 0.0) -> "PiecewiseLinear":
        return cls(np.array([a, b]), np.array([value, value]))

    @property
    def breakpoints(self) -> List[Point]:
        return list(zip(self.xs.tolist(), self.ys.tolist()))

    @property
    def domain(self) -> Interval:
        return Interval(float(self.xs[0]), float(self.xs[-1]))

    @property
    def length(self) -> float:
        return float(self.xs[-1] - self.xs[0])

    def __len__(self) -> int:
        return int(self.xs.size)

    def _clamp(self, x: np.ndarray, tol: float) -> np.ndarray:
        a, b = self.xs[0], self.xs[-1]
        outside = ~((x >= a - tol) & (x <= b + tol))
        if np.any(outside):
            worst = x[outside].flat[0]
            raise DomainError(f"x = {worst!r} outside domain [{a!r}, {b!r}] beyond tolerance {tol}")
        return np.clip(x, a, b)

    def evaluate(self, x: float, tol: float = DEFAULT_EQ_TOL) -> float:
        """Evaluate f at one point.

        Args:
            x: Evaluation point
            tol: Clamping tolerance at the endpoints

        Returns:
            f(x)

        Raises:
            DomainError: If x is outside the domain by more than tol
        """
        point = self._clamp(np.array([float(x)]), tol)
        return float(np.interp(point, self.xs, self.ys)[0])

    __call__ = evaluate

    def evaluate_many(self, x: Union[Sequence[float], np.ndarray], tol: float = DEFAULT_EQ_TOL) -> np.ndarray:
        """Vectorised evaluate with the same clamping rules."""
        points = self._clamp(np.asarray(x, dtype=float), tol)
        return np.interp(points, self.xs, self.ys)

    def slopes(self) -> np.ndarray:
        """Slope of every segment."""
        return np.diff(self.ys) / np.diff(self.xs)

    def restrict(self, a: float, b: float, tol: float = DEFAULT_EQ_TOL) -> "PiecewiseLinear":
        """Restriction to [a, b] with the cut points interpolated exactly.

        Raises:
            DomainError: If [a, b] is not a non-degenerate subinterval
        """
        lo, hi = self._clamp(np.array([float(a), float(b)]), tol)
        if not lo < hi:
            raise DomainError(f"Cannot restrict to degenerate interval [{a}, {b}]")

        inner = (self.xs > lo) & (self.xs < hi)
        xs = np.concatenate([[lo], self.xs[inner], [hi]])
        ys = np.concatenate([np.interp([lo], self.xs, self.ys), self.ys[inner],
                             np.interp([hi], self.xs, self.ys)])
        return PiecewiseLinear(xs, ys)

    def with_values(self, ys: Union[Sequence[float], np.ndarray]) -> "PiecewiseLinear":
        """Same breakpoint abscissae, new ordinates."""
        return PiecewiseLinear(self.xs, np.asarray(ys, dtype=float))

    def to_csv(self) -> str:
        """CSV with header x,y and rows in increasing x."""
        return format_points_csv(self.breakpoints)

    @classmethod
    def from_csv(cls, text: str) -> "PiecewiseLinear":
        return cls.from_points(parse_points_csv(text))

    def to_dict(self) -> dict:
        return {"breakpoints": [[x, y] for x, y in self.breakpoints]}

    @classmethod
    def from_dict(cls, data: dict) -> "PiecewiseLinear":
        """Create from {"breakpoints": [[x, y], ...]}."""
        try:
            rows = data["breakpoints"]
            return cls.from_points((row[0], row[1]) for row in rows)
        except (KeyError, TypeError, IndexError) as e:
            raise ArgumentError(f"Malformed piecewise-linear JSON: {e}")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "PiecewiseLinear":
        """Load from a .csv or .json file."""
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as e:
            raise ArgumentError(f"Cannot read {path}: {e}")

        if path.suffix.lower() == ".json":
            try:
                data = json.loads(text)
            except json.JSONDecodeError as e:
                raise ArgumentError(f"Invalid JSON in {path}: {e}")
            return cls.from_dict(data)
        return cls.from_csv(text)

    def __repr__(self) -> str:
        return f"PiecewiseLinear(n={len(self)}, domain=[{self.xs[0]!r}, {self.xs[-1]!r}])"
