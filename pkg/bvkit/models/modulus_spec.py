"""Moduli of continuity.

A modulus is a continuous non-decreasing function on [0, inf) vanishing at
0. Analytic families (power, linear, log-reciprocal) are evaluated in
closed form; tabulated moduli interpolate linearly between nodes and hold
the last value constant beyond the table end.

JSON form is a tagged union:
    {"kind": "power", "L": 1.0, "alpha": 0.5}
    {"kind": "linear", "L": 2.0}
    {"kind": "log_reciprocal", "L": 1.0}
    {"kind": "tabulated", "table": [[h, w], ...]}
A ModulusTable adds a "flags" object to the tabulated form.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field, asdict
from typing import ClassVar, Dict, Sequence, Type, Union
import json
import logging
import math

import numpy as np

from ..errors import ArgumentError, DomainError
from .piecewise import DEFAULT_EQ_TOL, PiecewiseLinear

logger = logging.getLogger(__name__)


def concavity_defects(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Amount by which each interior node lies below the chord of its neighbours.

    A table is concave iff every defect is <= 0; defects are in value units,
    so they compare directly against eq_tol.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 3:
        return np.zeros(0)
    weight = (xs[1:-1] - xs[:-2]) / (xs[2:] - xs[:-2])
    chord = ys[:-2] + (ys[2:] - ys[:-2]) * weight
    return chord - ys[1:-1]


class ModulusSpec(ABC):
    """Base class for all modulus variants."""

    kind: ClassVar[str] = ""
    _registry: ClassVar[Dict[str, Type["ModulusSpec"]]] = {}

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if cls.kind and cls.kind not in ModulusSpec._registry:
            ModulusSpec._registry[cls.kind] = cls

    @abstractmethod
    def _values(self, hs: np.ndarray) -> np.ndarray:
        """Values at non-negative offsets."""

    @property
    @abstractmethod
    def is_concave(self) -> bool:
        """Whether the variant is known to be concave on [0, inf)."""

    @abstractmethod
    def to_dict(self) -> dict:
        """Tagged-union JSON form."""

    def evaluate(self, h: float) -> float:
        """omega(h).

        Raises:
            DomainError: If h < 0
        """
        return float(self.evaluate_many(np.array([float(h)]))[0])

    __call__ = evaluate

    def evaluate_many(self, hs: Union[Sequence[float], np.ndarray]) -> np.ndarray:
        """Vectorised evaluate; every offset must be >= 0."""
        hs = np.asarray(hs, dtype=float)
        if np.any(~(hs >= 0)):
            raise DomainError(f"Modulus offsets must be >= 0, got {hs[~(hs >= 0)].flat[0]!r}")
        return self._values(hs)

    @classmethod
    def from_dict(cls, data: dict) -> "ModulusSpec":
        """Create the matching variant from its JSON form."""
        if not isinstance(data, dict) or "kind" not in data:
            raise ArgumentError(f"Modulus JSON needs a 'kind' field, got {data!r}")

        variant = ModulusSpec._registry.get(data["kind"])
        if variant is None:
            known = ", ".join(sorted(ModulusSpec._registry))
            raise ArgumentError(f"Unknown modulus kind {data['kind']!r} (known: {known})")
        return variant._from_fields(data)

    @classmethod
    def from_json(cls, text: str) -> "ModulusSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ArgumentError(f"Invalid modulus JSON: {e}")
        return cls.from_dict(data)

    @classmethod
    def _from_fields(cls, data: dict) -> "ModulusSpec":
        raise NotImplementedError


def _positive(value, name: str) -> float:
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ArgumentError(f"{name} must be a number, got {value!r}")
    if not (math.isfinite(number) and number > 0):
        raise ArgumentError(f"{name} must be positive and finite, got {value!r}")
    return number


@dataclass(frozen=True)
class PowerModulus(ModulusSpec):
    """h -> L * h**alpha with 0 < alpha <= 1."""

    L: float
    alpha: float
    kind: ClassVar[str] = "power"

    def __post_init__(self):
        object.__setattr__(self, "L", _positive(self.L, "L"))
        alpha = _positive(self.alpha, "alpha")
        if alpha > 1:
            raise ArgumentError(f"alpha must lie in (0, 1], got {alpha}")
        object.__setattr__(self, "alpha", alpha)

    def _values(self, hs: np.ndarray) -> np.ndarray:
        return self.L * np.power(hs, self.alpha)

    @property
    def is_concave(self) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"kind": self.kind, "L": self.L, "alpha": self.alpha}

    @classmethod
    def _from_fields(cls, data: dict) -> "PowerModulus":
        if "alpha" not in data:
            raise ArgumentError("power modulus needs 'alpha'")
        return cls(data.get("L", 1.0), data["alpha"])


@dataclass(frozen=True)
class LinearModulus(ModulusSpec):
    """h -> L * h."""

    L: float
    kind: ClassVar[str] = "linear"

    def __post_init__(self):
        object.__setattr__(self, "L", _positive(self.L, "L"))

    def _values(self, hs: np.ndarray) -> np.ndarray:
        return self.L * hs

    @property
    def is_concave(self) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"kind": self.kind, "L": self.L}

    @classmethod
    def _from_fields(cls, data: dict) -> "LinearModulus":
        return cls(data.get("L", 1.0))


@dataclass(frozen=True)
class LogReciprocalModulus(ModulusSpec):
    """h -> L / log(e + 1/h), with value 0 at h = 0.

    Concave on [0, inf), grows faster than any power near 0 in the ratio
    sense (omega(h)/h^alpha -> inf for every alpha > 0).
    """

    L: float
    kind: ClassVar[str] = "log_reciprocal"

    def __post_init__(self):
        object.__setattr__(self, "L", _positive(self.L, "L"))

    def _values(self, hs: np.ndarray) -> np.ndarray:
        positive = hs > 0
        safe = np.where(positive, hs, 1.0)
        values = self.L / np.log(math.e + 1.0 / safe)
        return np.where(positive, values, 0.0)

    @property
    def is_concave(self) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"kind": self.kind, "L": self.L}

    @classmethod
    def _from_fields(cls, data: dict) -> "LogReciprocalModulus":
        return cls(data.get("L", 1.0))


@dataclass(frozen=True, eq=False)
class TabulatedModulus(ModulusSpec):
    """Linear interpolation of a table on [0, H], constant beyond H."""

    table: PiecewiseLinear
    kind: ClassVar[str] = "tabulated"

    def __post_init__(self):
        xs, ys = self.table.xs, self.table.ys
        if xs[0] != 0.0:
            raise ArgumentError(f"Modulus table must start at h = 0, got {xs[0]!r}")
        if ys[0] != 0.0:
            raise ArgumentError(f"Modulus table must vanish at h = 0, got {ys[0]!r}")
        if np.any(np.diff(ys) < 0):
            bad = int(np.argmax(np.diff(ys) < 0))
            raise ArgumentError(f"Modulus table must be non-decreasing (node {bad + 1} at h = {xs[bad + 1]!r})")

    @property
    def nodes(self) -> np.ndarray:
        return self.table.xs

    @property
    def values(self) -> np.ndarray:
        return self.table.ys

    @property
    def end(self) -> float:
        """H, where the constant tail starts."""
        return float(self.table.xs[-1])

    @property
    def tail(self) -> float:
        return float(self.table.ys[-1])

    def _values(self, hs: np.ndarray) -> np.ndarray:
        # np.interp holds the last value beyond the table end
        return np.interp(hs, self.table.xs, self.table.ys)

    @property
    def is_concave(self) -> bool:
        defects = concavity_defects(self.table.xs, self.table.ys)
        return bool(defects.size == 0 or defects.max() <= DEFAULT_EQ_TOL)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "table": [[h, w] for h, w in self.table.breakpoints]}

    @classmethod
    def _from_fields(cls, data: dict) -> "ModulusSpec":
        if "table" not in data:
            raise ArgumentError("tabulated modulus needs 'table'")
        table = PiecewiseLinear.from_dict({"breakpoints": data["table"]})
        if "flags" in data:
            return ModulusTable(table, ModulusFlags.from_dict(data["flags"]))
        return cls(table)

    @classmethod
    def from_values(cls, hs: Sequence[float], ws: Sequence[float]) -> "TabulatedModulus":
        return cls(PiecewiseLinear(np.asarray(hs, dtype=float), np.asarray(ws, dtype=float)))


@dataclass(frozen=True)
class ModulusFlags:
    """Which structural properties have been verified on a table."""

    subadditive_checked: bool = False
    concave_checked: bool = False
    reproducing_checked: bool = False

    @classmethod
    def from_dict(cls, data: dict) -> "ModulusFlags":
        if not isinstance(data, dict):
            raise ArgumentError(f"flags must be an object, got {data!r}")
        return cls(**{k: bool(v) for k, v in data.items() if k in cls.__dataclass_fields__})


@dataclass(frozen=True, eq=False)
class ModulusTable(TabulatedModulus):
    """Tabulated modulus produced by the analysis pipeline, with check flags.

    Every minimal modulus, omega_omega, eventually-constant majorant and
    concave majorant lives as a ModulusTable.
    """

    flags: ModulusFlags = field(default_factory=ModulusFlags)

    def __post_init__(self):
        super().__post_init__()
        if self.flags.concave_checked:
            defects = concavity_defects(self.table.xs, self.table.ys)
            if defects.size and defects.max() > DEFAULT_EQ_TOL:
                k = int(np.argmax(defects)) + 1
                raise ArgumentError(f"Table flagged concave has a second-difference defect "
                                    f"{defects.max():.3e} at h = {self.table.xs[k]!r}")

    @classmethod
    def from_values(cls, hs: Sequence[float], ws: Sequence[float],
                    flags: ModulusFlags = ModulusFlags()) -> "ModulusTable":
        """Build a table; values are forced non-decreasing against rounding."""
        ws = np.maximum.accumulate(np.maximum(np.asarray(ws, dtype=float), 0.0))
        hs = np.asarray(hs, dtype=float)
        ws[hs == 0.0] = 0.0
        return cls(PiecewiseLinear(hs, ws), flags)

    def with_flags(self, **changes) -> "ModulusTable":
        return ModulusTable(self.table, ModulusFlags(**{**asdict(self.flags), **changes}))

    def to_dict(self) -> dict:
        data = super().to_dict()
        data["flags"] = asdict(self.flags)
        return data
