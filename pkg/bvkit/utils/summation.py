"""Compensated (Kahan) summation.

Plain left-to-right float accumulation loses the low-order bits of slowly
decaying series such as sum 1/(k log^2(k+1)); the running carry keeps them.
Summation order is always left to right, so results are bitwise
reproducible for a fixed input order.
"""

from typing import Iterable

import numpy as np


class KahanSum:
    """Incremental Kahan summation with a running carry."""

    def __init__(self, start: float = 0.0):
        self.total = float(start)
        self.carry = 0.0

    def add(self, value: float):
        # Fold in what was lost on the previous step
        value = float(value) - self.carry
        previous = self.total
        self.total = previous + value
        self.carry = (self.total - previous) - value

    def extend(self, values: Iterable[float]):
        for value in values:
            self.add(value)

    @property
    def value(self) -> float:
        return self.total


def compensated_sum(values: Iterable[float]) -> float:
    """Kahan sum of values in the given order."""
    acc = KahanSum()
    acc.extend(np.asarray(values, dtype=float).tolist())
    return acc.value


def compensated_cumsum(values: Iterable[float]) -> np.ndarray:
    """Running Kahan sums; element k is the compensated sum of values[:k+1]."""
    data = np.asarray(values, dtype=float).tolist()
    out = np.empty(len(data), dtype=float)
    acc = KahanSum()
    for k, value in enumerate(data):
        acc.add(value)
        out[k] = acc.value
    return out
