"""Value types shared by all bvkit modules."""

from .piecewise import Interval, Partition, PiecewiseLinear
from .modulus_spec import (
    ModulusSpec,
    PowerModulus,
    LinearModulus,
    LogReciprocalModulus,
    TabulatedModulus,
    ModulusFlags,
    ModulusTable,
)

__all__ = [
    'Interval', 'Partition', 'PiecewiseLinear',
    'ModulusSpec', 'PowerModulus', 'LinearModulus', 'LogReciprocalModulus',
    'TabulatedModulus', 'ModulusFlags', 'ModulusTable',
]
