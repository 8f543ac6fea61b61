"""Total-variation algebra on piecewise-linear functions.

For a piecewise-linear f the supremum over partitions is attained by the
breakpoint partition (inserting a point never decreases a partition sum),
so every variation here is computed exactly from segment increments.
Segment sums use compensated summation, always left to right.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Union
import logging

import numpy as np

from ..errors import ArgumentError, DomainError
from ..models.piecewise import DEFAULT_EQ_TOL, Partition, PiecewiseLinear
from ..utils.summation import KahanSum, compensated_cumsum, compensated_sum
from .modulus import minimal_modulus

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class VariationProfile:
    """The variation function var_f(x) = var(f; a, x) of a parent f.

    ``profile`` shares the parent's breakpoint abscissae. ``slopes`` keeps
    the exact absolute parent slopes; the profile's own slopes agree with
    them up to the rounding of the cumulative sums.
    """

    parent: PiecewiseLinear
    profile: PiecewiseLinear
    slopes: np.ndarray

    @property
    def total(self) -> float:
        return float(self.profile.ys[-1])

    def __call__(self, x: float) -> float:
        return self.profile.evaluate(x)


def _subinterval(f: PiecewiseLinear, a: Optional[float], b: Optional[float], tol: float):
    lo = f.xs[0] if a is None else float(a)
    hi = f.xs[-1] if b is None else float(b)
    domain = f.domain
    if not (domain.contains(lo, tol) and domain.contains(hi, tol)):
        raise DomainError(f"[{lo!r}, {hi!r}] is not inside the domain {domain}")
    if lo > hi:
        raise DomainError(f"Invalid subinterval: a = {lo!r} > b = {hi!r}")
    return max(lo, float(f.xs[0])), min(hi, float(f.xs[-1]))


def segment_increments(f: PiecewiseLinear, a: Optional[float] = None, b: Optional[float] = None,
                       tol: float = DEFAULT_EQ_TOL) -> np.ndarray:
    """|delta y| of every segment of f cut to [a, b], left to right.

    Cut points splitting a segment are interpolated exactly.
    """
    lo, hi = _subinterval(f, a, b, tol)
    if lo == hi:
        return np.zeros(0)

    inner = (f.xs > lo) & (f.xs < hi)
    ys = np.concatenate([np.interp([lo], f.xs, f.ys), f.ys[inner], np.interp([hi], f.xs, f.ys)])
    return np.abs(np.diff(ys))


def variation_over_partition(f: PiecewiseLinear, p: Partition, tol: float = DEFAULT_EQ_TOL) -> float:
    """Partition sum of |f(x_i) - f(x_{i-1})|.

    Args:
        f: Parent function
        p: Partition of a subinterval of f's domain

    Returns:
        Non-negative partition sum

    Raises:
        DomainError: If the partition leaves the domain
    """
    points = np.asarray(p.points, dtype=float)
    domain = f.domain
    if not (domain.contains(points[0], tol) and domain.contains(points[-1], tol)):
        raise DomainError(f"Partition span {p.interval} is not inside the domain {domain}")

    values = f.evaluate_many(points, tol)
    return compensated_sum(np.abs(np.diff(values)))


def total_variation(f: PiecewiseLinear, a: Optional[float] = None, b: Optional[float] = None,
                    tol: float = DEFAULT_EQ_TOL) -> float:
    """Exact total variation of f on [a, b] (the whole domain by default).

    Raises:
        DomainError: If [a, b] is not a subinterval of the domain
    """
    return compensated_sum(segment_increments(f, a, b, tol))


def variation_function(f: PiecewiseLinear) -> VariationProfile:
    """Variation function of f on its own breakpoints.

    Each profile segment carries slope |f's slope|; profile(a) = 0.

    Pass the returned VariationProfile, not its ``profile`` attribute, to
    lipschitz_constant: only the stored slopes match the parent exactly.
    The profile's own slopes are recomputed from compensated cumulative
    sums and may differ from the parent's in the last bits.
    """
    increments = np.abs(np.diff(f.ys))
    # Kahan can step back by a carry's worth; keep the profile monotone
    cumulative = np.maximum.accumulate(compensated_cumsum(increments))
    profile = PiecewiseLinear(f.xs, np.concatenate([[0.0], cumulative]))

    slopes = np.abs(f.slopes())
    slopes.setflags(write=False)
    return VariationProfile(parent=f, profile=profile, slopes=slopes)


def tail_variation_sum(f: PiecewiseLinear, z: Sequence[float], tol: float = DEFAULT_EQ_TOL) -> float:
    """Variation of f summed over the gaps of a decreasing sequence.

    Returns sum_n var(f; z_{n+1}, z_n) + var(f; a, z_last), which equals the
    total variation for a piecewise-linear f.

    Args:
        f: Parent function
        z: Strictly decreasing points in the domain with z[0] = b

    Raises:
        ArgumentError: If z is empty, not strictly decreasing, or does not start at b
        DomainError: If a point of z lies outside the domain
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.size == 0:
        raise ArgumentError("Tail sequence must be a non-empty list")
    if np.any(np.diff(z) >= 0):
        raise ArgumentError("Tail sequence must be strictly decreasing")
    if abs(z[0] - f.xs[-1]) > tol:
        raise ArgumentError(f"Tail sequence must start at b = {f.xs[-1]!r}, got {z[0]!r}")

    acc = KahanSum()
    for upper, lower in zip(z[:-1], z[1:]):
        acc.add(total_variation(f, lower, upper, tol))
    acc.add(total_variation(f, None, z[-1], tol))
    return acc.value


def lipschitz_constant(f: Union[PiecewiseLinear, VariationProfile]) -> float:
    """Largest |slope| over all segments.

    A VariationProfile answers from its exact stored slopes, which are the
    parent's absolute slopes, so the parent and its variation function
    report the same constant bit for bit.
    A bare ``profile`` goes through the generic branch and agrees only to
    rounding.
    """
    if isinstance(f, VariationProfile):
        return float(np.max(f.slopes))
    return float(np.max(np.abs(f.slopes())))


def continuity_gap(f: PiecewiseLinear, h: float) -> float:
    """sup over |x - y| <= h of |var_f(x) - var_f(y)|.

    The finite-tolerance form of "f is continuous iff var_f is": this value
    bounds the minimal modulus of f at h and tends to 0 with h.
    """
    return minimal_modulus(variation_function(f).profile, h)
