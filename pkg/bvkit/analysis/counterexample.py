"""A Hoelder-continuous function of bounded variation whose variation
function is Hoelder for no exponent.

Nodes: x_{2n-1} = n^-beta (zeros of f), x_{2n} the midpoint of its odd
neighbours (peaks of height y_{2n} = 1/(2n log^2(n+1))), with f linear in
between. The infinite construction is truncated after N peaks: f is 0 on
[0, x_{2N+1}], and every variation statement carries the certified tail
bound 2/log(N+1) for the dropped mass. Logarithms are natural.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union
import logging
import math

import numpy as np

from ..errors import ArgumentError
from ..models.piecewise import PiecewiseLinear
from ..utils.summation import compensated_cumsum
from .modulus import holder_seminorm

logger = logging.getLogger(__name__)

DEFAULT_GAMMAS = (0.25, 0.5, 0.75, 0.9)
EXCEEDS_TRUNCATION = "exceeds truncation"


@dataclass(frozen=True)
class CounterexampleSpec:
    """Parameters alpha (Hoelder exponent), beta (node decay) and N (peaks kept)."""

    alpha: float
    beta: Optional[float] = None
    n_terms: int = 100

    def __post_init__(self):
        if self.beta is None and isinstance(self.alpha, (int, float)) and 0 < self.alpha < 1:
            object.__setattr__(self, "beta", 1.0 / self.alpha - 1.0)
        errors = self.validate()
        if errors:
            raise ArgumentError("; ".join(errors))

    @property
    def beta_max(self) -> float:
        return 1.0 / self.alpha - 1.0

    def validate(self) -> List[str]:
        """Validate parameters.

        Returns:
            List of validation error messages (empty if valid)
        """
        errors = []
        if not (isinstance(self.alpha, (int, float)) and 0 < self.alpha < 1):
            errors.append(f"alpha must lie in (0, 1), got {self.alpha!r}")
            return errors

        if self.beta is None or not 0 < self.beta <= self.beta_max * (1 + 1e-12):
            errors.append(f"beta must lie in (0, {self.beta_max!r}], got {self.beta!r}")
        if not isinstance(self.n_terms, (int, np.integer)) or self.n_terms < 2:
            errors.append(f"n_terms must be an integer >= 2, got {self.n_terms!r}")
        return errors


@dataclass(frozen=True, eq=False)
class CounterexampleFunction:
    """Truncated counterexample with its node sequences.

    nodes_x runs x_1 = 1 > x_2 > ... > x_{2N+1}; nodes_y holds f there.
    odd_varfn[n-1] is var_f(x_{2n-1}) of the truncated f.
    """

    spec: CounterexampleSpec
    f: PiecewiseLinear
    nodes_x: np.ndarray
    nodes_y: np.ndarray
    truncation_var_error: float
    odd_varfn: np.ndarray = field(repr=False)

    @property
    def n_terms(self) -> int:
        return self.spec.n_terms

    @property
    def odd_x(self) -> np.ndarray:
        """x_1, x_3, ..., x_{2N+1}."""
        return self.nodes_x[0::2]

    @property
    def peak_x(self) -> np.ndarray:
        """x_2, x_4, ..., x_{2N}."""
        return self.nodes_x[1::2]

    @property
    def peak_y(self) -> np.ndarray:
        """y_2, y_4, ..., y_{2N}."""
        return self.nodes_y[1::2]


def peak_heights(n: Union[int, np.ndarray]) -> np.ndarray:
    """y_{2n} = 1 / (2n log^2(n+1))."""
    n = np.asarray(n, dtype=float)
    return 1.0 / (2.0 * n * np.log(n + 1.0) ** 2)


def build_zigzag(nodes_x: Sequence[float], nodes_y: Sequence[float]) -> PiecewiseLinear:
    """Piecewise-linear f on [0, nodes_x[0]] through nodes given in decreasing x.

    f is 0 at 0 and flat (0) below the last node, whose value must be 0.

    Raises:
        ArgumentError: If nodes are not strictly decreasing and positive or
            the last node is not a zero
    """
    xs = np.asarray(nodes_x, dtype=float)
    ys = np.asarray(nodes_y, dtype=float)
    if xs.shape != ys.shape or xs.size < 2:
        raise ArgumentError("nodes_x and nodes_y must have the same length >= 2")
    if np.any(np.diff(xs) >= 0) or xs[-1] <= 0:
        raise ArgumentError("Nodes must be strictly decreasing and positive")
    if ys[-1] != 0.0:
        raise ArgumentError(f"Last node must be a zero of f, got {ys[-1]!r}")

    return PiecewiseLinear(np.concatenate([[0.0], xs[::-1]]), np.concatenate([[0.0], ys[::-1]]))


def build_counterexample(spec: CounterexampleSpec) -> CounterexampleFunction:
    """Build the truncated counterexample for alpha, beta, N."""
    N = spec.n_terms
    n = np.arange(1, N + 2, dtype=float)
    odd = n ** -spec.beta
    peaks = 0.5 * (odd[:-1] + odd[1:])
    heights = peak_heights(n[:-1])

    nodes_x = np.empty(2 * N + 1)
    nodes_y = np.zeros(2 * N + 1)
    nodes_x[0::2] = odd
    nodes_x[1::2] = peaks
    nodes_y[1::2] = heights

    f = build_zigzag(nodes_x, nodes_y)

    # var_f(x_{2n-1}) = 2 sum_{k=n..N} y_{2k}, summed from the smallest term up
    odd_varfn = compensated_cumsum(2.0 * heights[::-1])[::-1].copy()
    truncation = 2.0 / math.log(N + 1)

    for arr in (nodes_x, nodes_y, odd_varfn):
        arr.setflags(write=False)

    logger.debug(f"Counterexample alpha={spec.alpha}, beta={spec.beta}, N={N}: "
                 f"{len(f)} breakpoints, truncation bound {truncation:.6g}")
    return CounterexampleFunction(spec=spec, f=f, nodes_x=nodes_x, nodes_y=nodes_y,
                                  truncation_var_error=truncation, odd_varfn=odd_varfn)


def _check_index(ce: CounterexampleFunction, n: int) -> int:
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= ce.n_terms:
        raise ArgumentError(f"n must be an integer in [1, {ce.n_terms}], got {n!r}")
    return int(n)


def varfn_at_odd_node(ce: CounterexampleFunction, n: int) -> float:
    """var_f(x_{2n-1}) = 2 sum_{k=n..N} y_{2k} for the truncated f.

    Undercounts the untruncated value by at most ce.truncation_var_error.

    Raises:
        ArgumentError: If n is outside 1..N
    """
    return float(ce.odd_varfn[_check_index(ce, n) - 1])


def varfn_odd_nodes(ce: CounterexampleFunction) -> np.ndarray:
    """var_f(x_{2n-1}) for n = 1..N."""
    return np.array(ce.odd_varfn)


def varfn_lower_bound(n: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
    """Integral lower bound 1/log(n+1) on the untruncated var_f(x_{2n-1})."""
    value = 1.0 / np.log(np.asarray(n, dtype=float) + 1.0)
    return float(value) if np.ndim(value) == 0 else value


def varfn_holder_ratios(ce: CounterexampleFunction, gamma: float) -> np.ndarray:
    """Certified lower bounds of var_f(x_{2n-1}) / x_{2n-1}^gamma, n = 1..N.

    Both the truncated sum and 1/log(n+1) bound the untruncated variation
    from below; the larger of the two is used.
    """
    n = np.arange(1, ce.n_terms + 1)
    lower = np.maximum(ce.odd_varfn, varfn_lower_bound(n))
    return lower / ce.odd_x[:-1] ** gamma


def holder_seminorm_nodes(ce: CounterexampleFunction) -> float:
    """max_n y_{2n} / ((x_{2n-1} - x_{2n+1}) / 2)^alpha."""
    half_width = 0.5 * (ce.odd_x[:-1] - ce.odd_x[1:])
    return float(np.max(ce.peak_y / half_width ** ce.spec.alpha))


def holder_seminorm_pairs(ce: CounterexampleFunction) -> float:
    """Exact alpha-Hoelder seminorm of the truncated f over all breakpoint pairs."""
    value, _, _ = holder_seminorm(ce.f, ce.spec.alpha)
    return value


def closing_holder_constant(spec: CounterexampleSpec) -> float:
    """2^alpha / (min(beta, 1)^alpha log^2 2), a bound on holder_seminorm_nodes.

    Uses n^-beta - (n+1)^-beta >= beta (n+1)^-(beta+1), so it holds for every
    admissible beta; for beta >= 1 the beta factor is dropped.
    """
    return 2.0 ** spec.alpha / (min(spec.beta, 1.0) ** spec.alpha * math.log(2.0) ** 2)


def holder_at_zero_constant(spec: CounterexampleSpec) -> float:
    """C = 3^(alpha beta) / (2 log^2 2) with y_{2n} <= C x_{2n+3}^alpha."""
    return 3.0 ** (spec.alpha * spec.beta) / (2.0 * math.log(2.0) ** 2)


def check_holder_at_zero(ce: CounterexampleFunction) -> float:
    """Worst ratio y_{2n} / (C x_{2n+3}^alpha) over retained n; at most 1."""
    spec = ce.spec
    n = np.arange(1, ce.n_terms + 1, dtype=float)
    x_ahead = (n + 2.0) ** -spec.beta
    return float(np.max(ce.peak_y / (holder_at_zero_constant(spec) * x_ahead ** spec.alpha)))


def gamma_blowup_witness(ce: CounterexampleFunction, gamma: float, M: float) -> Optional[int]:
    """Smallest n <= N with (1/log(n+1)) / (n^-beta)^gamma >= M.

    Returns:
        n, or None when no n within the truncation qualifies (a larger N is needed)

    Raises:
        ArgumentError: If gamma is outside (0, 1) or M is negative
    """
    if not 0 < gamma < 1:
        raise ArgumentError(f"gamma must lie in (0, 1), got {gamma!r}")
    if not M >= 0:
        raise ArgumentError(f"M must be non-negative, got {M!r}")

    n = np.arange(1, ce.n_terms + 1, dtype=float)
    ratio = varfn_lower_bound(n) * n ** (ce.spec.beta * gamma)
    hits = np.flatnonzero(ratio >= M)
    return int(hits[0]) + 1 if hits.size else None


def counterexample_report(ce: CounterexampleFunction, gammas: Sequence[float] = DEFAULT_GAMMAS,
                          threshold: float = 3.0) -> Dict:
    """JSON-ready summary of a counterexample run."""
    witnesses = {}
    for gamma in gammas:
        n = gamma_blowup_witness(ce, gamma, threshold)
        witnesses[repr(float(gamma))] = n if n is not None else EXCEEDS_TRUNCATION
        if n is None:
            logger.warning(f"No blowup witness for gamma={gamma} within N={ce.n_terms}")

    return {
        "alpha": ce.spec.alpha,
        "beta": ce.spec.beta,
        "N": ce.n_terms,
        "holder_seminorm_nodes": holder_seminorm_nodes(ce),
        "closing_holder_constant": closing_holder_constant(ce.spec),
        "holder_at_zero_ratio": check_holder_at_zero(ce),
        "total_variation": float(ce.odd_varfn[0]),
        "truncation_var_error": ce.truncation_var_error,
        "blowup_threshold": threshold,
        "blowup_witnesses": witnesses,
    }
