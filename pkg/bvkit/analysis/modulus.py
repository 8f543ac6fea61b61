"""Minimal modulus of continuity and the majorant pipeline.

For a piecewise-linear f the minimal modulus

    omega_f(h) = sup{|f(x) - f(y)| : |x - y| <= h}

is attained either by two breakpoints at most h apart or by a breakpoint
and the point exactly h away from it. The first family is answered with
range-max/range-min queries over breakpoint windows, the second with
shifted interpolation; both are vectorised over many offsets at once.

The majorant pipeline turns a bounded modulus into the normal form used by
the construction: eventually constant, reproducing (its own minimal
modulus), concave.
"""

from dataclasses import dataclass, asdict, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union
import itertools
import logging

import numpy as np

from ..config.settings import ToleranceConfig
from ..errors import ArgumentError, DomainError
from ..models.modulus_spec import (
    ModulusFlags,
    ModulusSpec,
    ModulusTable,
    TabulatedModulus,
    concavity_defects,
)
from ..models.piecewise import DEFAULT_EQ_TOL, PiecewiseLinear
from ..utils.formatters import format_gap

logger = logging.getLogger(__name__)

# Elements per vectorised block; bounds peak memory of the 2-D scans
_BLOCK_ELEMENTS = 2_000_000

# For concave w the pair scan is exact; the candidate offsets are then only added for small f
_SMALL_FUNCTION = 300


class _RangeTable:
    """Sparse table answering max and min over index windows [lo, hi]."""

    def __init__(self, values: np.ndarray):
        n = values.size
        levels = max(1, int(n).bit_length())
        self.maxs = np.empty((levels, n))
        self.mins = np.empty((levels, n))
        self.maxs[0] = values
        self.mins[0] = values
        for k in range(1, levels):
            half = 1 << (k - 1)
            width = n - (1 << k) + 1
            self.maxs[k] = self.maxs[k - 1]
            self.mins[k] = self.mins[k - 1]
            if width > 0:
                self.maxs[k, :width] = np.maximum(self.maxs[k - 1, :width], self.maxs[k - 1, half:half + width])
                self.mins[k, :width] = np.minimum(self.mins[k - 1, :width], self.mins[k - 1, half:half + width])

        # floor(log2(length)) for every window length 1..n
        self.log2 = np.zeros(n + 1, dtype=np.int64)
        if n > 1:
            self.log2[2:] = np.floor(np.log2(np.arange(2, n + 1))).astype(np.int64)

    def spread(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """max - min over each inclusive window."""
        k = self.log2[hi - lo + 1]
        right = hi - (1 << k) + 1
        top = np.maximum(self.maxs[k, lo], self.maxs[k, right])
        bottom = np.minimum(self.mins[k, lo], self.mins[k, right])
        return top - bottom


def _check_offsets(hs) -> np.ndarray:
    hs = np.atleast_1d(np.asarray(hs, dtype=float))
    if np.any(~(hs >= 0)):
        raise DomainError(f"Offsets must be >= 0, got {hs[~(hs >= 0)].flat[0]!r}")
    return hs


def minimal_modulus_values(f: PiecewiseLinear, hs: Union[Sequence[float], np.ndarray]) -> np.ndarray:
    """Exact minimal modulus of f at every offset in hs.

    Offsets beyond the domain length clamp to it (the full range of f).

    Raises:
        DomainError: If any offset is negative
    """
    hs = _check_offsets(hs)
    xs, ys = f.xs, f.ys
    n = xs.size
    clipped = np.minimum(hs, f.length)
    out = np.empty_like(clipped)

    ranges = _RangeTable(ys)
    rows = np.arange(n)[:, None]
    chunk = max(1, _BLOCK_ELEMENTS // n)

    for start in range(0, clipped.size, chunk):
        h = clipped[start:start + chunk][None, :]

        # Breakpoint windows [x_i, x_i + h]
        ahead = xs[:, None] + h
        last = np.minimum(np.searchsorted(xs, ahead, side='right') - 1, n - 1)
        best = ranges.spread(np.broadcast_to(rows, last.shape), last).max(axis=0)

        # Breakpoint paired with the point exactly h to its right
        inside = ahead <= xs[-1]
        shifted = np.interp(np.where(inside, ahead, xs[-1]), xs, ys)
        best = np.maximum(best, np.where(inside, np.abs(shifted - ys[:, None]), 0.0).max(axis=0))

        # ... and exactly h to its left
        behind = xs[:, None] - h
        inside = behind >= xs[0]
        shifted = np.interp(np.where(inside, behind, xs[0]), xs, ys)
        best = np.maximum(best, np.where(inside, np.abs(ys[:, None] - shifted), 0.0).max(axis=0))

        out[start:start + chunk] = best

    return out


def minimal_modulus(f: PiecewiseLinear, h: float) -> float:
    """omega_f(h) = sup{|f(x) - f(y)| : |x - y| <= h}.

    Args:
        f: Piecewise-linear function
        h: Offset; values beyond the domain length clamp to it

    Raises:
        DomainError: If h < 0
    """
    return float(minimal_modulus_values(f, [h])[0])


def _candidate_offset_blocks(f: PiecewiseLinear) -> Iterator[np.ndarray]:
    """Positive breakpoint gaps, a block of rows at a time.

    Each block is sorted and distinct; values may repeat across blocks.
    """
    xs = f.xs
    rows = max(1, _BLOCK_ELEMENTS // xs.size)
    for r0 in range(0, xs.size - 1, rows):
        gaps = xs[None, r0 + 1:] - xs[r0:r0 + rows, None]
        yield np.unique(gaps[gaps > 0])


def candidate_offsets(f: PiecewiseLinear) -> np.ndarray:
    """All distinct positive breakpoint gaps x_j - x_i, sorted.

    Quadratic in the number of breakpoints; meant for small functions.
    """
    return np.unique(np.concatenate(list(_candidate_offset_blocks(f))))


def minimal_modulus_table(f: PiecewiseLinear, grid: Union[Sequence[float], np.ndarray]) -> ModulusTable:
    """Minimal modulus of f tabulated on a grid starting at 0.

    Raises:
        ArgumentError: If the grid is not strictly increasing from 0
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise ArgumentError("Grid must be strictly increasing and start at 0")

    return ModulusTable.from_values(grid, minimal_modulus_values(f, grid))


def upper_hull_indices(xs: np.ndarray, ys: np.ndarray) -> List[int]:
    """Monotone-chain upper hull of points sorted by x.

    Collinear middle points are kept (ties keep the earlier node).
    """
    hull: List[int] = []
    for k in range(len(xs)):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (xs[a] - xs[o]) * (ys[k] - ys[o]) - (ys[a] - ys[o]) * (xs[k] - xs[o])
            if cross > 0:
                hull.pop()
            else:
                break
        hull.append(k)
    return hull


def _shift_lines(f: PiecewiseLinear, mid: float) -> Tuple[np.ndarray, np.ndarray]:
    """Slopes and intercepts (in h) of every shifted difference valid around offset mid."""
    xs, ys = f.xs, f.ys
    slopes = f.slopes()
    n = xs.size
    lines_m, lines_c = [], []

    # f(x_i + h) - y_i
    ok = xs + mid < xs[-1]
    seg = np.clip(np.searchsorted(xs, xs[ok] + mid, side='right') - 1, 0, n - 2)
    m = slopes[seg]
    lines_m.append(m)
    lines_c.append(ys[seg] + m * (xs[ok] - xs[seg]) - ys[ok])

    # y_j - f(x_j - h)
    ok = xs - mid > xs[0]
    seg = np.clip(np.searchsorted(xs, xs[ok] - mid, side='right') - 1, 0, n - 2)
    m = slopes[seg]
    lines_m.append(m)
    lines_c.append(ys[ok] - ys[seg] - m * (xs[ok] - xs[seg]))

    m = np.concatenate(lines_m)
    c = np.concatenate(lines_c)
    return np.concatenate([m, -m]), np.concatenate([c, -c])


def minimal_modulus_profile(f: PiecewiseLinear) -> ModulusTable:
    """The exact piecewise-linear minimal modulus of f on [0, length].

    Nodes are every breakpoint gap plus every kink between consecutive gaps,
    where one shifted difference overtakes another. Between consecutive gaps
    omega_f is the upper envelope of those lines and of the constant
    best-pair value, found as the upper hull of their (slope, intercept)
    points. Quadratic in breakpoints per gap interval; meant for functions
    with tens of breakpoints.
    """
    xs, ys = f.xs, f.ys
    gaps = f.xs[None, :] - f.xs[:, None]
    upper = gaps > 0
    pair_gap = gaps[upper]
    pair_rise = np.abs(ys[None, :] - ys[:, None])[upper]
    order = np.argsort(pair_gap, kind='stable')
    pair_gap = pair_gap[order]
    best_pair = np.maximum.accumulate(pair_rise[order])

    nodes = np.concatenate([[0.0], np.unique(pair_gap)])
    kinks = []
    for lo, hi in zip(nodes[:-1], nodes[1:]):
        mid = 0.5 * (lo + hi)
        m, c = _shift_lines(f, mid)
        reached = np.searchsorted(pair_gap, lo, side='right')
        constant = best_pair[reached - 1] if reached > 0 else 0.0
        m = np.append(m, 0.0)
        c = np.append(c, constant)

        # Highest intercept per slope, then the upper hull in (slope, intercept)
        order = np.lexsort((c, m))
        m, c = m[order], c[order]
        keep = np.append(m[1:] != m[:-1], True)
        m, c = m[keep], c[keep]
        hull = upper_hull_indices(m, c)
        for a, b in zip(hull[:-1], hull[1:]):
            crossing = (c[a] - c[b]) / (m[b] - m[a])
            if lo < crossing < hi:
                kinks.append(crossing)

    offsets = np.unique(np.concatenate([nodes, kinks]))
    return ModulusTable.from_values(offsets, minimal_modulus_values(f, offsets))


def _scan_pairs(xs: np.ndarray, ys: np.ndarray,
                score: Callable[[np.ndarray, np.ndarray], np.ndarray],
                max_gap: float = np.inf) -> Tuple[float, int, int]:
    """Maximum of score(gap, |rise|) over breakpoint pairs i < j with gap <= max_gap.

    Rows are processed in blocks; ties keep the first pair in row order.

    Returns:
        (best score, i, j); best is -inf when no pair qualifies
    """
    n = xs.size
    reach = np.minimum(np.searchsorted(xs, xs + max_gap, side='right') - 1, n - 1)
    best, best_i, best_j = -np.inf, -1, -1

    r0 = 0
    while r0 < n - 1:
        width = max(1, int(reach[r0]) - r0)
        r1 = min(n - 1, r0 + max(1, _BLOCK_ELEMENTS // width))
        c0, c1 = r0 + 1, int(reach[r1 - 1]) + 1
        if c1 > c0:
            i = np.arange(r0, r1)[:, None]
            j = np.arange(c0, c1)[None, :]
            valid = (j > i) & (j <= reach[r0:r1, None])
            gap = np.where(valid, xs[j] - xs[i], 0.0)
            rise = np.abs(ys[j] - ys[i])
            values = np.where(valid, score(gap, rise), -np.inf)
            k = int(np.argmax(values))
            if values.flat[k] > best:
                best = float(values.flat[k])
                best_i, best_j = r0 + k // (c1 - c0), c0 + k % (c1 - c0)
        r0 = r1

    return best, best_i, best_j


def _first_offset_reaching(w: ModulusSpec, level: float, upper: float, iters: int = 80) -> float:
    """Smallest h in [0, upper] with w(h) >= level (upper if none), by bisection."""
    if w.evaluate(upper) < level:
        return upper
    lo, hi = 0.0, upper
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if w.evaluate(mid) >= level:
            hi = mid
        else:
            lo = mid
    return hi


def modulus_gap(f: PiecewiseLinear, w: ModulusSpec) -> Tuple[float, float]:
    """Largest |f(x_j) - f(x_i)| - w(x_j - x_i) over breakpoint pairs.

    For concave w this is the supremum of omega_f(h) - w(h) over all
    positive h: on each lattice cell the difference is convex, so it peaks
    at breakpoint pairs. Pairs farther apart than the offset where w first
    exceeds the range of f cannot win once a non-negative gap is found and
    are scanned only when needed.

    Returns:
        (worst gap, offset at which it occurs)
    """
    xs, ys = f.xs, f.ys

    def score(gap, rise):
        return rise - w.evaluate_many(gap)

    far = _first_offset_reaching(w, float(np.ptp(ys)), f.length)
    best, i, j = _scan_pairs(xs, ys, score, max_gap=far)
    if best < 0 and far < f.length:
        best, i, j = _scan_pairs(xs, ys, score)
    return best, float(xs[j] - xs[i])


def holder_seminorm(f: PiecewiseLinear, alpha: float) -> Tuple[float, float, float]:
    """Exact alpha-Hoelder seminorm sup |f(x) - f(y)| / |x - y|^alpha.

    For piecewise-linear f the ratio peaks at breakpoint pairs. Adjacent
    pairs give a lower bound K0; pairs farther apart than (range/K0)^(1/alpha)
    cannot beat it and are skipped.

    Returns:
        (seminorm, x, y) with the maximising pair x < y
    """
    if not 0 < alpha <= 1:
        raise ArgumentError(f"alpha must lie in (0, 1], got {alpha}")

    xs, ys = f.xs, f.ys
    adjacent = np.abs(np.diff(ys)) / np.power(np.diff(xs), alpha)
    k = int(np.argmax(adjacent))
    lower = float(adjacent[k])
    if lower == 0.0:
        return 0.0, float(xs[0]), float(xs[1])

    far = (float(np.ptp(ys)) / lower) ** (1.0 / alpha)
    best, i, j = _scan_pairs(xs, ys, lambda gap, rise: rise / np.power(np.where(gap > 0, gap, 1.0), alpha),
                             max_gap=far)
    if best < lower:
        return lower, float(xs[k]), float(xs[k + 1])
    return best, float(xs[i]), float(xs[j])


@dataclass
class ModulusCheck:
    """Outcome of checking that w is a modulus of continuity for f."""

    ok: bool
    worst_gap: float
    worst_h: float
    slack: float

    def to_dict(self) -> dict:
        return asdict(self)


def is_modulus_for(w: ModulusSpec, f: PiecewiseLinear, grid_n: Optional[int] = None,
                   tol: float = DEFAULT_EQ_TOL) -> ModulusCheck:
    """Check omega_f(h) <= w(h) + tol.

    Checked over breakpoint pairs (exact for concave w) and a uniform grid
    of grid_n offsets over the domain length. Every candidate offset is
    checked as well, block by block, whenever w is not known to be concave
    or f is small. Reports the offset with the worst signed gap.
    """
    grid_n = grid_n or ToleranceConfig.grid_n
    worst, worst_h = modulus_gap(f, w)

    blocks = [np.linspace(0.0, f.length, grid_n + 1)[1:]]
    if not w.is_concave or len(f) <= _SMALL_FUNCTION:
        blocks = itertools.chain(blocks, _candidate_offset_blocks(f))
    for offsets in blocks:
        gaps = minimal_modulus_values(f, offsets) - w.evaluate_many(offsets)
        k = int(np.argmax(gaps))
        if gaps[k] > worst:
            worst, worst_h = float(gaps[k]), float(offsets[k])

    ok = worst <= tol
    level = logging.DEBUG if ok else logging.WARNING
    logger.log(level, f"Modulus check: worst gap {format_gap(worst)} at h = {worst_h!r} (tol {tol})")
    return ModulusCheck(ok=ok, worst_gap=worst, worst_h=worst_h, slack=tol)


def _require_table(w: ModulusSpec, operation: str) -> TabulatedModulus:
    if not isinstance(w, TabulatedModulus):
        raise ArgumentError(f"{operation} needs a tabulated modulus with a constant tail, got {w.kind!r}")
    return w


def omega_of_omega(w: ModulusSpec) -> ModulusTable:
    """Minimal modulus of w itself, sup over x >= 0 of w(x + h) - w(x).

    Evaluated exactly at the table nodes. Beyond the table end w is
    constant, so offsets past it give the full rise w(H) - w(0).

    Raises:
        ArgumentError: If w is not a tabulated modulus
    """
    table = _require_table(w, "omega_of_omega").table
    values = minimal_modulus_values(table, table.xs)
    return ModulusTable.from_values(table.xs, values)


def check_reproducing(w: ModulusSpec, tol: float = DEFAULT_EQ_TOL) -> Tuple[bool, float]:
    """Whether omega_of_omega(w) matches w at the nodes within tol.

    Returns:
        (reproducing, largest node-wise difference)
    """
    table = _require_table(w, "check_reproducing")
    gap = float(np.max(np.abs(omega_of_omega(table).values - table.values)))
    return gap <= tol, gap


def eventually_constant_majorant(w: ModulusSpec, sup_norm: Optional[float] = None,
                                 grid: Optional[Sequence[float]] = None,
                                 tol: float = DEFAULT_EQ_TOL) -> ModulusTable:
    """Majorant w(h) + (sup_norm - w(1)) h on [0, 1], constant sup_norm beyond.

    sup_norm must bound w on [0, 1]; for tabulated w it defaults to the
    table maximum. Only [0, 1] is inspected: an analytic w that keeps
    growing past h = 1 (log-reciprocal, power) is not majorised there, and
    the result lies below w for h > 1 unless sup_norm also bounds w on
    [0, inf). Offsets past 1 never arise for functions on [0, 1].

    Args:
        w: Bounded modulus
        sup_norm: Certified upper bound of w
        grid: Nodes in [0, 1] (default ToleranceConfig().table_grid())

    Raises:
        ArgumentError: If sup_norm is missing for an analytic w or below w(1)
    """
    if sup_norm is None:
        if not isinstance(w, TabulatedModulus):
            raise ArgumentError(f"sup_norm is required for a {w.kind!r} modulus")
        sup_norm = w.tail
    sup_norm = float(sup_norm)

    nodes = ToleranceConfig().table_grid() if grid is None else np.asarray(grid, dtype=float)
    nodes = nodes[(nodes >= 0) & (nodes <= 1)]
    if isinstance(w, TabulatedModulus):
        nodes = np.concatenate([nodes, w.nodes[w.nodes <= 1]])
    nodes = np.unique(np.concatenate([[0.0, 1.0], nodes]))

    at_one = w.evaluate(1.0)
    if sup_norm < at_one - tol:
        raise ArgumentError(f"sup_norm {sup_norm!r} is below w(1) = {at_one!r}")

    base = w.evaluate_many(nodes)
    if base.max() > sup_norm + tol:
        raise ArgumentError(f"sup_norm {sup_norm!r} does not bound w (w reaches {base.max()!r})")

    values = base + max(sup_norm - at_one, 0.0) * nodes
    values[-1] = max(sup_norm, values[-2])
    logger.debug(f"Eventually-constant majorant: w(1) = {at_one!r}, sup = {sup_norm!r}, {nodes.size} nodes")
    return ModulusTable.from_values(nodes, values)


def concave_majorant(w: ModulusSpec, tol: float = DEFAULT_EQ_TOL) -> ModulusTable:
    """Least concave majorant of a tabulated modulus, constant beyond h = 1.

    Upper concave envelope of the table nodes (including the tail start),
    re-evaluated at the original nodes up to h = 1.
    """
    table = _require_table(w, "concave_majorant")
    xs, ys = table.nodes, table.values

    if xs[-1] > 1.0:
        at_one = float(np.interp(1.0, xs, ys))
        xs = np.concatenate([xs[xs < 1.0], [1.0]])
        ys = np.concatenate([ys[:xs.size - 1], [max(at_one, table.tail)]])

    hull = upper_hull_indices(xs, ys)
    values = np.maximum(np.interp(xs, xs[hull], ys[hull]), ys)

    defects = concavity_defects(xs, values)
    concave = bool(defects.size == 0 or defects.max() <= min(tol, DEFAULT_EQ_TOL))
    if not concave:
        logger.warning(f"Concave majorant has second-difference defect {format_gap(defects.max())}")

    flags = ModulusFlags(subadditive_checked=concave, concave_checked=concave)
    return ModulusTable.from_values(xs, values, flags)


@dataclass
class ConcavityReport:
    """Findings of check_concavity_facts."""

    increment_violations: List[Tuple[float, float, float]] = field(default_factory=list)
    lipschitz: Dict[float, float] = field(default_factory=dict)
    slope_at: Dict[float, float] = field(default_factory=dict)
    samples: int = 0

    @property
    def increments_ok(self) -> bool:
        return not self.increment_violations

    @property
    def lipschitz_matches_slope(self) -> bool:
        return all(abs(self.lipschitz[e] - self.slope_at[e]) <= DEFAULT_EQ_TOL * max(1.0, self.lipschitz[e])
                   for e in self.lipschitz)

    @property
    def ok(self) -> bool:
        return self.increments_ok and self.lipschitz_matches_slope

    def to_dict(self) -> dict:
        return {
            "increment_violations": [list(t) for t in self.increment_violations],
            "lipschitz": {repr(e): v for e, v in self.lipschitz.items()},
            "slope_at": {repr(e): v for e, v in self.slope_at.items()},
            "samples": self.samples,
            "ok": self.ok,
        }


def check_concavity_facts(g: ModulusSpec, eps: Sequence[float] = (0.1, 0.01, 0.001),
                          samples: int = 2000, seed: int = 0,
                          tol: float = DEFAULT_EQ_TOL, max_reported: int = 10) -> ConcavityReport:
    """Check the consequences of concavity on a tabulated modulus.

    (i) Decreasing increments: g(x + h) - g(x) <= g(y + h) - g(y) for
        x >= y, h >= 0, on random triples plus one triple per interior node
        (the node, its left neighbour, the smaller adjacent gap).
    (ii) Lipschitz constant on [eps, 1] equals the right slope at eps.
    """
    table = _require_table(g, "check_concavity_facts")
    if isinstance(g, ModulusTable) and not g.flags.concave_checked:
        logger.debug("check_concavity_facts on a table not flagged concave")

    xs = table.nodes
    span = max(1.0, table.end)
    rng = np.random.default_rng(seed)
    y = rng.uniform(0.0, span, samples)
    x = y + rng.uniform(0.0, 1.0, samples) * (span - y)
    h = rng.uniform(0.0, span, samples)

    if xs.size >= 3:
        gap = np.minimum(np.diff(xs)[:-1], np.diff(xs)[1:])
        x = np.concatenate([x, xs[1:-1]])
        y = np.concatenate([y, xs[:-2]])
        h = np.concatenate([h, gap])

    lhs = table.evaluate_many(x + h) - table.evaluate_many(x)
    rhs = table.evaluate_many(y + h) - table.evaluate_many(y)
    excess = lhs - rhs
    bad = np.flatnonzero(excess > tol)
    bad = bad[np.argsort(-excess[bad], kind='stable')][:max_reported]

    report = ConcavityReport(samples=int(x.size))
    report.increment_violations = [(float(x[k]), float(y[k]), float(h[k])) for k in bad]

    slopes = np.concatenate([np.abs(table.table.slopes()), [0.0]])
    seg_left = xs
    seg_right = np.append(xs[1:], np.inf)
    for e in eps:
        e = float(e)
        touching = (seg_right > e) & (seg_left < 1.0)
        report.lipschitz[e] = float(slopes[touching].max()) if np.any(touching) else 0.0
        report.slope_at[e] = float(slopes[np.searchsorted(xs, e, side='right') - 1])

    if report.increment_violations:
        logger.warning(f"{len(bad)} decreasing-increment violations, worst {format_gap(excess[bad[0]])}")
    return report
