"""Construction of a function with a prescribed modulus and variation function.

Given a concave modulus w with omega(h)/h -> inf and a second modulus w',
the target variation function V is the concave majorant of omega_omega of
the eventually-constant majorant of w'. Anchors 1 = x_0 > x_1 > ... are
chosen greedily: from x_n, x_{n+1} is the smallest x whose rising step
V(x + h) - V(x) stays below w(h) up to the variation midpoint y of
[x, x_n]. On [x_{n+1}, x_n], f rises along V up to y_{n+1} and falls back
to 0 at x_n, so var_f = V - V(x_last) on [x_last, 1].
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple
import logging

import numpy as np
from tqdm import tqdm

from ..config.settings import ToleranceConfig
from ..errors import ArgumentError
from ..models.modulus_spec import ModulusSpec, ModulusTable, TabulatedModulus
from ..models.piecewise import DEFAULT_EQ_TOL, PiecewiseLinear
from ..utils.formatters import format_gap
from .modulus import (
    check_reproducing,
    concave_majorant,
    eventually_constant_majorant,
    minimal_modulus_values,
    modulus_gap,
    omega_of_omega,
)
from .variation import variation_function

logger = logging.getLogger(__name__)


class Termination(str, Enum):
    """Why the anchor iteration stopped."""
    REACHED_ZERO = "ReachedZero"
    BELOW_STOP_X = "BelowStopX"
    MAX_ITERS = "MaxIters"


@dataclass
class AnchorSequence:
    """Anchors 1 = x_0 > x_1 > ... and midpoints y_n in [x_n, x_{n-1}].

    midpoints[k] belongs to the interval [anchors[k + 1], anchors[k]].
    """

    anchors: List[float]
    midpoints: List[float]
    terminated: Termination

    @property
    def last(self) -> float:
        return self.anchors[-1]

    def to_dict(self) -> dict:
        return {"anchors": list(self.anchors), "midpoints": list(self.midpoints),
                "terminated": self.terminated.value}


@dataclass(frozen=True)
class Segment:
    """f = sign * V + offset on [lo, hi]."""

    lo: float
    hi: float
    sign: int
    offset: float

    def evaluate(self, V: ModulusSpec, z: float) -> float:
        return self.sign * V.evaluate(z) + self.offset

    def to_dict(self) -> dict:
        return {"interval": [self.lo, self.hi], "sign": self.sign, "offset": self.offset}


@dataclass
class Diagnostics:
    """Verification outcomes attached to a construction."""

    modulus_worst_gap: float = 0.0
    modulus_worst_h: float = 0.0
    modulus_slack: float = 0.0
    varfn_worst_gap: float = 0.0
    varfn_worst_x: float = 0.0
    varfn_slack: float = 0.0
    truncation_var_error: float = 0.0
    hypothesis_warning: bool = False
    reproducing_gap: float = 0.0

    @property
    def modulus_ok(self) -> bool:
        return self.modulus_worst_gap <= self.modulus_slack

    @property
    def varfn_ok(self) -> bool:
        return self.varfn_worst_gap <= self.varfn_slack

    @property
    def ok(self) -> bool:
        return self.modulus_ok and self.varfn_ok

    def to_dict(self) -> dict:
        return {
            "modulus_check": {"worst_gap": self.modulus_worst_gap, "worst_h": self.modulus_worst_h,
                              "slack": self.modulus_slack, "ok": self.modulus_ok},
            "varfn_check": {"worst_gap": self.varfn_worst_gap, "worst_x": self.varfn_worst_x,
                            "slack": self.varfn_slack, "ok": self.varfn_ok},
            "truncation_var_error": self.truncation_var_error,
            "hypothesis_warning": self.hypothesis_warning,
            "reproducing_gap": self.reproducing_gap,
            "ok": self.ok,
        }


@dataclass
class VerificationReport:
    """Worst signed gap of one verification and where it occurs."""

    worst_gap: float
    at: float
    slack: float

    @property
    def ok(self) -> bool:
        return self.worst_gap <= self.slack


@dataclass
class ConstructionResult:
    """Everything a construction run produces."""

    V: ModulusTable
    anchors: AnchorSequence
    f: PiecewiseLinear
    segments: List[Segment]
    diagnostics: Diagnostics = field(default_factory=Diagnostics)

    def to_dict(self) -> dict:
        """Anchors, midpoints, termination and segments (f and V are written separately)."""
        data = self.anchors.to_dict()
        data["segments"] = [s.to_dict() for s in self.segments]
        return data


def prepare_target_modulus(w_prime: ModulusSpec, sup_norm: Optional[float] = None,
                           cfg: Optional[ToleranceConfig] = None) -> ModulusTable:
    """V = concave majorant of omega_omega of the eventually-constant majorant of w'.

    Tabulated on cfg.table_grid() over [0, 1], constant beyond. The table is
    flagged reproducing only when the node-wise check passes.
    """
    cfg = cfg or ToleranceConfig()
    majorant = eventually_constant_majorant(w_prime, sup_norm, cfg.table_grid(), cfg.eq_tol)
    V = concave_majorant(omega_of_omega(majorant), cfg.eq_tol)

    reproducing, gap = check_reproducing(V, cfg.eq_tol)
    if reproducing:
        V = V.with_flags(reproducing_checked=True)
    else:
        logger.warning(f"Target modulus is not reproducing (node gap {format_gap(gap)})")

    below = float(np.max(majorant.values - V.evaluate_many(majorant.nodes)))
    if below > cfg.eq_tol:
        logger.warning(f"Target modulus falls below the majorant of w' by {format_gap(below)}")

    logger.info(f"Target modulus V: {len(V.nodes)} nodes, V(1) = {V.evaluate(1.0)!r}")
    return V


def find_midpoint(V: TabulatedModulus, x: float, x_n: float) -> float:
    """Smallest y in [x, x_n] with V(y) = (V(x) + V(x_n)) / 2.

    V is piecewise linear, so the crossing is located on the nodes and then
    inverted exactly on its segment.
    """
    if not 0 <= x <= x_n:
        raise ArgumentError(f"Need 0 <= x <= x_n, got x = {x!r}, x_n = {x_n!r}")

    v_lo, v_hi = V.evaluate(x), V.evaluate(x_n)
    target = 0.5 * (v_lo + v_hi)
    if target <= v_lo:
        return float(x)

    nodes = V.nodes
    inner = nodes[(nodes > x) & (nodes < x_n)]
    xs = np.concatenate([[x], inner, [x_n]])
    ys = V.evaluate_many(xs)
    k = int(np.searchsorted(ys, target, side="left"))
    k = min(max(k, 1), xs.size - 1)
    left, right = xs[k - 1], xs[k]
    rise = ys[k] - ys[k - 1]
    if rise <= 0:
        return float(right)
    y = left + (target - ys[k - 1]) * (right - left) / rise
    return float(min(max(y, left), right))


def anchor_step_gap(V: TabulatedModulus, w: ModulusSpec, x: float, x_n: float,
                    h_grid_n: Optional[int] = None) -> float:
    """Worst V(x + h) - V(x) - w(h) over h in [0, y - x], y the midpoint for x.

    Offsets are a uniform grid of h_grid_n points plus every offset landing
    on a node of V. Returns 0 when the step is empty.
    """
    h_grid_n = h_grid_n or ToleranceConfig.grid_n
    y = find_midpoint(V, x, x_n)
    span = y - x
    if span <= 0:
        return 0.0

    nodes = V.nodes
    hs = np.concatenate([np.linspace(0.0, span, h_grid_n), nodes[(nodes > x) & (nodes < y)] - x])
    rise = V.evaluate_many(x + hs) - V.evaluate(x)
    return float(np.max(rise - w.evaluate_many(hs)))


def in_admissible_set(V: TabulatedModulus, w: ModulusSpec, x: float, x_n: float,
                      h_grid_n: Optional[int] = None, tol: float = DEFAULT_EQ_TOL) -> bool:
    """Whether the rising step from x keeps within w up to the midpoint."""
    return anchor_step_gap(V, w, x, x_n, h_grid_n) <= tol


def next_anchor(V: TabulatedModulus, w: ModulusSpec, x_n: float,
                cfg: Optional[ToleranceConfig] = None) -> Tuple[float, float]:
    """Next anchor and its midpoint below x_n.

    Scans a uniform grid on [0, x_n] upward for the first admissible x, then
    bisects against the grid point below it. The admissible end of the final
    bracket is returned, so the result is a member approximating the
    infimum from above within bisect_tol.

    Returns:
        (x_{n+1}, y_{n+1})
    """
    cfg = cfg or ToleranceConfig()

    def member(x: float) -> bool:
        return in_admissible_set(V, w, x, x_n, cfg.grid_n, cfg.eq_tol)

    grid = np.linspace(0.0, x_n, cfg.grid_n)
    first = next(k for k, x in enumerate(grid) if k == grid.size - 1 or member(float(x)))

    if first == 0:
        x_next = 0.0
    else:
        lo, hi = float(grid[first - 1]), float(grid[first])
        while hi - lo > cfg.bisect_tol:
            mid = 0.5 * (lo + hi)
            if not lo < mid < hi:
                break
            if member(mid):
                hi = mid
            else:
                lo = mid
        x_next = hi

    return x_next, find_midpoint(V, x_next, x_n)


def check_superlinear_hypothesis(w: ModulusSpec) -> bool:
    """Advisory check that w(h)/h keeps growing as h -> 0.

    Samples h = 10^-1 .. 10^-8 and requires the last four ratios to be
    strictly increasing.
    """
    hs = 10.0 ** -np.arange(1, 9)
    ratios = w.evaluate_many(hs) / hs
    ok = bool(np.all(np.diff(ratios[-4:]) > 0))
    if not ok:
        logger.warning(f"w(h)/h does not appear to diverge as h -> 0 (ratios {ratios[-4:].tolist()})")
    return ok


def _assemble_segments(V: ModulusTable, anchors: AnchorSequence) -> List[Segment]:
    segments = []
    for k, y in enumerate(anchors.midpoints):
        hi, lo = anchors.anchors[k], anchors.anchors[k + 1]
        if y > lo:
            segments.append(Segment(lo, y, 1, -V.evaluate(lo)))
        if hi > y:
            segments.append(Segment(y, hi, -1, V.evaluate(hi)))
    if anchors.last > 0:
        segments.append(Segment(0.0, anchors.last, 0, 0.0))
    return sorted(segments, key=lambda s: (s.lo, s.hi))


def _discretize(V: ModulusTable, anchors: AnchorSequence) -> PiecewiseLinear:
    """f on V's nodes, the anchors, the midpoints and 0."""
    asc = np.asarray(anchors.anchors[::-1], dtype=float)
    mids = np.asarray(anchors.midpoints[::-1], dtype=float)
    last = asc[0]

    nodes = V.nodes
    mesh = np.unique(np.concatenate([[0.0], nodes[(nodes >= last) & (nodes <= 1.0)], asc, mids]))
    values = np.zeros(mesh.size)

    if mids.size:
        upper = mesh >= last
        z = mesh[upper]
        j = np.clip(np.searchsorted(asc, z, side="right") - 1, 0, mids.size - 1)
        rising = V.evaluate_many(z) - V.evaluate_many(asc[j])
        falling = V.evaluate_many(asc[j + 1]) - V.evaluate_many(z)
        values[upper] = np.maximum(np.where(z <= mids[j], rising, falling), 0.0)

        values[np.isin(mesh, asc)] = 0.0
        at_mid = np.searchsorted(mesh, mids)
        values[at_mid] = np.maximum(V.evaluate_many(mids) - V.evaluate_many(asc[:-1]), 0.0)

    return PiecewiseLinear(mesh, values)


def _omega_resolution(w: ModulusSpec, cfg: ToleranceConfig) -> float:
    """Largest w increment across one membership grid step; 0 for concave w."""
    if w.is_concave:
        return 0.0
    hs = np.linspace(0.0, 1.0, cfg.grid_n)
    return float(np.max(np.diff(w.evaluate_many(hs))))


def verify_modulus_bound(result: ConstructionResult, w: ModulusSpec,
                         cfg: Optional[ToleranceConfig] = None) -> VerificationReport:
    """Worst omega_f(h) - w(h), over breakpoint pairs and a uniform offset grid."""
    cfg = cfg or ToleranceConfig()
    slack = cfg.eq_tol + _omega_resolution(w, cfg)
    f = result.f

    worst, at = modulus_gap(f, w)
    offsets = np.linspace(0.0, f.length, cfg.grid_n + 1)[1:]
    gaps = minimal_modulus_values(f, offsets) - w.evaluate_many(offsets)
    k = int(np.argmax(gaps))
    if gaps[k] > worst:
        worst, at = float(gaps[k]), float(offsets[k])

    report = VerificationReport(worst_gap=float(worst), at=at, slack=slack)
    logger.info(f"Modulus bound: worst gap {format_gap(report.worst_gap)} at h = {at!r} "
                f"({'ok' if report.ok else 'FAILED'})")
    return report


def verify_variation_equals_V(result: ConstructionResult,
                              cfg: Optional[ToleranceConfig] = None) -> VerificationReport:
    """Worst |var_f(x) - V(x)| on [x_last, 1]; exact up to V(x_last)."""
    cfg = cfg or ToleranceConfig()
    V = result.V
    last = result.anchors.last
    slack = V.evaluate(last) + cfg.eq_tol

    xs = np.union1d(np.linspace(last, 1.0, cfg.grid_n), result.anchors.anchors)
    profile = variation_function(result.f).profile
    diffs = np.abs(profile.evaluate_many(xs) - V.evaluate_many(xs))
    k = int(np.argmax(diffs))

    report = VerificationReport(worst_gap=float(diffs[k]), at=float(xs[k]), slack=slack)
    logger.info(f"Variation function: worst |var_f - V| {format_gap(report.worst_gap)} at x = {xs[k]!r} "
                f"({'ok' if report.ok else 'FAILED'})")
    return report


def build(w: ModulusSpec, w_prime: ModulusSpec, sup_norm: Optional[float] = None,
          cfg: Optional[ToleranceConfig] = None, progress: bool = False) -> ConstructionResult:
    """Construct f with omega_f <= w and var_f = V on [x_last, 1].

    Args:
        w: Concave modulus of continuity for f
        w_prime: Modulus shaping the variation function
        sup_norm: Upper bound of w' on [0, 1] (defaults to the table maximum
            for a tabulated w')
        cfg: Tolerances, grid density and stopping rules
        progress: Show a progress bar over anchors

    Returns:
        ConstructionResult with diagnostics filled in

    Raises:
        ArgumentError: If the tolerances are invalid
    """
    cfg = cfg or ToleranceConfig()
    errors = cfg.validate()
    if errors:
        raise ArgumentError("; ".join(errors))
    if not w.is_concave:
        logger.warning("w is not concave; the modulus check allows an extra grid-resolution slack")

    hypothesis_ok = check_superlinear_hypothesis(w)
    V = prepare_target_modulus(w_prime, sup_norm, cfg)

    anchors, midpoints = [1.0], []
    with tqdm(desc="anchors", unit="anchor", disable=not progress) as bar:
        while True:
            x_n = anchors[-1]
            if x_n == 0.0:
                terminated = Termination.REACHED_ZERO
                break
            if x_n <= cfg.stop_x:
                terminated = Termination.BELOW_STOP_X
                break
            if len(midpoints) >= cfg.max_anchors:
                terminated = Termination.MAX_ITERS
                break

            x_next, y_next = next_anchor(V, w, x_n, cfg)
            if x_n - x_next < cfg.bisect_tol:
                logger.warning(f"Anchor iteration stalled at x = {x_n!r}")
                terminated = Termination.MAX_ITERS
                break

            anchors.append(x_next)
            midpoints.append(y_next)
            bar.update(1)
            logger.debug(f"Anchor {len(midpoints)}: x = {x_next!r}, y = {y_next!r}")

    sequence = AnchorSequence(anchors=anchors, midpoints=midpoints, terminated=terminated)
    logger.info(f"{len(midpoints)} anchors, terminated: {terminated.value}, x_last = {sequence.last!r}")

    result = ConstructionResult(V=V, anchors=sequence, f=_discretize(V, sequence),
                                segments=_assemble_segments(V, sequence))

    modulus = verify_modulus_bound(result, w, cfg)
    varfn = verify_variation_equals_V(result, cfg)
    _, reproducing_gap = check_reproducing(V, cfg.eq_tol)
    result.diagnostics = Diagnostics(
        modulus_worst_gap=modulus.worst_gap, modulus_worst_h=modulus.at, modulus_slack=modulus.slack,
        varfn_worst_gap=varfn.worst_gap, varfn_worst_x=varfn.at, varfn_slack=varfn.slack,
        truncation_var_error=V.evaluate(sequence.last),
        hypothesis_warning=not hypothesis_ok,
        reproducing_gap=reproducing_gap,
    )
    return result
