"""Tests for minimal moduli, modulus checks and the majorant pipeline."""

import numpy as np
import pytest

from bvkit.analysis.counterexample import (
    CounterexampleSpec,
    build_counterexample,
    closing_holder_constant,
    holder_seminorm_nodes,
)
from bvkit.analysis.modulus import (
    candidate_offsets,
    check_concavity_facts,
    check_reproducing,
    concave_majorant,
    eventually_constant_majorant,
    holder_seminorm,
    is_modulus_for,
    minimal_modulus,
    minimal_modulus_profile,
    minimal_modulus_table,
    minimal_modulus_values,
    modulus_gap,
    omega_of_omega,
    upper_hull_indices,
)
from bvkit.analysis.variation import lipschitz_constant
from bvkit.errors import ArgumentError, DomainError
from bvkit.models import (
    LinearModulus,
    LogReciprocalModulus,
    ModulusTable,
    PiecewiseLinear,
    PowerModulus,
    TabulatedModulus,
)
from bvkit.models.modulus_spec import concavity_defects

IDENTITY = PiecewiseLinear.from_points([(0.0, 0.0), (1.0, 1.0)])
PEAK = PiecewiseLinear.from_points([(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)])
UNIT = np.linspace(0.0, 1.0, 101)


def brute_force_modulus(f: PiecewiseLinear, h: float, n: int = 2001) -> float:
    """sup |f(x) - f(y)| over grid pairs at most h apart."""
    xs = np.linspace(f.xs[0], f.xs[-1], n)
    ys = f.evaluate_many(xs)
    step = xs[1] - xs[0]
    reach = int(np.floor(h / step + 1e-9))
    best = 0.0
    for k in range(1, min(reach, n - 1) + 1):
        best = max(best, float(np.max(np.abs(ys[k:] - ys[:-k]))))
    return best


def table_of(values_fn, nodes=UNIT) -> TabulatedModulus:
    return TabulatedModulus.from_values(nodes, values_fn(nodes))


@pytest.fixture
def random_moduli(rng):
    """Random bounded tabulated moduli on [0, 1] with a constant tail."""
    def make(count: int):
        moduli = []
        for _ in range(count):
            nodes = np.unique(np.concatenate([[0.0, 1.0], rng.uniform(0.0, 1.0, int(rng.integers(1, 20)))]))
            values = np.concatenate([[0.0], np.cumsum(rng.exponential(1.0, nodes.size - 1))])
            moduli.append(TabulatedModulus.from_values(nodes, values))
        return moduli
    return make


class TestMinimalModulus:
    def test_identity(self):
        assert minimal_modulus(IDENTITY, 0.3) == pytest.approx(0.3, abs=1e-15)

    @pytest.mark.parametrize("h, expected", [(0.2, 0.4), (0.7, 1.0)])
    def test_peak(self, h, expected):
        assert minimal_modulus(PEAK, h) == pytest.approx(expected, abs=1e-15)
        assert minimal_modulus(PEAK, h) == pytest.approx(brute_force_modulus(PEAK, h), abs=1e-6)

    def test_zero_offset(self, random_functions):
        for f in random_functions(10):
            assert minimal_modulus(f, 0.0) == 0.0

    def test_clamps_beyond_length(self):
        assert minimal_modulus(PEAK, 5.0) == 1.0

    def test_negative_offset(self):
        with pytest.raises(DomainError):
            minimal_modulus(PEAK, -0.1)

    def test_matches_brute_force(self, random_functions, rng):
        for f in random_functions(5, max_breakpoints=12):
            # grid pairs miss the supremum by at most two grid steps of slope
            resolution = 2.0 * lipschitz_constant(f) * (f.length / 2000)
            for h in rng.uniform(0.0, 1.0, 5):
                exact = minimal_modulus(f, h)
                sampled = brute_force_modulus(f, h)
                assert exact >= sampled - 1e-12
                assert exact <= sampled + resolution + 1e-12

    def test_candidate_offsets(self):
        np.testing.assert_array_equal(candidate_offsets(PEAK), [0.5, 1.0])


class TestMinimalModulusTable:
    GRID = [0.0, 0.25, 0.5, 1.0]

    def test_identity(self):
        table = minimal_modulus_table(IDENTITY, self.GRID)
        np.testing.assert_allclose(table.values, [0.0, 0.25, 0.5, 1.0], atol=1e-15)

    def test_peak(self):
        table = minimal_modulus_table(PEAK, self.GRID)
        np.testing.assert_allclose(table.values, [0.0, 0.5, 1.0, 1.0], atol=1e-15)
        assert table(3.0) == 1.0

    def test_constant(self):
        table = minimal_modulus_table(PiecewiseLinear.constant(0.0, 1.0, 2.0), self.GRID)
        np.testing.assert_array_equal(table.values, 0.0)

    def test_bad_grid(self):
        with pytest.raises(ArgumentError):
            minimal_modulus_table(PEAK, [0.1, 0.5])

    def test_subadditive(self, random_functions):
        for f in random_functions(100):
            values = minimal_modulus_table(f, np.linspace(0.0, 1.0, 201)).values
            i, j = np.meshgrid(np.arange(201), np.arange(201), indexing='ij')
            inside = i + j <= 200
            total = values[(i + j)[inside]]
            assert np.all(total <= values[i[inside]] + values[j[inside]] + 1e-9)


class TestMinimalModulusProfile:
    def test_peak(self):
        profile = minimal_modulus_profile(PEAK)
        for h in np.linspace(0.0, 1.0, 41):
            assert profile(h) == pytest.approx(minimal_modulus(PEAK, h), abs=1e-12)

    def test_exact_between_nodes(self, random_functions, rng):
        for f in random_functions(20, max_breakpoints=10):
            profile = minimal_modulus_profile(f)
            hs = rng.uniform(0.0, f.length, 50)
            np.testing.assert_allclose(profile.evaluate_many(hs), minimal_modulus_values(f, hs), atol=1e-9)

    def test_reproducing(self, random_functions):
        for f in random_functions(100, max_breakpoints=20):
            reproducing, gap = check_reproducing(minimal_modulus_profile(f), tol=1e-9)
            assert reproducing, gap

    def test_minimality_against_covering_moduli(self, random_functions, rng):
        grid = np.linspace(0.0, 1.0, 257)
        for f in random_functions(100, max_breakpoints=20):
            holder, _, _ = holder_seminorm(f, 0.5)
            covering = [LinearModulus(lipschitz_constant(f) * (1 + rng.uniform()))
                        for _ in range(5)]
            covering += [PowerModulus(holder * (1 + rng.uniform()), 0.5) for _ in range(5)]
            own = minimal_modulus_values(f, grid)
            for w in covering:
                assert is_modulus_for(w, f, grid_n=256, tol=1e-9).ok
                assert np.all(own <= w.evaluate_many(grid) + 1e-9)


class TestModulusGap:
    def test_zero_function(self):
        f = PiecewiseLinear.from_points([(0.0, 0.0), (0.25, 0.0), (1.0, 0.0)])
        gap, h = modulus_gap(f, PowerModulus(1.0, 0.5))
        assert gap == pytest.approx(-0.5)
        assert h == 0.25

    def test_peak_against_linear(self):
        gap, h = modulus_gap(PEAK, LinearModulus(1.0))
        assert gap == pytest.approx(0.5)
        assert h == 0.5


class TestIsModulusFor:
    def test_identity_linear(self):
        check = is_modulus_for(LinearModulus(1.0), IDENTITY)
        assert check.ok
        assert check.worst_gap <= 1e-15

    def test_peak_violates_linear(self):
        check = is_modulus_for(LinearModulus(1.0), PEAK)
        assert not check.ok
        assert check.worst_gap == pytest.approx(0.5)

    def test_counterexample_is_holder(self):
        ce = build_counterexample(CounterexampleSpec(alpha=0.5, beta=1.0, n_terms=200))
        bound = PowerModulus(closing_holder_constant(ce.spec), 0.5)
        assert is_modulus_for(bound, ce.f).ok

    def test_non_concave_bound_checked_at_every_breakpoint_gap(self):
        # ramp then flat; 0.78 - 0.5 is a breakpoint gap that misses the 1/16 grid
        xs = np.concatenate([[0.0, 0.5, 0.78], np.linspace(0.95, 1.0, 400)])
        f = PiecewiseLinear(xs, np.minimum(2.0 * xs, 1.0))
        # 2h except for a narrow dip around 0.28
        w = TabulatedModulus.from_values([0.0, 0.27, 0.285, 0.29, 1.0], [0.0, 0.54, 0.54, 0.58, 2.0])
        assert len(f) > 300 and not w.is_concave

        gap, _ = modulus_gap(f, w)
        assert gap <= 1e-9
        check = is_modulus_for(w, f, grid_n=16)
        assert not check.ok
        assert check.worst_gap == pytest.approx(0.02, abs=1e-9)
        assert check.worst_h == pytest.approx(0.28)

    def test_report_dict(self):
        data = is_modulus_for(LinearModulus(3.0), PEAK).to_dict()
        assert set(data) == {"ok", "worst_gap", "worst_h", "slack"}


class TestHolderSeminorm:
    def test_peak(self):
        value, x, y = holder_seminorm(PEAK, 1.0)
        assert value == 2.0

    def test_constant(self):
        value, _, _ = holder_seminorm(PiecewiseLinear.constant(0.0, 1.0), 0.5)
        assert value == 0.0

    def test_bad_exponent(self):
        with pytest.raises(ArgumentError):
            holder_seminorm(PEAK, 1.5)

    def test_counterexample_pairs_match_nodes(self):
        ce = build_counterexample(CounterexampleSpec(alpha=0.5, beta=1.0, n_terms=100))
        value, _, _ = holder_seminorm(ce.f, 0.5)
        assert value >= holder_seminorm_nodes(ce) - 1e-12
        assert value <= closing_holder_constant(ce.spec)
        hs = candidate_offsets(ce.f)[:2000]
        assert np.all(minimal_modulus_values(ce.f, hs) <= value * np.sqrt(hs) + 1e-12)


class TestOmegaOfOmega:
    def test_identity_table(self):
        w = table_of(lambda h: np.minimum(h, 1.0))
        np.testing.assert_allclose(omega_of_omega(w).values, w.values, atol=1e-15)

    def test_square_table(self):
        w = table_of(lambda h: h ** 2)
        ww = omega_of_omega(w)
        assert np.all(ww.values >= w.values - 1e-15)
        assert ww(1.0) == pytest.approx(1.0)
        assert ww(5.0) == w(5.0)

    def test_zero_table(self):
        w = table_of(np.zeros_like)
        np.testing.assert_array_equal(omega_of_omega(w).values, 0.0)

    def test_needs_table(self):
        with pytest.raises(ArgumentError):
            omega_of_omega(PowerModulus(1.0, 0.5))


class TestEventuallyConstantMajorant:
    def test_identity(self):
        w = table_of(lambda h: np.minimum(h, 1.0))
        m = eventually_constant_majorant(w, 1.0, grid=UNIT)
        np.testing.assert_allclose(m.evaluate_many(UNIT), UNIT, atol=1e-15)
        assert m(4.0) == 1.0

    def test_linear_half(self):
        m = eventually_constant_majorant(LinearModulus(0.5), 0.5, grid=UNIT)
        np.testing.assert_allclose(m.values, UNIT / 2, atol=1e-15)
        assert m(2.0) == 0.5

    def test_sqrt(self):
        m = eventually_constant_majorant(PowerModulus(1.0, 0.5), 1.0, grid=UNIT)
        np.testing.assert_allclose(m.values, np.sqrt(UNIT), atol=1e-15)
        assert m(3.0) == 1.0

    def test_correction_term(self):
        # w(1) = 0.5 below the bound 1: add 0.5 h on [0, 1]
        m = eventually_constant_majorant(LinearModulus(0.5), 1.0, grid=UNIT)
        np.testing.assert_allclose(m.values, UNIT, atol=1e-15)

    def test_sup_below_value_at_one(self):
        with pytest.raises(ArgumentError):
            eventually_constant_majorant(LinearModulus(1.0), 0.5, grid=UNIT)

    def test_sup_required_for_analytic(self):
        with pytest.raises(ArgumentError):
            eventually_constant_majorant(PowerModulus(1.0, 0.5))

    def test_sup_on_unit_interval_only(self):
        w = LogReciprocalModulus(1.0)
        sup = w(1.0)
        m = eventually_constant_majorant(w, sup, grid=UNIT)
        assert np.all(m.evaluate_many(UNIT) >= w.evaluate_many(UNIT) - 1e-15)
        # w keeps growing past 1, the majorant does not
        assert m(2.0) == pytest.approx(sup)
        assert m(2.0) < w(2.0)


class TestConcaveMajorant:
    def test_identity_unchanged(self):
        w = table_of(lambda h: np.minimum(h, 1.0))
        np.testing.assert_allclose(concave_majorant(w).values, w.values, atol=1e-15)

    def test_square_becomes_identity(self):
        c = concave_majorant(table_of(lambda h: h ** 2))
        np.testing.assert_allclose(c.values, UNIT, atol=1e-9)
        assert c.flags.concave_checked
        assert c.flags.subadditive_checked

    def test_concave_fixed_point(self):
        w = table_of(np.sqrt)
        np.testing.assert_allclose(concave_majorant(w).values, w.values, atol=1e-12)

    def test_clamps_beyond_one(self):
        w = TabulatedModulus.from_values([0.0, 0.5, 1.0, 2.0], [0.0, 0.2, 0.4, 1.0])
        c = concave_majorant(w)
        assert c.end == 1.0
        assert c(1.0) == 1.0
        assert c(2.0) == 1.0

    def test_upper_hull_ties_keep_earlier(self):
        xs = np.array([0.0, 1.0, 2.0, 3.0])
        ys = np.array([0.0, 1.0, 2.0, 2.0])
        assert upper_hull_indices(xs, ys) == [0, 1, 2, 3]

    def test_pipeline_on_random_moduli(self, random_moduli, rng):
        for w in random_moduli(100):
            majorant = eventually_constant_majorant(w, grid=np.linspace(0.0, 1.0, 65))
            pre = omega_of_omega(majorant)
            c = concave_majorant(pre)

            assert np.all(c.evaluate_many(w.nodes) >= w.values - 1e-12)
            assert c(0.0) == 0.0
            assert c(2.0) == c(1.0)
            assert np.max(concavity_defects(c.nodes, c.values), initial=0.0) <= 1e-9
            reproducing, gap = check_reproducing(c, tol=1e-9)
            assert reproducing, gap

            # envelope = infimum over affine majorants of the input
            hull_slopes = np.diff(c.values) / np.diff(c.nodes)
            slopes = np.concatenate([hull_slopes, rng.uniform(0.0, 2.0 * hull_slopes.max(), 10_000)])
            intercepts = np.max(pre.values[None, :] - slopes[:, None] * pre.nodes[None, :], axis=1)
            lowest = np.min(slopes[:, None] * c.nodes[None, :] + intercepts[:, None], axis=0)
            assert np.all(lowest >= c.values - 1e-9)
            assert np.all(lowest <= c.values + 1e-6)


class TestConcavityFacts:
    def test_identity(self):
        report = check_concavity_facts(table_of(lambda h: np.minimum(h, 1.0)))
        assert report.ok
        assert report.lipschitz[0.1] == pytest.approx(1.0)

    def test_sqrt_lipschitz_is_slope_at_eps(self):
        g = table_of(np.sqrt)
        report = check_concavity_facts(g)
        assert report.increments_ok
        assert report.lipschitz[0.01] == pytest.approx((np.sqrt(0.02) - np.sqrt(0.01)) / 0.01)
        assert report.lipschitz_matches_slope

    def test_non_concave_reports_triple(self):
        g = TabulatedModulus.from_values([0.0, 0.5, 1.0], [0.0, 0.1, 1.0])
        report = check_concavity_facts(g, samples=200)
        assert not report.increments_ok
        x, y, h = report.increment_violations[0]
        assert x >= y
        assert g(x + h) - g(x) > g(y + h) - g(y)

    def test_deterministic(self):
        g = TabulatedModulus.from_values([0.0, 0.5, 1.0], [0.0, 0.1, 1.0])
        assert check_concavity_facts(g, seed=3).to_dict() == check_concavity_facts(g, seed=3).to_dict()

    def test_flagged_table(self):
        table = ModulusTable.from_values(UNIT, np.sqrt(UNIT)).with_flags(concave_checked=True)
        assert check_concavity_facts(table).ok
