import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autocorr import (
    DimensionMismatchError,
    GridFunction,
    Method,
    ShiftMatrix,
    ShiftPoint,
    ZeroFunctionError,
    averaging_upper_bound,
    bs_preset,
    correlation_curve,
    l1_norm,
    max_over_shifts,
    min_over_shifts,
    ratio,
    shifted_product_integral,
)
from autocorr.functional import (
    evaluate_many,
    kink_candidates,
    lipschitz_bound,
    pair_integral,
    ratio_value,
)
from generators import grid_functions, random_function
from oracles import dense_autocorrelation, tuple_integral

BS = bs_preset()
TWO_UNITS = GridFunction.indicator(0.0, 2.0, 1.0)
TWO_BLOCKS = GridFunction(0.0, 1.0, [1.0, 0.0, 1.0])


class TestShiftPoint:
    def test_range(self):
        with pytest.raises(ValueError):
            ShiftPoint((1.5,))
        with pytest.raises(ValueError):
            ShiftPoint((-0.1, 0.5))

    def test_dimension_checked(self):
        with pytest.raises(DimensionMismatchError):
            shifted_product_integral(TWO_UNITS, BS, (0.5, 0.5))


class TestIntegral:
    @pytest.mark.parametrize("f, t, expected", [
        (TWO_UNITS, 1.0, 1.0),
        (TWO_UNITS, 0.0, 2.0),
        (GridFunction.indicator(0.0, 1.0, 0.25), 0.25, 0.75),
    ])
    def test_indicator_overlaps(self, f, t, expected):
        assert shifted_product_integral(f, BS, (t,)) == pytest.approx(expected, abs=1e-15)

    def test_single_column_is_l1_norm(self):
        f = GridFunction(0.3, 0.5, [1.0, 0.0, 2.0])
        assert shifted_product_integral(f, ShiftMatrix([[0.7]]), (0.4,)) == pytest.approx(1.5)

    @settings(max_examples=60, deadline=None)
    @given(grid_functions(max_cells=6), st.lists(st.floats(-2, 2), min_size=2, max_size=3),
           st.floats(0, 1))
    def test_matches_cell_tuple_enumeration(self, f, column, t):
        A = ShiftMatrix([column])
        got = shifted_product_integral(f, A, (t,))
        expected = tuple_integral(f.x0, f.h, f.values.tolist(), [t * a for a in column])
        assert got == pytest.approx(expected, rel=1e-10, abs=1e-12)

    def test_two_dimensional_matches_enumeration(self, rng):
        A = ShiftMatrix([[0.0, 1.0, 0.0], [0.0, 0.0, 1.5]])
        for _ in range(20):
            f = random_function(rng, max_cells=6)
            t = rng.uniform(0, 1, 2)
            shifts = t @ A.entries
            assert shifted_product_integral(f, A, t) == pytest.approx(
                tuple_integral(f.x0, f.h, f.values.tolist(), shifts), rel=1e-10, abs=1e-12)

    def test_pair_fast_path_agrees_with_merge(self, rng):
        for _ in range(20):
            f = random_function(rng)
            ts = rng.uniform(0, 1, 30)
            fast = pair_integral(f, ts)
            merged = [shifted_product_integral(f, BS, (t,)) for t in ts]
            assert np.allclose(fast, merged, rtol=1e-12, atol=1e-13)

    @settings(max_examples=60)
    @given(grid_functions(), st.floats(0, 1), st.sampled_from([0.5, 2.0, 3.7]), st.floats(-5, 5))
    def test_scale_and_translation(self, f, t, c, s):
        A = ShiftMatrix([[0.0, 1.0, -0.5]])
        base = shifted_product_integral(f, A, (t,))
        assert base >= 0
        assert shifted_product_integral(f.scaled(c), A, (t,)) == pytest.approx(c**3 * base, rel=1e-9, abs=1e-12)
        assert shifted_product_integral(f.translated(s), A, (t,)) == pytest.approx(base, rel=1e-12, abs=1e-12)


class TestCurve:
    @pytest.mark.parametrize("f, expected", [
        (TWO_UNITS, [2.0, 1.5, 1.0]),
        (GridFunction.indicator(0.0, 0.5, 0.5), [0.5, 0.0, 0.0]),
        (TWO_BLOCKS, [2.0, 1.0, 0.0]),
    ])
    def test_three_samples(self, f, expected):
        points = correlation_curve(f, BS, 3)
        assert [p.coords[0] for p, _ in points] == [0.0, 0.5, 1.0]
        assert [g for _, g in points] == pytest.approx(expected, abs=1e-15)

    def test_dense_oracle_on_two_blocks(self):
        taus = np.linspace(0, 1, 100_001)
        assert np.allclose(dense_autocorrelation(1.0, [1.0, 0.0, 1.0], taus), 2 * (1 - taus))

    def test_sample_count(self):
        with pytest.raises(ValueError):
            correlation_curve(TWO_UNITS, BS, 1)

    def test_needs_one_dimension(self):
        with pytest.raises(DimensionMismatchError):
            correlation_curve(TWO_UNITS, ShiftMatrix(np.eye(2)), 3)

    def test_reflection_symmetry(self, rng):
        for _ in range(10):
            f = random_function(rng, max_cells=20)
            a = [g for _, g in correlation_curve(f, BS, 41)]
            b = [g for _, g in correlation_curve(f.reflected(), BS, 41)]
            assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


class TestExtrema:
    def test_two_units(self):
        lo = min_over_shifts(TWO_UNITS, BS)
        hi = max_over_shifts(TWO_UNITS, BS)
        assert (lo.t.coords, lo.value) == ((1.0,), 1.0)
        assert (hi.t.coords, hi.value) == ((0.0,), 2.0)
        assert lo.method is Method.EXACT_KINKS

    def test_short_support_any_minimiser(self):
        f = GridFunction.indicator(0.0, 0.5, 0.5)
        t, value = min_over_shifts(f, BS)
        assert value == 0.0 and 0.5 <= t[0] <= 1.0
        assert max_over_shifts(f, BS).value == 0.5

    def test_two_blocks(self):
        t, value = min_over_shifts(TWO_BLOCKS, BS)
        assert (t[0], value) == (1.0, 0.0)
        assert max_over_shifts(TWO_BLOCKS, BS).value == 2.0

    def test_ties_pick_smallest_t(self):
        # g is 0 on [0.5, 1]; the reported minimiser is the left end of that set
        t, _ = min_over_shifts(GridFunction.indicator(0.0, 0.5, 0.5), BS)
        assert t[0] == 0.5

    def test_zero_function(self):
        with pytest.raises(ZeroFunctionError):
            min_over_shifts(GridFunction(0.0, 1.0, [0.0]), BS)

    def test_kinks_include_crossings(self):
        f = GridFunction(0.0, 0.25, [1.0] * 3)
        assert kink_candidates(f, BS).tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
        A = ShiftMatrix([[0.0, 2.0]])
        assert kink_candidates(f, A).tolist() == [0.0, 0.125, 0.25, 0.375, 1.0]

    def test_exact_minimum_below_dense_samples(self, rng):
        taus = np.linspace(0, 1, 20_001)
        for _ in range(20):
            f = random_function(rng, max_cells=32)
            exact = min_over_shifts(f, BS).value
            dense = dense_autocorrelation(f.h, f.values.tolist(), taus)
            spacing = taus[1]
            assert exact <= dense.min() + 1e-12
            assert dense.min() - exact <= lipschitz_bound(f, BS) * spacing / 2 + 1e-12

    def test_grid_refine_two_dimensions(self):
        # identity with d = n = 2: g(t) = int f(x + t1) f(x + t2) dx depends on t1 - t2 only
        A = ShiftMatrix(np.eye(2))
        lo = min_over_shifts(TWO_UNITS, A)
        assert lo.method is Method.GRID_REFINE
        assert lo.value == pytest.approx(1.0, abs=1e-9)
        assert abs(lo.t[0] - lo.t[1]) == pytest.approx(1.0, abs=1e-6)

    def test_grid_refine_beats_its_starting_grid(self, rng):
        A = ShiftMatrix([[0.0, 1.0, 0.3], [0.0, 0.2, 1.0]])
        f = random_function(rng, max_cells=8)
        lo = min_over_shifts(f, A, tgrid=16)
        axis = np.linspace(0, 1, 17)
        T = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
        assert lo.value == pytest.approx(float(evaluate_many(f, A, lo.t.as_array()[None, :])[0]))
        assert lo.value <= evaluate_many(f, A, T).min()

    def test_exact_strategy_needs_one_dimension(self):
        with pytest.raises(DimensionMismatchError):
            min_over_shifts(TWO_UNITS, ShiftMatrix(np.eye(2)), strategy="exact_kinks")


class TestRatio:
    @pytest.mark.parametrize("f, expected", [
        (TWO_UNITS, 0.25),
        (GridFunction.indicator(0.0, 1.0, 1.0), 0.0),
        (GridFunction.indicator(0.0, 1.5, 0.5), 2 / 9),
    ])
    def test_known_values(self, f, expected):
        rep = ratio(f, BS)
        assert rep.ratio == pytest.approx(expected, abs=1e-12)
        assert ratio_value(f, BS) == pytest.approx(expected, abs=1e-12)
        assert rep.l1n == l1_norm(f) ** 2
        assert rep.min_value <= rep.max_value

    def test_underflowing_norm(self):
        with pytest.raises(ZeroFunctionError):
            ratio(GridFunction(0.0, 1.0, [1e-200]), BS)

    @settings(max_examples=50)
    @given(grid_functions(), st.sampled_from([0.5, 2.0]))
    def test_scale_invariance(self, f, c):
        assert ratio_value(f.scaled(c), BS) == pytest.approx(ratio_value(f, BS), rel=1e-9, abs=1e-15)

    def test_bounded_by_one_when_finite(self, rng):
        # any 1 x 2 matrix with distinct entries passes the rank test
        for _ in range(50):
            f = random_function(rng, max_cells=16)
            a = rng.normal(size=2)
            assert ratio_value(f, ShiftMatrix([a])) <= 1 + 1e-9


class TestAveraging:
    @pytest.mark.parametrize("f, expected", [
        (TWO_UNITS, 1.5),
        (GridFunction.indicator(0.0, 1.0, 1.0), 0.5),
    ])
    def test_known_values(self, f, expected):
        assert averaging_upper_bound(f, BS) == pytest.approx(expected, abs=1e-14)

    def test_padding_invariance(self):
        assert averaging_upper_bound(TWO_UNITS.padded(3, 2), BS) == pytest.approx(1.5, abs=1e-14)

    def test_matches_fine_quadrature(self, rng):
        taus = np.linspace(0, 1, 200_001)
        for _ in range(5):
            f = random_function(rng, max_cells=16)
            g = dense_autocorrelation(f.h, f.values.tolist(), taus)
            trapezoid = float(np.sum(np.diff(taus) * 0.5 * (g[1:] + g[:-1])))
            assert averaging_upper_bound(f, BS) == pytest.approx(trapezoid, rel=1e-6, abs=1e-9)
