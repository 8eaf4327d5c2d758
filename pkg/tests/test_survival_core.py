import numpy as np
import pytest

from kmdp import (
    CountMatrix,
    KaplanMeierEstimator,
    KMCurve,
    SurvivalData,
    build_grid,
    count_events,
    counts_to_dataset,
    discretize,
    km_estimate,
    km_to_prob,
    prob_to_km,
)
from conftest import TOY_EVENTS, TOY_PROB, TOY_SURVIVAL, TOY_TIMES


class TestBuildGrid:
    def test_exact_division(self):
        grid = build_grid(t_max=5, bin_size=1)
        assert grid.n_points == 6
        assert np.array_equal(grid.points, [0, 1, 2, 3, 4, 5])

    def test_monthly_horizon(self):
        assert build_grid(t_max=87, bin_size=1).n_points == 88

    def test_non_dividing_bin(self):
        grid = build_grid(t_max=5, bin_size=2)
        assert grid.n_points == 4
        assert np.array_equal(grid.points, [0, 2, 4, 6])
        assert grid.last_point >= grid.t_max > grid.points[-2]

    @pytest.mark.parametrize("t_max,bin_size", [(0, 1), (-1, 1), (5, 0), (5, -2)])
    def test_nonpositive_inputs_rejected(self, t_max, bin_size):
        with pytest.raises(ValueError):
            build_grid(t_max, bin_size)

    def test_float_ratio_does_not_overshoot(self):
        # 0.3 / 0.1 is slightly above 3 in binary; must still give 4 points.
        assert build_grid(t_max=0.3, bin_size=0.1).n_points == 4


class TestDiscretize:
    def test_right_closed_binning(self):
        grid = build_grid(5, 1)
        data = SurvivalData(np.array([0.5, 1.0, 1.2]), np.array([1, 1, 1]))
        out = discretize(data, grid)
        assert np.array_equal(out.times, [1, 1, 2])

    def test_gridded_input_is_fixed_point(self, toy_data, toy_grid):
        out = discretize(toy_data, toy_grid)
        assert np.array_equal(out.times, toy_data.times)
        assert np.array_equal(out.event_observed, toy_data.event_observed)

    def test_overflow_clamped_and_censored(self):
        grid = build_grid(5, 1)
        out = discretize(SurvivalData(np.array([5.1]), np.array([1])), grid)
        assert out.times[0] == 5
        assert out.event_observed[0] == 0

    def test_zero_time_pushed_to_first_bin(self):
        grid = build_grid(5, 1)
        out = discretize(SurvivalData(np.array([0.0]), np.array([1])), grid)
        assert out.times[0] == 1

    def test_negative_times_rejected(self):
        with pytest.raises(ValueError):
            SurvivalData(np.array([-1.0]), np.array([1]))

    def test_never_moves_time_earlier(self):
        rng = np.random.default_rng(7)
        grid = build_grid(10, 0.75)
        raw = rng.uniform(0, 10, 200)
        out = discretize(SurvivalData(raw, np.ones(200)), grid)
        assert np.all(out.times >= raw - 1e-12)


class TestCountEvents:
    def test_toy_counts(self, toy_data, toy_grid):
        counts = count_events(toy_data, toy_grid)
        assert counts.n_initial == 5
        assert np.array_equal(counts.events, [0, 1, 1, 0, 1, 0])
        assert np.array_equal(counts.censored, [0, 0, 0, 1, 0, 1])

    def test_empty_dataset(self, toy_grid):
        counts = count_events(SurvivalData(np.zeros(0), np.zeros(0)), toy_grid)
        assert counts.n_initial == 0
        assert counts.events.sum() == 0 and counts.censored.sum() == 0

    def test_all_censored_at_horizon(self, toy_grid):
        data = SurvivalData(np.full(4, 5.0), np.zeros(4))
        counts = count_events(data, toy_grid)
        assert counts.censored[-1] == 4
        assert counts.events.sum() == 0

    def test_exact_counts_balance(self, toy_data, toy_grid):
        counts = count_events(toy_data, toy_grid)
        assert counts.events.sum() + counts.censored.sum() == counts.n_initial
        assert np.all(counts.at_risk() >= 0)


class TestKMEstimate:
    def test_toy_curve(self, toy_data, toy_grid):
        curve = km_estimate(count_events(toy_data, toy_grid))
        np.testing.assert_allclose(curve.values, TOY_SURVIVAL, atol=1e-12)

    def test_no_events_constant_one(self, toy_grid):
        data = SurvivalData(np.array([2.0, 3.0]), np.array([0, 0]))
        curve = km_estimate(count_events(data, toy_grid))
        assert np.all(curve.values == 1.0)

    def test_all_events_reach_zero(self, toy_grid):
        data = SurvivalData(np.array([1.0, 2.0, 3.0]), np.array([1, 1, 1]))
        curve = km_estimate(count_events(data, toy_grid))
        assert curve.values[-1] == 0.0

    def test_frozen_after_depletion(self, toy_grid):
        # Risk set empties at t=2; curve must hold its last value after that.
        data = SurvivalData(np.array([1.0, 2.0]), np.array([1, 1]))
        curve = km_estimate(count_events(data, toy_grid))
        assert np.all(curve.values[2:] == curve.values[2])

    def test_nonincreasing_and_starts_at_one(self, toy_grid):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = rng.integers(1, 40)
            data = SurvivalData(
                rng.integers(1, 6, n).astype(float), rng.integers(0, 2, n)
            )
            curve = km_estimate(count_events(data, toy_grid))
            assert curve.values[0] == 1.0
            assert np.all(np.diff(curve.values) <= 1e-12)

    def test_matches_reference_survival_function(self):
        # Independent oracle: the survival branch of scipy's censored ecdf.
        stats = pytest.importorskip("scipy.stats")
        if not hasattr(stats, "ecdf"):
            pytest.skip("scipy.stats.ecdf unavailable")
        rng = np.random.default_rng(13)
        for _ in range(10):
            n = int(rng.integers(3, 80))
            t = rng.integers(1, 15, n).astype(float)
            e = rng.integers(0, 2, n)
            km = KaplanMeierEstimator(bin_size=1.0, t_max=15.0).fit(t, e)
            censored = stats.CensoredData(uncensored=t[e == 1], right=t[e == 0])
            ref = stats.ecdf(censored).sf.evaluate(km.grid_.points)
            np.testing.assert_allclose(km.curve_.values, ref, atol=1e-12)


class TestConversions:
    def test_toy_prob(self, toy_curve):
        np.testing.assert_allclose(km_to_prob(toy_curve).values, TOY_PROB, atol=1e-12)

    def test_constant_curve_all_mass_beyond(self, toy_grid):
        curve = KMCurve(toy_grid, np.ones(6))
        prob = km_to_prob(curve)
        expected = np.zeros(7)
        expected[-1] = 1.0
        np.testing.assert_allclose(prob.values, expected, atol=0)

    def test_prob_roundtrip_exact(self, toy_grid):
        rng = np.random.default_rng(11)
        for _ in range(50):
            vals = np.sort(rng.uniform(0, 1, 6))[::-1]
            vals[0] = 1.0
            curve = KMCurve(toy_grid, vals)
            back = prob_to_km(km_to_prob(curve))
            np.testing.assert_allclose(back.values, curve.values, atol=1e-12)

    def test_prob_sums_to_one(self, toy_curve):
        assert abs(km_to_prob(toy_curve).values.sum() - 1.0) < 1e-9

    def test_unit_mass_first_bin(self, toy_grid):
        from kmdp import ProbMass

        vals = np.zeros(7)
        vals[1] = 1.0
        curve = prob_to_km(ProbMass(toy_grid, vals))
        np.testing.assert_allclose(curve.values, [1, 0, 0, 0, 0, 0], atol=0)


class TestCountsDataset:
    def test_roundtrip_on_toy(self, toy_data, toy_grid):
        counts = count_events(toy_data, toy_grid)
        back = count_events(counts_to_dataset(counts), toy_grid)
        assert np.array_equal(back.events, counts.events)
        assert np.array_equal(back.censored, counts.censored)
        assert back.n_initial == counts.n_initial

    def test_all_zero_counts_give_empty_dataset(self, toy_grid):
        counts = CountMatrix(toy_grid, 0, np.zeros(6), np.zeros(6))
        assert counts_to_dataset(counts).n == 0

    def test_direct_expansion(self):
        grid = build_grid(t_max=1, bin_size=1)
        counts = CountMatrix(grid, 3, np.array([0.0, 2.0]), np.array([0.0, 1.0]))
        data = counts_to_dataset(counts)
        got = sorted(zip(data.times.tolist(), data.event_observed.tolist()))
        assert got == [(1.0, 0), (1.0, 1), (1.0, 1)]

    def test_roundtrip_random_integer_counts(self, toy_grid):
        rng = np.random.default_rng(5)
        for _ in range(20):
            d = rng.integers(0, 5, 6).astype(float)
            c = rng.integers(0, 5, 6).astype(float)
            counts = CountMatrix(toy_grid, d.sum() + c.sum(), d, c)
            back = count_events(counts_to_dataset(counts), toy_grid)
            assert np.array_equal(back.events, d)
            assert np.array_equal(back.censored, c)


class TestEstimatorAPI:
    def test_fit_predict(self):
        km = KaplanMeierEstimator(bin_size=1.0).fit(TOY_TIMES, TOY_EVENTS)
        np.testing.assert_allclose(km.curve_.values, TOY_SURVIVAL)
        np.testing.assert_allclose(km.predict([0, 1.5, 2, 4.7, 99]), [1.0, 0.8, 0.6, 0.3, 0.3])

    def test_get_params_roundtrip(self):
        km = KaplanMeierEstimator(bin_size=2.0, t_max=10.0)
        params = km.get_params()
        assert params == {"bin_size": 2.0, "t_max": 10.0}
        km.set_params(bin_size=1.0)
        assert km.bin_size == 1.0

    def test_sklearn_clone(self):
        from sklearn.base import clone

        km = KaplanMeierEstimator(bin_size=3.0)
        assert clone(km).get_params() == km.get_params()

    def test_unfitted_predict_raises(self):
        with pytest.raises(ValueError):
            KaplanMeierEstimator().predict([1.0])

    def test_empty_fit_raises(self):
        with pytest.raises(ValueError):
            KaplanMeierEstimator().fit([], [])
