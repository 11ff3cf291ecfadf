import unittest

import numpy as np
from statsmodels.tsa.stattools import pacf_yw

from ForecastModel.base import CalendarAnchor, LagSet, TimeSeries
from utils.enums import LagOrigin
from utils.preprocessing import (CalendarMissingException, DegenerateSeriesException, SeasonalModel,
                                 TargetSpec, TooFewPointsException, UnrepairableGapException,
                                 ZeroVarianceException, delta_test, deseasonalize, fit_seasonal,
                                 forward_backward_select, lag_universe, pacf, repair_gaps, reseasonalize,
                                 select_embedding)


def ar1(length, phi=0.7, seed=0):
    rng = np.random.default_rng(seed)
    shocks = rng.normal(size=length)
    values = np.zeros(length)
    for t in range(1, length):
        values[t] = phi * values[t - 1] + shocks[t]
    return values


class TestGapRepair(unittest.TestCase):

    def test_median_of_week_neighbors(self):
        values = np.arange(1.0, 31.0)
        values[20] = 0.0
        series = TimeSeries(values=values, missing_mask=np.arange(30) == 10, name='ramp')
        repaired = repair_gaps(series)
        self.assertFalse(repaired.has_gaps)
        self.assertEqual(repaired.values[10], 11.0)
        self.assertEqual(repaired.values[20], 21.0)

    def test_donors_come_from_the_original_series(self):
        values = np.arange(1.0, 31.0)
        series = TimeSeries(values=values, missing_mask=np.isin(np.arange(30), [10, 17]))
        repaired = repair_gaps(series)
        self.assertEqual(repaired.values[10], 4.0)
        self.assertEqual(repaired.values[17], 25.0)

    def test_idempotent(self):
        values = np.arange(1.0, 31.0)
        values[[3, 12, 25]] = 0.0
        repaired = repair_gaps(TimeSeries(values=values))
        np.testing.assert_array_equal(repair_gaps(repaired).values, repaired.values)

    def test_zeros_can_be_kept(self):
        series = TimeSeries(values=[0.0, 1.0, 2.0])
        self.assertIs(repair_gaps(series, zero_is_gap=False), series)

    def test_unrepairable(self):
        series = TimeSeries(values=[1.0, 2.0, np.nan, 4.0, 5.0])
        with self.assertRaises(UnrepairableGapException):
            repair_gaps(series)


class TestSeasonality(unittest.TestCase):
    pattern = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0])

    def test_weekly_index(self):
        series = TimeSeries(values=np.tile(self.pattern, 10), calendar_start=CalendarAnchor(day_of_week=0))
        model = fit_seasonal(series)
        np.testing.assert_allclose(model.weekly_index, self.pattern / 4.0)
        np.testing.assert_allclose(model.monthly_index, np.ones(31))
        np.testing.assert_allclose(deseasonalize(series, model).values, 4.0)

    def test_weekly_index_follows_the_anchor(self):
        series = TimeSeries(values=np.tile(self.pattern, 10), calendar_start=CalendarAnchor(day_of_week=3))
        model = fit_seasonal(series)
        np.testing.assert_allclose(model.weekly_index[3], 0.25)

    def test_round_trip_with_dates(self):
        rng = np.random.default_rng(1)
        values = np.tile(self.pattern, 30) * rng.uniform(0.8, 1.2, 210)
        series = TimeSeries(values=values, calendar_start=CalendarAnchor(start_date='1996-03-18'))
        model = fit_seasonal(series, (0, 150))
        self.assertEqual(model.fitted_on, (0, 150))
        self.assertAlmostEqual(model.monthly_index.mean(), 1.0)
        np.testing.assert_allclose(reseasonalize(deseasonalize(series, model), model).values, values)

    def test_window_positions_are_used(self):
        series = TimeSeries(values=np.tile(self.pattern, 10), calendar_start=CalendarAnchor(day_of_week=0))
        model = fit_seasonal(series)
        tail = series.window(10, 70)
        np.testing.assert_allclose(deseasonalize(tail, model).values, 4.0)

    def test_forecast_window_uses_its_calendar_positions(self):
        rng = np.random.default_rng(6)
        anchor = CalendarAnchor(start_date='1996-03-18')
        history = TimeSeries(values=np.tile(self.pattern, 105) * rng.uniform(0.8, 1.2, 735), calendar_start=anchor)
        model = fit_seasonal(history)
        forecast = TimeSeries(values=np.ones(56), calendar_start=anchor, start_index=680)
        np.testing.assert_array_equal(forecast.positions, np.arange(680, 736))
        expected = model.factors(history.extend(np.ones(1)))[680:736]
        self.assertEqual(expected.size, 56)
        np.testing.assert_allclose(reseasonalize(forecast, model).values, expected, rtol=1e-15)

    def test_degenerate(self):
        with self.assertRaises(TooFewPointsException):
            fit_seasonal(TimeSeries(values=np.ones(10), calendar_start=CalendarAnchor(day_of_week=0)))
        with self.assertRaises(DegenerateSeriesException):
            fit_seasonal(TimeSeries(values=-np.ones(21), calendar_start=CalendarAnchor(day_of_week=0)))
        gappy = TimeSeries(values=np.r_[np.ones(20), np.nan], calendar_start=CalendarAnchor(day_of_week=0))
        with self.assertRaises(DegenerateSeriesException):
            fit_seasonal(gappy)

    def test_calendar_missing(self):
        with self.assertRaises(CalendarMissingException):
            SeasonalModel().factors(TimeSeries(values=np.ones(14)))

    def test_weekly_phase_is_inferred(self):
        series = TimeSeries(values=np.tile(self.pattern, 10), name='nocal')
        with self.assertLogs('LazyForecast:utils.preprocessing', level='WARNING'):
            model = fit_seasonal(series)
        self.assertFalse(model.anchor.has_day_of_month)
        np.testing.assert_allclose(deseasonalize(series, model).values, 4.0)

    def test_invalid_model(self):
        with self.assertRaises(SeasonalModel.ModelValidationException):
            SeasonalModel(weekly_index=np.ones(6))
        with self.assertRaises(SeasonalModel.ModelValidationException):
            SeasonalModel(weekly_index=np.array([2.0, 1, 1, 1, 1, 1, 1]))


class TestPartialAutocorrelation(unittest.TestCase):

    def test_matches_yule_walker(self):
        values = ar1(500)
        np.testing.assert_allclose(pacf(TimeSeries(values=values), 20), pacf_yw(values, 20, method='mle')[1:],
                                   atol=1e-8)

    def test_ar1_selection(self):
        series = TimeSeries(values=ar1(2000, seed=3))
        partial = pacf(series, 10)
        self.assertAlmostEqual(partial[0], 0.7, delta=0.05)
        lags = select_embedding(series, 30)
        self.assertIn(1, lags.lags)
        self.assertEqual(lags.origin, LagOrigin.pacf)

    def test_strong_ar1(self):
        partial = pacf(TimeSeries(values=ar1(5000, phi=0.8, seed=9)), 10)
        self.assertTrue(0.75 <= partial[0] <= 0.85)
        self.assertTrue((np.abs(partial[1:]) < 0.1).all())

    def test_fallback_lags(self):
        # lag-1 autocorrelation of the tiled pattern is 1/100, far below 1.96/10
        series = TimeSeries(values=np.tile([1.0, 1.0, -1.0, -1.0], 25))
        self.assertLess(abs(pacf(series, 1)[0]), 1.96 / np.sqrt(len(series)))
        lags = select_embedding(series, 1)
        self.assertEqual(lags.lags, tuple(range(1, 8)))
        self.assertEqual(lags.origin, LagOrigin.pacf)

    def test_white_noise_false_selection(self):
        series = TimeSeries(values=np.random.default_rng(13).normal(size=1000))
        partial = pacf(series, 200)
        self.assertLessEqual(np.mean(np.abs(partial) > 1.96 / np.sqrt(1000)), 0.15)
        self.assertLessEqual(len(select_embedding(series, 200)), 0.15 * 200)

    def test_errors(self):
        with self.assertRaises(ZeroVarianceException):
            pacf(TimeSeries(values=np.ones(50)), 5)
        with self.assertRaises(TooFewPointsException):
            pacf(TimeSeries(values=np.arange(5.0)), 5)

    def test_lag_universe(self):
        self.assertEqual(lag_universe(735), 200)
        self.assertEqual(lag_universe(90), 30)
        self.assertEqual(lag_universe(2), 1)


class TestDeltaTest(unittest.TestCase):

    def test_value(self):
        self.assertAlmostEqual(delta_test([[0.0], [1.0], [3.0]], [1.0, 2.0, 5.0]), 11.0 / 6.0)

    def test_ties_go_to_lowest_index(self):
        # neighbors of 1.0 are 0.0 and 2.0, row 0 wins
        self.assertAlmostEqual(delta_test([0.0, 1.0, 2.0], [0.0, 1.0, 10.0]), (1.0 + 1.0 + 81.0) / 6.0)

    def test_vector_outputs(self):
        self.assertAlmostEqual(delta_test([[0.0], [1.0]], [[1.0, 3.0], [2.0, 5.0]]), 2 * (1.0 + 4.0) / 8.0)

    def test_too_few(self):
        with self.assertRaises(TooFewPointsException):
            delta_test([[0.0]], [1.0])

    def test_permutation_invariance(self):
        rng = np.random.default_rng(4)
        inputs = rng.normal(size=(80, 3))
        outputs = inputs[:, 0] - 2 * inputs[:, 2] + 0.1 * rng.normal(size=80)
        order = rng.permutation(80)
        self.assertAlmostEqual(delta_test(inputs[order], outputs[order]), delta_test(inputs, outputs), places=12)

    def test_identity_decreases_with_grid_density(self):
        # y = x on a grid of spacing h gives h^2 / 2
        values = []
        for points in (11, 101, 1001):
            grid = np.linspace(0.0, 1.0, points)
            values.append(delta_test(grid, grid))
        self.assertTrue(values[0] > values[1] > values[2] > 0)
        self.assertAlmostEqual(values[1], 0.5e-4, places=12)


class TestForwardBackwardSearch(unittest.TestCase):

    def setUp(self):
        rng = np.random.default_rng(5)
        t = np.arange(150)
        self.series = TimeSeries(values=10 + 3 * np.sin(2 * np.pi * t / 7) + 0.3 * rng.normal(size=150),
                                 name='weekly')

    def test_deltas_decrease(self):
        trace = forward_backward_select(self.series, LagSet(lags=[1]), max_iter=5)
        deltas = [delta for _, delta in trace.accepted]
        self.assertTrue(all(b < a for a, b in zip(deltas, deltas[1:])))
        self.assertLessEqual(len(trace.accepted), 6)
        self.assertEqual(trace.final, trace.accepted[-1][0])
        self.assertEqual(trace.final.origin, LagOrigin.pacf_plus_fbs)
        self.assertGreater(len(trace.visited), 1)

    def test_first_moves_are_single_lag_changes(self):
        trace = forward_backward_select(self.series, LagSet(lags=[1, 2]), max_iter=1)
        start = {1, 2}
        for lags, _ in trace.visited[1:]:
            self.assertEqual(len(start.symmetric_difference(lags.lags)), 1)

    def test_candidate_values_depend_only_on_the_lag_set(self):
        trace = forward_backward_select(self.series, LagSet(lags=[1, 7]), max_iter=3)
        for lags, value in trace.visited[1:60:7] + trace.accepted:
            fresh = forward_backward_select(self.series, lags, max_iter=0)
            self.assertEqual(fresh.final_delta, value)

    def test_no_iteration_keeps_the_start(self):
        trace = forward_backward_select(self.series, LagSet(lags=[1, 7]), max_iter=0)
        self.assertEqual(trace.final, LagSet(lags=[1, 7]))
        self.assertEqual(len(trace.accepted), 1)

    def test_recovers_the_informative_lag(self):
        # y[t+1] = y[t-2] + noise: three interleaved random walks
        rng = np.random.default_rng(21)
        values = np.zeros(300)
        values[:3] = rng.normal(size=3) * 10
        for t in range(3, 300):
            values[t] = values[t - 3] + 0.1 * rng.normal()
        trace = forward_backward_select(TimeSeries(values=values), LagSet(lags=[1]), max_iter=5)
        self.assertIn(3, trace.final.lags)

    def test_vector_target(self):
        trace = forward_backward_select(self.series, LagSet(lags=[1]), TargetSpec(first=1, block=7), max_iter=3)
        self.assertGreaterEqual(trace.accepted[0][1], trace.final_delta)


if __name__ == '__main__':
    unittest.main()
