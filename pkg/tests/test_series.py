import datetime
import unittest

import numpy as np

from ForecastModel.base import (CalendarAnchor, EmbeddedDataset, GapInWindowException, LagSet,
                                SeriesTooShortException, TimeSeries, embed_multi_output, embed_single_output,
                                query_vector)
from utils.async_task import AsyncTask, TaskPool
from utils.enums import AggregationMode, LagOrigin, StrategyKind


class TestTimeSeries(unittest.TestCase):

    def test_non_finite_values_are_gaps(self):
        series = TimeSeries(values=[1.0, np.nan, 3.0], name='s')
        self.assertListEqual(series.missing_mask.tolist(), [False, True, False])
        self.assertTrue(series.has_gaps)
        self.assertEqual(len(series), 3)

    def test_missing_mask_overrides_values(self):
        series = TimeSeries(values=[1.0, 2.0, 3.0], missing_mask=[False, False, True])
        self.assertTrue(np.isnan(series.values[2]))

    def test_values_are_read_only(self):
        series = TimeSeries(values=[1.0, 2.0])
        with self.assertRaises(ValueError):
            series.values[0] = 5.0

    def test_empty_series(self):
        with self.assertRaises(TimeSeries.ModelValidationException):
            TimeSeries(values=[])

    def test_window_keeps_positions(self):
        series = TimeSeries(values=np.arange(10.0), start_index=3)
        window = series.window(2, 5)
        self.assertListEqual(window.values.tolist(), [2.0, 3.0, 4.0])
        self.assertListEqual(window.positions.tolist(), [5, 6, 7])
        with self.assertRaises(TimeSeries.ModelValidationException):
            series.window(5, 20)

    def test_extend_and_following(self):
        series = TimeSeries(values=[1.0, 2.0], start_index=4)
        extended = series.extend([3.0])
        self.assertListEqual(extended.values.tolist(), [1.0, 2.0, 3.0])
        self.assertFalse(extended.has_gaps)
        following = series.following([7.0, 8.0])
        self.assertEqual(following.start_index, 6)


class TestCalendarAnchor(unittest.TestCase):

    def test_date_anchor(self):
        anchor = CalendarAnchor(start_date='2020-01-06')
        self.assertEqual(anchor.day_of_week, 0)
        self.assertTrue(anchor.has_day_of_month)
        self.assertListEqual(anchor.days_of_week([0, 1, 7]).tolist(), [0, 1, 0])
        self.assertListEqual(anchor.days_of_month([0, 25, 26]).tolist(), [6, 31, 1])

    def test_datetime_anchor(self):
        anchor = CalendarAnchor(start_date=datetime.datetime(1996, 3, 18, 12, 0))
        self.assertEqual(anchor.start_date, datetime.date(1996, 3, 18))
        self.assertEqual(anchor.day_of_week, 0)

    def test_weekly_anchor(self):
        anchor = CalendarAnchor(day_of_week=5)
        self.assertFalse(anchor.has_day_of_month)
        self.assertIsNone(anchor.day_of_month)
        with self.assertRaises(CalendarAnchor.ModelValidationException):
            anchor.days_of_month([0])
        with self.assertRaises(CalendarAnchor.ModelValidationException):
            CalendarAnchor(day_of_week=7)


class TestLagSet(unittest.TestCase):

    def test_sorted_unique(self):
        lags = LagSet(lags=[7, 1, 7, 2])
        self.assertEqual(lags.lags, (1, 2, 7))
        self.assertEqual(lags.max_lag, 7)
        self.assertEqual(lags.origin, LagOrigin.pacf)

    def test_invalid(self):
        with self.assertRaises(LagSet.ModelValidationException):
            LagSet(lags=[])
        with self.assertRaises(LagSet.ModelValidationException):
            LagSet(lags=[0, 1])
        with self.assertRaises(LagSet.ModelValidationException):
            LagSet(lags=[201])

    def test_contiguous(self):
        self.assertEqual(LagSet.contiguous(3), LagSet(lags=[1, 2, 3]))


class TestEmbedding(unittest.TestCase):

    def setUp(self):
        self.series = TimeSeries(values=np.arange(1.0, 11.0), name='ramp')

    def test_multi_output_rows(self):
        dataset = embed_multi_output(self.series, [1, 3], first=2, block=2)
        self.assertEqual(len(dataset), 5)
        self.assertListEqual(dataset.anchors.tolist(), [2, 3, 4, 5, 6])
        self.assertListEqual(dataset.inputs[0].tolist(), [3.0, 1.0])
        self.assertListEqual(dataset.outputs[0].tolist(), [5.0, 6.0])
        self.assertListEqual(dataset.outputs[-1].tolist(), [9.0, 10.0])
        self.assertEqual(dataset.horizon_offset, 2)
        self.assertEqual(dataset.output_dimension, 2)

    def test_single_output(self):
        dataset = embed_single_output(self.series, LagSet(lags=[1]), 1)
        self.assertEqual(len(dataset), 9)
        np.testing.assert_array_equal(dataset.outputs[:, 0], dataset.inputs[:, 0] + 1)

    def test_rows_touching_gaps_are_skipped(self):
        series = self.series.replace(self.series.values, np.arange(10) == 5)
        dataset = embed_multi_output(series, [1, 3], first=2, block=2)
        for row in range(len(dataset)):
            self.assertTrue(np.isfinite(dataset.inputs[row]).all())
        self.assertListEqual(dataset.anchors.tolist(), [4, 6])

    def test_too_short(self):
        with self.assertRaises(SeriesTooShortException):
            embed_multi_output(self.series, [9], first=1, block=2)

    def test_query_vector(self):
        self.assertListEqual(query_vector(self.series, [1, 3]).tolist(), [10.0, 8.0])
        with self.assertRaises(SeriesTooShortException):
            query_vector(self.series, [11])
        gappy = self.series.replace(self.series.values, np.arange(10) == 9)
        with self.assertRaises(GapInWindowException):
            query_vector(gappy, [1])

    def test_dataset_rejects_gaps(self):
        with self.assertRaises(EmbeddedDataset.ModelValidationException):
            EmbeddedDataset(inputs=[[1.0], [np.nan]], outputs=[1.0, 2.0])


class TestEnums(unittest.TestCase):

    def test_parse(self):
        self.assertEqual(AggregationMode.parse('wcomb'), AggregationMode.WCOMB)
        self.assertEqual(StrategyKind.parse(StrategyKind.MIMO), StrategyKind.MIMO)
        with self.assertRaises(ValueError):
            AggregationMode.parse('best')
        self.assertListEqual(AggregationMode.get_values(), ['WINNER', 'COMB', 'WCOMB'])


class TestAsyncTask(unittest.TestCase):

    def test_result_and_error(self):
        task = AsyncTask(None, lambda a, b: a + b, args=[2, 3])
        task.start()
        self.assertEqual(task.stop(), 5)

        def fail():
            raise KeyError('missing')

        task = AsyncTask(None, fail)
        task.start()
        with self.assertRaises(KeyError):
            task.stop()

    def test_method_by_name(self):
        task = AsyncTask([3, 1, 2], 'index', args=[2])
        task.start()
        self.assertEqual(task.stop(), 2)


class TestTaskPool(unittest.TestCase):

    def test_results_are_keyed(self):
        tasks = {i: (lambda i=i: i * i) for i in range(6)}
        self.assertDictEqual(TaskPool(3).run(tasks), {i: i * i for i in range(6)})

    def test_failures_are_returned(self):
        def fail():
            raise RuntimeError("boom")

        results = TaskPool(2).run({'ok': lambda: 1, 'ko': fail})
        self.assertEqual(results['ok'], 1)
        self.assertIsInstance(results['ko'], RuntimeError)

    def test_progress(self):
        class Counter(object):
            count = 0

            def update(self, n):
                self.count += n

        counter = Counter()
        TaskPool(1, counter).run({1: lambda: None, 2: lambda: None})
        self.assertEqual(counter.count, 2)
        with self.assertRaises(ValueError):
            TaskPool(0)

    def test_broken_progress_surfaces(self):
        class Broken(object):

            def update(self, n):
                raise IOError("closed")

        with self.assertRaises(IOError):
            TaskPool(2, Broken()).run({1: lambda: None, 2: lambda: None})


if __name__ == '__main__':
    unittest.main()
