import json
import os
import tempfile
import unittest
from unittest import mock

import pandas as pd
import yaml
from scipy.stats import rankdata

from ForecastModel.strategies import VARIANT_NAMES
from bench import BenchException, EmptyDirectoryException, MalformedFileException
from bench.bench import EXIT_FATAL, EXIT_PARTIAL, EXIT_SUCCESS, load_series, run
from bench.config import ConfigFileException, RunConfig
from bench.ingest import ingest, read_series_file
from bench.report import POSTHOC_FILE, RUN_FILE, SMAPE_FILE, SUMMARY_FILE
from bench.synthetic import generate_series, save_series
from evaluation.evaluation import smape_star
from main import main, parse_arguments
from utils.enums import AggregationMode, Phase


def write(directory, name, content):
    path = os.path.join(directory, name)
    with open(path, 'w') as f:
        f.write(content)
    return path


class DirectoryTest(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()


class TestIngest(DirectoryTest):

    def test_blank_cells_are_gaps(self):
        write(self.dir, 'a.csv', "v\n1\n\n3\n")
        series = ingest(self.dir)
        self.assertEqual(len(series), 1)
        self.assertEqual(series[0].name, 'a')
        self.assertListEqual(series[0].missing_mask.tolist(), [False, True, False])
        self.assertEqual(series[0].values[2], 3.0)

    def test_non_numeric_cells_warn(self):
        path = write(self.dir, 'a.csv', "v\n1\nabc\n3\n")
        with self.assertLogs('LazyForecast:bench.ingest', level='WARNING') as logs:
            series = read_series_file(path)
        self.assertTrue(series[0].missing_mask[1])
        self.assertIn('[3]', logs.output[0])

    def test_wide_file_with_dates(self):
        write(self.dir, 'wide.csv', "date,x,y\n2020-01-06,1,2\n2020-01-07,3,4\n")
        series = ingest(self.dir)
        self.assertListEqual([s.name for s in series], ['x', 'y'])
        self.assertEqual(series[1].values.tolist(), [2.0, 4.0])
        self.assertEqual(series[0].calendar_start.day_of_week, 0)
        self.assertTrue(series[0].calendar_start.has_day_of_month)

    def test_calendar_sidecar(self):
        write(self.dir, 'a.csv', "v\n1\n2\n")
        write(self.dir, 'b.csv', "v\n1\n2\n")
        with open(os.path.join(self.dir, 'calendar.yaml'), 'w') as f:
            yaml.safe_dump({'a': 3, 'b': '1996-03-18'}, f)
        series = {s.name: s for s in ingest(self.dir)}
        self.assertEqual(series['a'].calendar_start.day_of_week, 3)
        self.assertFalse(series['a'].calendar_start.has_day_of_month)
        self.assertEqual(series['b'].calendar_start.day_of_week, 0)

    def test_default_anchor(self):
        write(self.dir, 'a.csv', "v\n1\n2\n")
        anchor = RunConfig(synthetic=1, start_day_of_week=4).default_anchor
        self.assertEqual(ingest(self.dir, anchor)[0].calendar_start.day_of_week, 4)

    def test_malformed_files(self):
        write(self.dir, 'a.csv', "v\n1\n2\n")
        write(self.dir, 'b.csv', "")
        with self.assertRaises(MalformedFileException) as context:
            ingest(self.dir)
        self.assertTrue(context.exception.file.endswith('b.csv'))
        failures = []
        series = ingest(self.dir, failures=failures)
        self.assertListEqual([s.name for s in series], ['a'])
        self.assertEqual(failures[0]['series'], 'b')

    def test_duplicate_names(self):
        write(self.dir, 'a.csv', "v\n1\n2\n")
        write(self.dir, 'wide.csv', "a,c\n1,2\n3,4\n")
        failures = []
        self.assertListEqual([s.name for s in ingest(self.dir, failures=failures)], ['a'])
        self.assertEqual(len(failures), 1)

    def test_empty_directory(self):
        with self.assertRaises(EmptyDirectoryException):
            ingest(self.dir)
        with self.assertRaises(BenchException):
            ingest(os.path.join(self.dir, 'missing'))

    def test_synthetic_round_trip(self):
        generated = generate_series(2, length=60, seed=5)
        save_series(generated, self.dir)
        series = ingest(self.dir)
        self.assertListEqual([s.name for s in series], ['synthetic_001', 'synthetic_002'])
        for original, read in zip(generated, series):
            self.assertListEqual(read.missing_mask.tolist(), original.missing_mask.tolist())
            self.assertEqual(read.calendar_start.start_date, original.calendar_start.start_date)

    @unittest.skipUnless(os.environ.get('NN5_DATA_DIR'), "NN5_DATA_DIR is not set")
    def test_nn5(self):
        series = ingest(os.environ['NN5_DATA_DIR'])
        self.assertEqual(len(series), 111)
        self.assertTrue(all(len(s) == 735 for s in series))


class TestRunConfig(DirectoryTest):

    def test_defaults(self):
        config = RunConfig(synthetic=2)
        self.assertEqual(config.horizon, 56)
        self.assertListEqual(config.kmax_grid, [20, 50, 100])
        self.assertEqual(config.phase, Phase.precompetition)
        self.assertEqual(len(config.configurations()), 12)
        self.assertEqual(len(config.strategies), 8)

    def test_precedence(self):
        path = write(self.dir, 'run.yaml', "horizon: 14\nworkers: 2\nkmax-grid: [50, 20]\n")
        config = RunConfig.from_sources({'horizon': 7, 'synthetic': 2, 'workers': None, 'config_file': path})
        self.assertEqual(config.horizon, 7)
        self.assertEqual(config.workers, 2)
        self.assertListEqual(config.kmax_grid, [20, 50])
        self.assertEqual(config.config_file, path)

    def test_parsing(self):
        config = RunConfig(synthetic=1, strategies='rec, MIMO, dirmo-avg', model_selection='COMB,WCOMB',
                           kmax_grid='5,3', deseasonalize=True, input_selection=False)
        self.assertListEqual(config.strategies, ['REC', 'MIMO-LOO', 'DIRMO-AVG'])
        self.assertListEqual(config.model_selection, [AggregationMode.COMB, AggregationMode.WCOMB])
        self.assertListEqual([c.label for c in config.configurations()], ['DES-PACF-COMB', 'DES-PACF-WCOMB'])
        self.assertListEqual(config.kmax_grid, [3, 5])

    def test_invalid(self):
        for params in [dict(), dict(synthetic=1, strategies='BEST'), dict(synthetic=1, kmax_grid='1'),
                       dict(synthetic=1, alpha=1.5), dict(synthetic=1, horizon=0), dict(synthetic=1, workers=0),
                       dict(synthetic=1, colour='blue'), dict(synthetic=1, strategies='REC,REC')]:
            with self.assertRaises(RunConfig.ModelValidationException, msg=str(params)):
                RunConfig(**params)
        with self.assertRaises(ConfigFileException):
            RunConfig.from_sources({}, os.path.join(self.dir, 'missing.yaml'))
        path = write(self.dir, 'nested.yaml', "horizon:\n  value: 3\n")
        with self.assertRaises(ConfigFileException):
            RunConfig.from_sources({}, path)

    def test_hash(self):
        config = RunConfig(synthetic=2, out_dir='a', workers=1)
        self.assertEqual(config.config_hash(), RunConfig(synthetic=2, out_dir='b', workers=4).config_hash())
        self.assertNotEqual(config.config_hash(), RunConfig(synthetic=2, seed=1).config_hash())
        self.assertEqual(config.to_dict()['phase'], 'precompetition')


class TestCommandLine(unittest.TestCase):

    def test_unset_flags_are_none(self):
        args = parse_arguments(['--synthetic', '2', '--no-deseasonalize', '--kmax', '3,5'])
        self.assertEqual(args.synthetic, 2)
        self.assertFalse(args.deseasonalize)
        self.assertIsNone(args.input_selection)
        self.assertIsNone(args.horizon)
        self.assertEqual(args.kmax_grid, '3,5')

    def test_invalid_configuration(self):
        with mock.patch('main.run') as run_mock:
            self.assertEqual(main(['--synthetic', '1', '--alpha', '2']), EXIT_FATAL)
            run_mock.assert_not_called()


@mock.patch('bench.bench.HostInfo.get_all_properties', return_value={'cpu_arch': 'test'})
class TestRun(DirectoryTest):

    def config(self, **kwargs):
        params = dict(synthetic=3, synthetic_length=150, horizon=7, kmax_grid=[3, 5], strategies='REC,MIMO',
                      deseasonalize=True, input_selection=False, model_selection='WINNER',
                      out_dir=os.path.join(self.dir, 'out'))
        params.update(kwargs)
        return RunConfig(**params)

    def test_precompetition(self, host):
        config = self.config()
        self.assertEqual(run(config), EXIT_SUCCESS)
        out = config.out_dir
        smape = pd.read_csv(os.path.join(out, SMAPE_FILE))
        self.assertEqual(len(smape), 6)
        summary = pd.read_csv(os.path.join(out, SUMMARY_FILE))
        self.assertListEqual(list(summary.columns), ['strategy', 'config', 'smape_star', 'mean_rank', 'group'])
        self.assertEqual(len(summary), 2)
        self.assertAlmostEqual(summary['mean_rank'].sum(), 3.0)
        self.assertTrue(os.path.isfile(os.path.join(out, POSTHOC_FILE)))
        with open(os.path.join(out, RUN_FILE)) as f:
            info = json.load(f)
        self.assertEqual(info['config_hash'], config.config_hash())
        self.assertEqual(info['rows'], 6)
        self.assertListEqual(info['failures'], [])
        self.assertIn('numpy', info['versions'])
        self.assertEqual(info['learner']['learner'], 'LazyLearner')

    def test_reports_are_consistent_over_the_grid(self, host):
        config = self.config(synthetic=5, synthetic_length=300, horizon=14, kmax_grid=[5, 10],
                             strategies=list(VARIANT_NAMES), deseasonalize=None, model_selection=None)
        self.assertEqual(run(config), EXIT_SUCCESS)
        smape = pd.read_csv(os.path.join(config.out_dir, SMAPE_FILE), float_precision='round_trip')
        summary = pd.read_csv(os.path.join(config.out_dir, SUMMARY_FILE), float_precision='round_trip')
        self.assertEqual(smape['config'].nunique(), 6)
        self.assertEqual(len(summary), 6 * len(VARIANT_NAMES))

        per_series = smape.groupby(['config', 'strategy', 'series'], sort=True)['smape'].agg(smape_star)
        summary = summary.set_index(['config', 'strategy'])
        for (config_label, strategy), values in per_series.groupby(level=['config', 'strategy']):
            self.assertEqual(summary.loc[(config_label, strategy), 'smape_star'], smape_star(values))
        for config_label, values in per_series.groupby(level='config'):
            matrix = values.droplevel('config').unstack('strategy').dropna(axis=0, how='any')
            mean_ranks = rankdata(matrix.to_numpy(), method='average', axis=1).mean(axis=0)
            for strategy, mean_rank in zip(matrix.columns, mean_ranks):
                self.assertEqual(summary.loc[(config_label, strategy), 'mean_rank'], mean_rank)

    def test_runs_are_reproducible(self, host):
        first, second = self.config(), self.config(out_dir=os.path.join(self.dir, 'again'))
        self.assertEqual(run(first), EXIT_SUCCESS)
        self.assertEqual(run(second), EXIT_SUCCESS)
        pd.testing.assert_frame_equal(pd.read_csv(os.path.join(first.out_dir, SMAPE_FILE)),
                                      pd.read_csv(os.path.join(second.out_dir, SMAPE_FILE)))

    def test_competition(self, host):
        config = self.config(phase='competition', synthetic=2)
        self.assertEqual(run(config), EXIT_SUCCESS)
        frame = pd.read_csv(os.path.join(config.out_dir, 'forecasts', 'synthetic_002.csv'))
        self.assertListEqual(list(frame.columns), ['step', 'MIMO-LOO', 'REC'])
        self.assertEqual(len(frame), 7)

    def test_failures_give_partial_exit(self, host):
        data = os.path.join(self.dir, 'data')
        save_series(generate_series(2, length=150, seed=2), data)
        write(data, 'broken.csv', "")
        config = self.config(synthetic=0, data_dir=data)
        self.assertEqual(len(load_series(config, [])), 2)
        self.assertEqual(run(config), EXIT_PARTIAL)
        with open(os.path.join(config.out_dir, RUN_FILE)) as f:
            self.assertEqual(json.load(f)['failures'][0]['series'], 'broken')

    def test_fatal_exit(self, host):
        config = self.config(synthetic=0, data_dir=os.path.join(self.dir, 'missing'))
        self.assertEqual(run(config), EXIT_FATAL)


if __name__ == '__main__':
    unittest.main()
