import argparse
import sys

from bench.bench import EXIT_FATAL, run
from bench.config import ConfigFileException, RunConfig
from ForecastModel.base import BaseModel
from utils.logging import LazyForecastLogger

logger = LazyForecastLogger(__name__)


def parse_arguments(argv=None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description='Multi-step-ahead forecasting strategies benchmark')

    parser.add_argument('--data-dir', help='Directory with one CSV per series (or wide CSVs)')
    parser.add_argument('--phase', choices=['precompetition', 'competition'], help='Evaluation phase')
    parser.add_argument('--strategies', help='Comma-separated strategy names (e.g. REC,DIR,MIMO-LOO,DIRMO-SEL)')
    parser.add_argument('--deseasonalize', dest='deseasonalize', action='store_true', default=None,
                        help='Only deseasonalized configurations')
    parser.add_argument('--no-deseasonalize', dest='deseasonalize', action='store_false',
                        help='Only raw configurations')
    parser.add_argument('--input-selection', dest='input_selection', action='store_true', default=None,
                        help='Only configurations with forward-backward input selection')
    parser.add_argument('--no-input-selection', dest='input_selection', action='store_false',
                        help='Only configurations with the PACF embedding')
    parser.add_argument('--model-selection', help='Comma-separated subset of WINNER,COMB,WCOMB')
    parser.add_argument('--kmax', dest='kmax_grid', help='Comma-separated Kmax grid (default 20,50,100)')
    parser.add_argument('--horizon', type=int, help='Forecasting horizon (default 56)')
    parser.add_argument('--seed', type=int, help='Seed of the synthetic generator')
    parser.add_argument('--alpha', type=float, help='Significance level (default 0.05)')
    parser.add_argument('--workers', type=int, help='Worker threads (default 1)')
    parser.add_argument('--out-dir', help='Output directory (default ./results)')
    parser.add_argument('--config', dest='config_file', help='YAML file with any of the above options')
    parser.add_argument('--synthetic', type=int, help='Number of synthetic series to generate instead of --data-dir')
    parser.add_argument('--synthetic-length', type=int, help='Length of the synthetic series (default 735)')
    parser.add_argument('--calendar-start', help='Date of the first observation of series without a calendar')
    parser.add_argument('--start-day-of-week', type=int, help='Day of week (0 = Monday) of the first observation')
    parser.add_argument('--max-iter', type=int, help='Iteration cap of the forward-backward search (default 50)')
    parser.add_argument('--verbose', action='store_true', default=None, help='Debug logging')

    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_arguments(argv)
    try:
        config = RunConfig.from_sources(vars(args))
    except (BaseModel.ModelValidationException, ConfigFileException, ValueError) as ex:
        logger.error("Invalid configuration: %s", ex)
        return EXIT_FATAL
    return run(config)


if __name__ == '__main__':
    sys.exit(main())
