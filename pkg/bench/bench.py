import numpy
import pandas
import scipy
import statsmodels
from tqdm import tqdm

from bench import BenchException
from bench.config import RunConfig
from bench.ingest import ingest
from bench.report import emit_report, write_forecasts
from bench.synthetic import generate_series
from evaluation.evaluation import run_competition, run_precompetition
from evaluation.stats_tests import compare_configurations
from learners import get_learner
from utils.enums import Phase
from utils.host_info import HostInfo
from utils.logging import LazyForecastLogger, set_verbosity

logger = LazyForecastLogger(__name__)

EXIT_SUCCESS = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2


def load_series(config: RunConfig, failures: list) -> list:
    if config.synthetic > 0:
        return generate_series(config.synthetic, config.synthetic_length, config.seed)
    return ingest(config.data_dir, config.default_anchor, failures)


def run_info(config: RunConfig) -> dict:
    try:
        host = HostInfo.get_all_properties()
    except Exception:
        logger.warning("The host description is not available", exc_info=True)
        host = {}
    return dict(config=config.to_dict(), seed=config.seed, config_hash=config.config_hash(),
                learner=get_learner().describe(), host=host,
                versions=dict(numpy=numpy.__version__, pandas=pandas.__version__, scipy=scipy.__version__,
                              statsmodels=statsmodels.__version__))


def run(config: RunConfig) -> int:
    """
    Ingest, preprocessing, phase driver and reports. Returns 0 on success, 1 on a fatal
    error and 2 when some series or strategies failed but the run completed.
    """
    set_verbosity(config.verbose)
    logger.info("Starting %s", config)
    failures = []
    try:
        series = load_series(config, failures)
        configurations = config.configurations()
        logger.info("%s series, %s configurations, strategies %s", len(series), len(configurations),
                    config.strategies)
        with tqdm(total=2 * len(series) * len(configurations), desc="%s grid" % config.phase.value,
                  disable=None) as progress:
            if config.phase == Phase.precompetition:
                report = run_precompetition(series, configurations, config.strategies, config.horizon,
                                            config.kmax_grid, workers=config.workers, progress=progress,
                                            max_iter=config.max_iter)
                report.failures = failures + report.failures
                if len(report) == 0:
                    raise BenchException("No strategy could be evaluated on any series")
                emit_report(report, compare_configurations(report, config.alpha), config.out_dir, run_info(config))
                failures = report.failures
            else:
                forecasts = run_competition(series, configurations, config.strategies, config.horizon,
                                            config.kmax_grid, workers=config.workers, progress=progress,
                                            max_iter=config.max_iter)
                forecasts.failures = failures + forecasts.failures
                if len(forecasts.forecasts) == 0:
                    raise BenchException("No strategy could forecast any series")
                write_forecasts(forecasts, config.out_dir, run_info(config))
                failures = forecasts.failures
    except Exception:
        logger.error("The run failed.", exc_info=True)
        return EXIT_FATAL
    if failures:
        logger.warning("Finished with %s failures (see run.json)", len(failures))
        return EXIT_PARTIAL
    logger.info("Finished")
    return EXIT_SUCCESS
