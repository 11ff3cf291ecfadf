import threading
from functools import partial

import numpy as np

from ForecastModel.base import BaseModel, TimeSeries
from ForecastModel.strategies import VARIANT_NAMES, StrategySpec, divisors, get_strategy
from evaluation.models import (CompetitionForecasts, Configuration, EmptyInputException, EvaluationReport,
                               LengthMismatchException, OriginOutOfRangeException, SplitPlan, mean_score)
from learners.base import BasicLearner
from utils.async_task import TaskPool
from utils.enums import DirmoVariant, StrategyKind
from utils.logging import LazyForecastLogger
from utils.preprocessing import (TargetSpec, deseasonalize, fit_seasonal, forward_backward_select, repair_gaps,
                                 reseasonalize, select_embedding)

logger = LazyForecastLogger(__name__)

DEFAULT_KMAX_GRID = (20, 50, 100)
DIRMO_KEY = StrategyKind.DIRMO.value


def smape(actual, forecast) -> float:
    """
    Mean of |f - y| / ((|f| + |y|) / 2) in percent. Forecasts are clamped at 0 and a
    term whose actual and forecast are both 0 counts as 0.
    """
    actual = np.asarray(actual, dtype=float).reshape(-1)
    forecast = np.maximum(np.asarray(forecast, dtype=float).reshape(-1), 0.0)
    if actual.size == 0 or actual.size != forecast.size:
        raise LengthMismatchException("SMAPE needs two non-empty vectors of the same length (%s, %s)" % (
            actual.size, forecast.size))
    numerator = np.abs(forecast - actual)
    denominator = (np.abs(forecast) + np.abs(actual)) / 2.0
    terms = np.divide(numerator, denominator, out=np.zeros_like(numerator), where=denominator > 0)
    return float(terms.mean() * 100.0)


def smape_star(per_series) -> float:
    return mean_score(per_series)


class PreparedSeries(BaseModel):
    """A gap-free history in model space (deseasonalized or raw) with its selected lags"""
    series = None
    seasonal = None
    lags = None
    trace = None

    def to_original(self, values) -> np.ndarray:
        """Maps forecasts made right after the history back to the original scale"""
        values = np.asarray(values, dtype=float)
        if self.seasonal is None:
            return values
        return reseasonalize(self.series.following(values), self.seasonal).values.copy()


def prepare(history: TimeSeries, configuration: Configuration, block: int = 1, max_iter: int = 50) -> PreparedSeries:
    """Gap repair, optional deseasonalization, PACF lags and optional delta-test search"""
    repaired = repair_gaps(history)
    seasonal, model_series = None, repaired
    if configuration.deseasonalize:
        seasonal = fit_seasonal(repaired)
        model_series = deseasonalize(repaired, seasonal)
    lags = select_embedding(model_series)
    trace = None
    if configuration.input_selection:
        trace = forward_backward_select(model_series, lags, TargetSpec(first=1, block=block), max_iter=max_iter)
        logger.debug("%s: %s -> %s", history.name, lags, trace)
        lags = trace.final
    return PreparedSeries(series=model_series, seasonal=seasonal, lags=lags, trace=trace)


def selection_block(spec: StrategySpec) -> int:
    """Output size targeted by the input search: the whole horizon for MIMO, one step otherwise"""
    return spec.horizon if spec.kind == StrategyKind.MIMO else 1


class PreparationCache(object):
    """Prepared histories keyed by series, cutoff and the preprocessing they went through"""

    def __init__(self, max_iter: int = 50):
        self.max_iter = max_iter
        self.__entries = {}
        self.__lock = threading.Lock()

    def get(self, series: TimeSeries, cutoff: int, configuration: Configuration, block: int = 1) -> PreparedSeries:
        key = (series.name, cutoff, configuration.deseasonalize, configuration.input_selection,
               block if configuration.input_selection else None)
        with self.__lock:
            if key in self.__entries:
                return self.__entries[key]
        prepared = prepare(series.window(0, cutoff), configuration, block, self.max_iter)
        with self.__lock:
            return self.__entries.setdefault(key, prepared)

    def __len__(self):
        return len(self.__entries)


def forecast_from(series: TimeSeries, cutoff: int, spec: StrategySpec, configuration: Configuration = None,
                  cache: PreparationCache = None, learner: BasicLearner = None) -> np.ndarray:
    """
    Forecasts spec.horizon values right after position `cutoff`, in the original scale,
    using nothing at or after the cutoff. Without a configuration the history is only
    gap-repaired and the spec's own lags are kept.
    """
    if not 1 <= cutoff <= len(series):
        raise OriginOutOfRangeException("Cutoff %s outside a series of %s values" % (cutoff, len(series)))
    if configuration is None:
        history = repair_gaps(series.window(0, cutoff))
        prepared = PreparedSeries(series=history, lags=spec.lags if spec.lags is not None else select_embedding(
            history))
        run_spec = spec.replace(lags=prepared.lags)
    else:
        cache = cache if cache is not None else PreparationCache()
        prepared = cache.get(series, cutoff, configuration, selection_block(spec))
        run_spec = spec.replace(lags=prepared.lags, policy=configuration.model_selection)
    result = get_strategy(run_spec, learner).forecast(prepared.series)
    return prepared.to_original(result.values)


def evaluate_multi_origin(series: TimeSeries, spec: StrategySpec, plan: SplitPlan,
                          configuration: Configuration = None, cache: PreparationCache = None,
                          learner: BasicLearner = None) -> list:
    """
    One SMAPE per origin (start, steps): fit on the values before `start`, forecast H
    values and score the first `steps` against the gap-repaired actuals.
    """
    actual = repair_gaps(series).values
    res = []
    for start, steps in plan.origins:
        if start < 1 or start + steps > len(series):
            raise OriginOutOfRangeException("The origin (%s, %s) does not fit %s values" % (start, steps, len(series)))
        if steps > spec.horizon:
            raise OriginOutOfRangeException("The origin (%s, %s) exceeds H=%s" % (start, steps, spec.horizon))
        forecast = forecast_from(series, start, spec, configuration, cache, learner)
        res.append(smape(actual[start:start + steps], forecast[:steps]))
    return res


def _strategy_key(name: str) -> str:
    return DIRMO_KEY if name.upper().startswith(DIRMO_KEY) else name


def validation_scores(series: TimeSeries, plan: SplitPlan, names, configuration: Configuration, horizon: int,
                      kmax_grid, cache: PreparationCache, learner: BasicLearner = None):
    """
    Validation SMAPE of one series for every (strategy, Kmax, s) candidate, s being set for
    DIRMO only. Returns the scores and the failures of the strategies that could not run.
    """
    cutoff = plan.validation_cutoff
    steps = min(horizon, plan.validation[1] - cutoff)
    actual = repair_gaps(series).values[cutoff:cutoff + steps]
    scores, failures = {}, []
    for key in sorted(set(_strategy_key(name) for name in names)):
        try:
            for kmax in kmax_grid:
                if key == DIRMO_KEY:
                    for s in divisors(horizon):
                        spec = StrategySpec.from_name("DIRMO-SEL", horizon, s=s, kmax=kmax)
                        forecast = forecast_from(series, cutoff, spec, configuration, cache, learner)
                        scores[(key, kmax, s)] = smape(actual, forecast[:steps])
                else:
                    spec = StrategySpec.from_name(key, horizon, kmax=kmax)
                    forecast = forecast_from(series, cutoff, spec, configuration, cache, learner)
                    scores[(key, kmax, None)] = smape(actual, forecast[:steps])
        except Exception as ex:
            logger.warning("Validation of %s on %s (%s) failed: %s", key, series.name, configuration, ex)
            failures.append(dict(series=series.name, strategy=key, config=configuration.label, error=str(ex)))
    return scores, failures


def _best(candidates):
    """Lowest mean score; ties go to the first (smallest) candidate"""
    best = None
    for candidate, score in candidates:
        if best is None or score < best[1]:
            best = (candidate, score)
    return best


def select_tuned_specs(series_scores: list, names, horizon: int, kmax_grid) -> tuple:
    """
    Averages the validation scores over the series and builds the tuned spec of every
    strategy: Kmax for all of them, plus s (SEL), per-s Kmax and per-s scores for DIRMO.
    """
    pooled = {}
    for scores in series_scores:
        for key, value in scores.items():
            pooled.setdefault(key, []).append(value)
    means = {key: float(np.mean(values)) for key, values in pooled.items()}
    kmax_grid = sorted(kmax_grid)

    specs, records = {}, []
    for name in names:
        key = _strategy_key(name)
        if key == DIRMO_KEY:
            kmax_by_s, s_scores = {}, {}
            for s in divisors(horizon):
                best = _best((kmax, means[(key, kmax, s)]) for kmax in kmax_grid if (key, kmax, s) in means)
                if best is not None:
                    kmax_by_s[s], s_scores[s] = best
            if len(s_scores) != len(divisors(horizon)):
                continue
            s_best, score = _best((s, s_scores[s]) for s in sorted(s_scores))
            spec = StrategySpec.from_name(name, horizon, s=s_best, kmax=kmax_by_s[s_best], kmax_by_s=kmax_by_s,
                                          s_scores=s_scores)
            if spec.dirmo_variant != DirmoVariant.SEL:
                score = None
        else:
            best = _best((kmax, means[(key, kmax, None)]) for kmax in kmax_grid if (key, kmax, None) in means)
            if best is None:
                continue
            spec = StrategySpec.from_name(name, horizon, kmax=best[0])
            score = best[1]
        specs[name] = spec
        records.append(dict(strategy=name, kmax=spec.kmax, s=spec.s, validation_smape=score,
                            kmax_by_s=spec.kmax_by_s or None, s_scores=spec.s_scores))
    return specs, records


def _collect(results: dict) -> dict:
    """Splits keyed task results into values and failures"""
    values, failures = {}, []
    for key, result in results.items():
        if isinstance(result, Exception):
            config, series = key
            logger.error("%s failed on %s: %s", config, series, result)
            failures.append(dict(series=series, strategy='*', config=config, error=str(result)))
        else:
            values[key] = result
    return values, failures


def tune(seriesset: list, plans: dict, configurations: list, strategies, horizon: int, kmax_grid,
         pool: TaskPool, cache: PreparationCache, learner: BasicLearner = None) -> tuple:
    """Validation pass over the series x configuration grid"""
    tasks = {}
    for configuration in configurations:
        names = [name for name in strategies if configuration.accepts(name)]
        for series in seriesset:
            tasks[(configuration.label, series.name)] = partial(
                validation_scores, series, plans[series.name], names, configuration, horizon, kmax_grid, cache,
                learner)
    values, failures = _collect(pool.run(tasks))

    tuned, records = {}, []
    for configuration in configurations:
        names = [name for name in strategies if configuration.accepts(name)]
        per_series = []
        for series in seriesset:
            key = (configuration.label, series.name)
            if key in values:
                scores, series_failures = values[key]
                per_series.append(scores)
                failures.extend(series_failures)
        specs, config_records = select_tuned_specs(per_series, names, horizon, kmax_grid)
        for name in names:
            if name not in specs:
                logger.error("%s could not be tuned under %s", name, configuration)
        tuned[configuration.label] = specs
        records.extend(dict(config=configuration.label, **record) for record in config_records)
    return tuned, records, failures


def _default_plans(seriesset, horizon, builder):
    """Plans of the series long enough for one; the others are returned as failures"""
    plans, failures = {}, []
    for series in seriesset:
        try:
            plans[series.name] = builder(len(series), horizon)
        except (BaseModel.ModelValidationException, OriginOutOfRangeException) as ex:
            failures.append(dict(series=series.name, strategy="*", config="*", error=str(ex)))
    return plans, failures


def _test_scores(series: TimeSeries, plan: SplitPlan, specs: dict, configuration: Configuration,
                 cache: PreparationCache, learner: BasicLearner = None):
    rows, failures = [], []
    for name in sorted(specs):
        try:
            scores = evaluate_multi_origin(series, specs[name], plan, configuration, cache, learner)
        except Exception as ex:
            logger.warning("%s on %s (%s) failed: %s", name, series.name, configuration, ex)
            failures.append(dict(series=series.name, strategy=name, config=configuration.label, error=str(ex)))
            continue
        for (start, _), score in zip(plan.origins, scores):
            rows.append(dict(series=series.name, strategy=name, config=configuration.label, origin=start,
                             smape=score))
    return rows, failures


def run_precompetition(seriesset: list, configurations: list, strategies=VARIANT_NAMES, horizon: int = 56,
                       kmax_grid=DEFAULT_KMAX_GRID, plans: dict = None, workers: int = 1, progress=None,
                       max_iter: int = 50, learner: BasicLearner = None) -> EvaluationReport:
    """
    Tunes every strategy on the validation windows, then scores the tuned strategies on the
    test origins of every series. A failing series is recorded and skipped.
    """
    if len(seriesset) == 0:
        raise EmptyInputException("No series to evaluate")
    plan_failures = []
    if plans is None:
        plans, plan_failures = _default_plans(seriesset, horizon, SplitPlan.for_length)
    seriesset = [series for series in seriesset if series.name in plans]
    pool = TaskPool(workers, progress)
    cache = PreparationCache(max_iter)
    tuned, records, failures = tune(seriesset, plans, configurations, strategies, horizon, kmax_grid, pool, cache,
                                    learner)
    failures.extend(plan_failures)

    tasks = {}
    for configuration in configurations:
        for series in seriesset:
            tasks[(configuration.label, series.name)] = partial(
                _test_scores, series, plans[series.name], tuned[configuration.label], configuration, cache, learner)
    values, task_failures = _collect(pool.run(tasks))
    failures.extend(task_failures)

    rows = []
    for key in sorted(values):
        series_rows, series_failures = values[key]
        rows.extend(series_rows)
        failures.extend(series_failures)
    logger.info("Pre-competition finished: %s rows, %s failures", len(rows), len(failures))
    return EvaluationReport(rows=rows, failures=_sorted_failures(failures), tuning=records,
                            metadata=dict(horizon=horizon, kmax_grid=list(kmax_grid)))


def _sorted_failures(failures):
    return sorted(failures, key=lambda f: (f['config'], f['series'], f['strategy'], f['error']))


def _competition_forecasts(series: TimeSeries, specs: dict, configuration: Configuration, cache: PreparationCache,
                           learner: BasicLearner = None):
    forecasts, failures = {}, []
    for name in sorted(specs):
        try:
            forecasts[name] = forecast_from(series, len(series), specs[name], configuration, cache, learner)
        except Exception as ex:
            logger.warning("%s on %s (%s) failed: %s", name, series.name, configuration, ex)
            failures.append(dict(series=series.name, strategy=name, config=configuration.label, error=str(ex)))
    return forecasts, failures


def run_competition(seriesset: list, configurations, strategies=VARIANT_NAMES, horizon: int = 56,
                    kmax_grid=DEFAULT_KMAX_GRID, workers: int = 1, progress=None, max_iter: int = 50,
                    learner: BasicLearner = None) -> CompetitionForecasts:
    """
    Tunes on the last H observed values, then refits on each whole series (preprocessing
    included) and forecasts the H values after its end. With a single configuration the
    forecast columns are the strategy names, otherwise "<config> <strategy>".
    """
    if len(seriesset) == 0:
        raise EmptyInputException("No series to forecast")
    if isinstance(configurations, Configuration):
        configurations = [configurations]
    plans, plan_failures = _default_plans(seriesset, horizon, SplitPlan.for_competition)
    seriesset = [series for series in seriesset if series.name in plans]
    pool = TaskPool(workers, progress)
    cache = PreparationCache(max_iter)
    tuned, records, failures = tune(seriesset, plans, configurations, strategies, horizon, kmax_grid, pool, cache,
                                    learner)
    failures.extend(plan_failures)

    tasks = {}
    for configuration in configurations:
        for series in seriesset:
            tasks[(configuration.label, series.name)] = partial(
                _competition_forecasts, series, tuned[configuration.label], configuration, cache, learner)
    values, task_failures = _collect(pool.run(tasks))
    failures.extend(task_failures)

    forecasts = {}
    for (config, series_name) in sorted(values):
        series_forecasts, series_failures = values[(config, series_name)]
        failures.extend(series_failures)
        columns = forecasts.setdefault(series_name, {})
        for name, values_ in series_forecasts.items():
            columns[name if len(configurations) == 1 else "%s %s" % (config, name)] = values_
    logger.info("Competition finished: %s series, %s failures", len(forecasts), len(failures))
    return CompetitionForecasts(horizon=horizon, forecasts=forecasts, failures=_sorted_failures(failures),
                                tuning=records, metadata=dict(horizon=horizon, kmax_grid=list(kmax_grid)))
