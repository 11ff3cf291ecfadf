import itertools

import numpy as np
import pandas as pd

from ForecastModel.base import BaseModel
from utils.enums import AggregationMode, Phase, StrategyKind

ORIGIN_COUNT = 3
REPORT_COLUMNS = ['series', 'strategy', 'config', 'origin', 'smape']


class EvaluationException(Exception):
    pass


class LengthMismatchException(EvaluationException):
    pass


class OriginOutOfRangeException(EvaluationException):
    pass


class EmptyInputException(EvaluationException):
    pass


def mean_score(values) -> float:
    """Plain mean of SMAPE values in the given order; every stored aggregate goes through it"""
    values = np.asarray(list(values), dtype=float)
    if values.size == 0:
        raise EmptyInputException("A mean SMAPE needs at least one value")
    return float(values.mean())


def _as_range(value, name):
    if value is None:
        return None
    start, stop = (int(i) for i in value)
    if start < 0 or stop < start:
        raise SplitPlan.ModelValidationException("Invalid %s range [%s, %s)" % (name, start, stop))
    return start, stop


class SplitPlan(BaseModel):
    """
    Half-open index ranges of one series: fit on `train`, tune on `validation`, score on
    `test`. Each origin (start, steps) launches a forecast at `start` scored on `steps` values.
    """
    train = None
    validation = None
    test = None
    origins = None
    phase = Phase.precompetition

    def validate(self):
        self.phase = Phase.parse(self.phase)
        self.train = _as_range(self.train, 'train')
        self.validation = _as_range(self.validation, 'validation')
        self.test = _as_range(self.test, 'test')
        if self.train is None or self.validation is None or self.test is None:
            raise SplitPlan.ModelValidationException("A plan needs train, validation and test ranges")
        if not (self.train[0] < self.train[1] <= self.validation[0] < self.validation[1] <= self.test[0]
                < self.test[1]):
            raise SplitPlan.ModelValidationException("The ranges of a plan should be disjoint and ordered")
        self.origins = [(int(start), int(steps)) for start, steps in (self.origins or [])]
        if len(self.origins) == 0:
            raise SplitPlan.ModelValidationException("A plan needs at least one origin")
        for start, steps in self.origins:
            if steps < 1 or start < self.test[0] or start + steps > self.test[1]:
                raise OriginOutOfRangeException("The origin (%s, %s) lies outside the test range %s" % (
                    start, steps, self.test))

    @staticmethod
    def default_origins(test_start: int, horizon: int) -> list:
        """Origins at offsets 0, H/8 and 2H/8 of the test window, each running to its end"""
        shift = horizon // 8
        offsets = sorted(set(i * shift for i in range(ORIGIN_COUNT)))
        return [(test_start + offset, horizon - offset) for offset in offsets]

    @classmethod
    def for_length(cls, length: int, horizon: int) -> 'SplitPlan':
        """Test is the last H values, validation the H before it, train everything earlier"""
        test_start = length - horizon
        validation_start = test_start - horizon
        if validation_start < 1:
            raise OriginOutOfRangeException("%s values can not hold a validation and a test window of %s" % (
                length, horizon))
        return cls(train=(0, validation_start), validation=(validation_start, test_start),
                   test=(test_start, length), origins=cls.default_origins(test_start, horizon))

    @classmethod
    def for_competition(cls, length: int, horizon: int) -> 'SplitPlan':
        """Tune on the last H observed values, then forecast the H values after the series end"""
        validation_start = length - horizon
        if validation_start < 1:
            raise OriginOutOfRangeException("%s values can not hold a validation window of %s" % (length, horizon))
        return cls(train=(0, validation_start), validation=(validation_start, length),
                   test=(length, length + horizon), origins=[(length, horizon)], phase=Phase.competition)

    @property
    def validation_cutoff(self) -> int:
        return self.validation[0]

    def __str__(self):
        return "train %s validation %s test %s origins %s" % (self.train, self.validation, self.test, self.origins)


class Configuration(BaseModel):
    """One cell of the preprocessing grid: deseasonalization, input selection and model selection"""
    deseasonalize = True
    input_selection = False
    model_selection = AggregationMode.WINNER

    def validate(self):
        self.deseasonalize = bool(self.deseasonalize)
        self.input_selection = bool(self.input_selection)
        self.model_selection = AggregationMode.parse(self.model_selection)

    @property
    def label(self) -> str:
        return "%s-%s-%s" % ("DES" if self.deseasonalize else "RAW", "FBS" if self.input_selection else "PACF",
                             self.model_selection.value)

    @classmethod
    def grid(cls, deseasonalize=None, input_selection=None, model_selection=None) -> list:
        """Every combination; a None argument spans all of its values"""
        deseasonalize = [True, False] if deseasonalize is None else [deseasonalize]
        input_selection = [False, True] if input_selection is None else [input_selection]
        if model_selection is None:
            model_selection = list(AggregationMode)
        elif not isinstance(model_selection, (list, tuple)):
            model_selection = [model_selection]
        return [cls(deseasonalize=d, input_selection=i, model_selection=m)
                for d, i, m in itertools.product(deseasonalize, input_selection, model_selection)]

    def accepts(self, strategy_name: str) -> bool:
        """DIRMO is not run with input selection"""
        return not (self.input_selection and strategy_name.upper().startswith(StrategyKind.DIRMO.value))

    def __eq__(self, other):
        return isinstance(other, Configuration) and self.label == other.label

    def __hash__(self):
        return hash(self.label)

    def __str__(self):
        return self.label


class EvaluationReport(BaseModel):
    """
    SMAPE rows keyed by (series, strategy, config, origin), the per-series failures and
    the validation choices. Every aggregate is derived from the rows.
    """
    rows = None
    failures = None
    tuning = None
    metadata = None

    def validate(self):
        self.rows = list(self.rows or [])
        self.failures = list(self.failures or [])
        self.tuning = list(self.tuning or [])
        self.metadata = dict(self.metadata or {})
        for row in self.rows:
            if not 0.0 <= row['smape'] <= 200.0:
                raise EvaluationReport.ModelValidationException("SMAPE out of [0, 200]: %s" % row)

    def frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.rows, columns=REPORT_COLUMNS)
        return frame.sort_values(['config', 'strategy', 'series', 'origin'], kind='mergesort').reset_index(drop=True)

    @property
    def configurations(self) -> list:
        return sorted(set(row['config'] for row in self.rows))

    def series_scores(self) -> pd.DataFrame:
        """Mean SMAPE over the origins of every (config, strategy, series)"""
        grouped = self.frame().groupby(['config', 'strategy', 'series'], sort=True)['smape']
        return grouped.agg(mean_score).reset_index()

    def smape_star(self) -> pd.DataFrame:
        """Mean over the series of the per-series SMAPE"""
        grouped = self.series_scores().groupby(['config', 'strategy'], sort=True)['smape']
        return grouped.agg(mean_score).reset_index().rename(columns={'smape': 'smape_star'})

    def score_matrix(self, config: str) -> pd.DataFrame:
        """Series x strategy per-series SMAPE of one configuration, restricted to complete series"""
        scores = self.series_scores()
        scores = scores[scores['config'] == config]
        if scores.empty:
            raise EmptyInputException("No scores for configuration %s" % config)
        return scores.pivot(index='series', columns='strategy', values='smape').dropna(axis=0, how='any')

    def __len__(self):
        return len(self.rows)

    def __str__(self):
        return "report of %s rows, %s failures" % (len(self.rows), len(self.failures))

class CompetitionForecasts(BaseModel):
    """`forecasts[series][column]` holds the H values emitted after the series end"""
    horizon = 56
    forecasts = None
    failures = None
    tuning = None
    metadata = None

    def validate(self):
        self.forecasts = dict(self.forecasts or {})
        self.failures = list(self.failures or [])
        self.tuning = list(self.tuning or [])
        self.metadata = dict(self.metadata or {})
        for series, columns in self.forecasts.items():
            for column, values in columns.items():
                if len(values) != self.horizon:
                    raise CompetitionForecasts.ModelValidationException(
                        "%s of %s holds %s values instead of %s" % (column, series, len(values), self.horizon))

    def frame(self, series: str) -> pd.DataFrame:
        columns = self.forecasts[series]
        frame = pd.DataFrame({column: columns[column] for column in sorted(columns)})
        frame.insert(0, 'step', range(1, self.horizon + 1))
        return frame

    def __str__(self):
        return "forecasts of %s series, %s failures" % (len(self.forecasts), len(self.failures))
