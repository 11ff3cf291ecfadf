from abc import ABC, abstractmethod

import numpy as np

from ForecastModel.base import (BaseModel, LagSet, TimeSeries, embed_multi_output, embed_single_output,
                                query_vector)
from learners import get_learner
from learners.base import BasicLearner
from utils.enums import AggregationMode, CriterionKind, DirmoVariant, StrategyKind
from utils.logging import LazyForecastLogger

logger = LazyForecastLogger(__name__)

VARIANT_NAMES = ("REC", "DIR", "DIRREC", "MIMO-LOO", "MIMO-ACFLIN", "DIRMO-SEL", "DIRMO-AVG", "DIRMO-WAVG")


class InvalidBlockSizeException(BaseModel.ModelValidationException):
    pass


def divisors(horizon: int) -> list:
    return [s for s in range(1, horizon + 1) if horizon % s == 0]


class StrategySpec(BaseModel):
    """
    One forecasting strategy for a horizon H. `s` is the DIRMO block size (a divisor of H),
    `s_scores` the validation SMAPE of every block size (DIRMO-WAVG) and `kmax_by_s` the
    tuned Kmax of every block size.
    """
    kind = StrategyKind.REC
    horizon = 56
    lags = None
    s = None
    mimo_criterion = CriterionKind.loo
    dirmo_variant = DirmoVariant.SEL
    kmax = 50
    policy = AggregationMode.WINNER
    s_scores = None
    kmax_by_s = None

    def validate(self):
        self.kind = StrategyKind.parse(self.kind)
        self.horizon = int(self.horizon)
        if self.horizon < 1:
            raise StrategySpec.ModelValidationException("The horizon should be positive")
        if self.lags is not None and not isinstance(self.lags, LagSet):
            self.lags = LagSet(lags=self.lags)
        self.mimo_criterion = CriterionKind.parse(self.mimo_criterion)
        self.dirmo_variant = DirmoVariant.parse(self.dirmo_variant)
        self.policy = AggregationMode.parse(self.policy)
        self.kmax = int(self.kmax)
        if self.kind in (StrategyKind.REC, StrategyKind.DIR, StrategyKind.DIRREC):
            self.mimo_criterion = CriterionKind.loo
        if self.kind == StrategyKind.MIMO:
            self.s = self.horizon
        if self.kind == StrategyKind.DIRMO:
            if self.s is None and self.dirmo_variant == DirmoVariant.SEL:
                raise InvalidBlockSizeException("DIRMO-SEL needs a block size")
            if self.s is not None and (int(self.s) < 1 or self.horizon % int(self.s) != 0):
                raise InvalidBlockSizeException("The block size %s does not divide H=%s" % (self.s, self.horizon))
        if self.s is not None:
            self.s = int(self.s)
        self.kmax_by_s = dict(self.kmax_by_s or {})

    @classmethod
    def from_name(cls, name: str, horizon: int, lags=None, **kwargs):
        """Builds the spec of a named variant (REC, DIR, DIRREC, MIMO-LOO, MIMO-ACFLIN, DIRMO-SEL/AVG/WAVG)"""
        kind, _, suffix = str(name).strip().upper().partition('-')
        params = dict(kind=kind, horizon=horizon, lags=lags)
        if kind == StrategyKind.MIMO.value:
            params['mimo_criterion'] = suffix.lower() if suffix else CriterionKind.loo
        elif kind == StrategyKind.DIRMO.value:
            params['dirmo_variant'] = DirmoVariant.parse(suffix) if suffix else DirmoVariant.SEL
            if 's' not in kwargs and params['dirmo_variant'] == DirmoVariant.SEL:
                params['s'] = 1
        elif suffix:
            raise StrategySpec.ModelValidationException("Unknown strategy variant %s" % name)
        params.update(kwargs)
        return cls(**params)

    @property
    def name(self) -> str:
        if self.kind == StrategyKind.MIMO:
            return "MIMO-%s" % self.mimo_criterion.value.upper()
        if self.kind == StrategyKind.DIRMO:
            return "DIRMO-%s" % self.dirmo_variant.value
        return self.kind.value

    def model_count(self, s: int = None) -> tuple:
        """(number of models, output size of each model)"""
        H = self.horizon
        if self.kind == StrategyKind.REC:
            return 1, 1
        if self.kind in (StrategyKind.DIR, StrategyKind.DIRREC):
            return H, 1
        if self.kind == StrategyKind.MIMO:
            return 1, H
        s = s if s is not None else self.s
        if s is None:
            raise InvalidBlockSizeException("The block size of %s is not fixed" % self.name)
        return H // s, s

    def replace(self, **kwargs) -> 'StrategySpec':
        params = {key: value for key, value in self.__dict__.items()}
        params.update(kwargs)
        return StrategySpec(**params)

    def __str__(self):
        res = "%s H=%s %s Kmax=%s %s" % (self.name, self.horizon, self.lags, self.kmax, self.policy.value)
        return res + (" s=%s" % self.s if self.kind == StrategyKind.DIRMO and self.s else "")


class ForecastResult(BaseModel):
    """`values[h-1]` is the forecast h steps ahead; `diagnostics` holds one record per model query"""
    values = None
    diagnostics = None

    def validate(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.values.size < 1 or not np.isfinite(self.values).all():
            raise ForecastResult.ModelValidationException("A forecast needs finite values")
        self.diagnostics = list(self.diagnostics or [])

    def __len__(self):
        return self.values.size

    def __str__(self):
        return "forecast of %s steps" % len(self)


class BaseStrategy(ABC):
    kind = None

    def __init__(self, spec: StrategySpec, learner: BasicLearner = None):
        if spec.kind != self.kind:
            raise StrategySpec.ModelValidationException("%s can not run a %s spec" % (
                self.__class__.__name__, spec.kind.value))
        if spec.lags is None:
            raise StrategySpec.ModelValidationException("%s has no lag set" % spec.name)
        self.spec = spec
        self.learner = learner

    def get_learner(self, kmax: int = None) -> BasicLearner:
        if self.learner is not None:
            return self.learner
        return get_learner(kmax=kmax if kmax is not None else self.spec.kmax, policy=self.spec.policy)

    def forecast(self, series: TimeSeries) -> ForecastResult:
        values, diagnostics = self._forecast(series)
        if len(values) != self.spec.horizon:
            raise ForecastResult.ModelValidationException(
                "%s returned %s values for H=%s" % (self.spec.name, len(values), self.spec.horizon))
        logger.debug("%s on %s: %s", self.spec, series.name, np.round(values, 3).tolist())
        return ForecastResult(values=values, diagnostics=diagnostics)

    @abstractmethod
    def _forecast(self, series: TimeSeries):
        """Returns the H forecasts and the per-query diagnostics"""
        pass


class RecursiveStrategy(BaseStrategy):
    """One one-step model; each forecast is appended to the series and fed back as input"""
    kind = StrategyKind.REC

    def _forecast(self, series):
        learner = self.get_learner()
        lags = self.spec.lags
        dataset = embed_single_output(series, lags, 1)
        extended, values, diagnostics = series, [], []
        for h in range(1, self.spec.horizon + 1):
            prediction = learner.predict(dataset, query_vector(extended, lags), CriterionKind.loo, series)
            values.append(prediction.value[0])
            diagnostics.append(dict(step=h, **prediction.diagnostics))
            extended = extended.extend(prediction.value[:1])
        return np.array(values), diagnostics


class DirectStrategy(BaseStrategy):
    """One h-step model per horizon, all queried with observed values only"""
    kind = StrategyKind.DIR

    def _forecast(self, series):
        learner = self.get_learner()
        lags = self.spec.lags
        query = query_vector(series, lags)
        values, diagnostics = [], []
        for h in range(1, self.spec.horizon + 1):
            prediction = learner.predict(embed_single_output(series, lags, h), query, CriterionKind.loo, series)
            values.append(prediction.value[0])
            diagnostics.append(dict(step=h, **prediction.diagnostics))
        return np.array(values), diagnostics


def dirrec_lags(lags: LagSet, h: int) -> list:
    """
    Inputs of the DIRREC model for step h, relative to the last known or forecast value:
    the h-1 most recent values followed by the base lags still anchored at the last observation.
    """
    return list(range(1, h)) + [lag + h - 1 for lag in lags]


class DirRecStrategy(BaseStrategy):
    """One one-step model per horizon; model h takes the h-1 previous forecasts as extra inputs"""
    kind = StrategyKind.DIRREC

    def _forecast(self, series):
        learner = self.get_learner()
        extended, values, diagnostics = series, [], []
        for h in range(1, self.spec.horizon + 1):
            lags = dirrec_lags(self.spec.lags, h)
            prediction = learner.predict(embed_single_output(series, lags, 1), query_vector(extended, lags),
                                         CriterionKind.loo, series)
            values.append(prediction.value[0])
            diagnostics.append(dict(step=h, inputs=len(lags), **prediction.diagnostics))
            extended = extended.extend(prediction.value[:1])
        return np.array(values), diagnostics


def _block_forecast(series: TimeSeries, spec: StrategySpec, s: int, learner: BasicLearner):
    """H/s multi-output models; block p covers steps (p-1)s+1..ps"""
    query = query_vector(series, spec.lags)
    known, values, diagnostics = series, [], []
    for p in range(spec.horizon // s):
        dataset = embed_multi_output(series, spec.lags, first=p * s + 1, block=s)
        prediction = learner.predict(dataset, query, spec.mimo_criterion, known)
        values.extend(prediction.value)
        diagnostics.append(dict(block=p + 1, s=s, **prediction.diagnostics))
        if spec.mimo_criterion == CriterionKind.acflin:
            known = known.extend(prediction.value)
    return np.array(values), diagnostics


class MimoStrategy(BaseStrategy):
    """A single model returning the whole horizon as one vector"""
    kind = StrategyKind.MIMO

    def _forecast(self, series):
        return _block_forecast(series, self.spec, self.spec.horizon, self.get_learner())


class DirMoStrategy(BaseStrategy):
    """
    H/s vector models of size s. SEL uses the spec's s, AVG averages the forecasts of every
    divisor of H and WAVG weights them by the inverse of their validation SMAPE.
    """
    kind = StrategyKind.DIRMO

    def forecast_block_size(self, series: TimeSeries, s: int):
        if self.spec.horizon % s != 0:
            raise InvalidBlockSizeException("The block size %s does not divide H=%s" % (s, self.spec.horizon))
        return _block_forecast(series, self.spec, s, self.get_learner(self.spec.kmax_by_s.get(s)))

    def _forecast(self, series):
        if self.spec.dirmo_variant == DirmoVariant.SEL:
            return self.forecast_block_size(series, self.spec.s)

        block_sizes = divisors(self.spec.horizon)
        forecasts, diagnostics = [], []
        for s in block_sizes:
            values, diag = self.forecast_block_size(series, s)
            forecasts.append(values)
            diagnostics.extend(diag)
        forecasts = np.array(forecasts)
        if self.spec.dirmo_variant == DirmoVariant.AVG:
            return forecasts.mean(axis=0), diagnostics

        if not self.spec.s_scores or any(s not in self.spec.s_scores for s in block_sizes):
            raise StrategySpec.ModelValidationException("DIRMO-WAVG needs the validation score of every s")
        scores = np.array([float(self.spec.s_scores[s]) for s in block_sizes])
        exact = scores == 0
        if exact.any():
            return forecasts[exact].mean(axis=0), diagnostics
        weights = 1.0 / scores
        return (weights[:, None] * forecasts).sum(axis=0) / weights.sum(), diagnostics


STRATEGIES = {
    StrategyKind.REC: RecursiveStrategy,
    StrategyKind.DIR: DirectStrategy,
    StrategyKind.DIRREC: DirRecStrategy,
    StrategyKind.MIMO: MimoStrategy,
    StrategyKind.DIRMO: DirMoStrategy,
}


def get_strategy(spec: StrategySpec, learner: BasicLearner = None) -> BaseStrategy:
    return STRATEGIES[spec.kind](spec, learner)


def forecast_recursive(series: TimeSeries, spec: StrategySpec, learner: BasicLearner = None) -> ForecastResult:
    return RecursiveStrategy(spec, learner).forecast(series)


def forecast_direct(series: TimeSeries, spec: StrategySpec, learner: BasicLearner = None) -> ForecastResult:
    return DirectStrategy(spec, learner).forecast(series)


def forecast_dirrec(series: TimeSeries, spec: StrategySpec, learner: BasicLearner = None) -> ForecastResult:
    return DirRecStrategy(spec, learner).forecast(series)


def forecast_mimo(series: TimeSeries, spec: StrategySpec, learner: BasicLearner = None) -> ForecastResult:
    return MimoStrategy(spec, learner).forecast(series)


def forecast_dirmo(series: TimeSeries, spec: StrategySpec, learner: BasicLearner = None) -> ForecastResult:
    return DirMoStrategy(spec, learner).forecast(series)
