import numpy as np

from ForecastModel.base import BaseModel, EmbeddedDataset, TimeSeries
from learners.base import BasicLearner, InsufficientNeighborsException, LearnerException, Prediction
from utils.enums import AggregationMode, CriterionKind
from utils.logging import LazyForecastLogger
from utils.preprocessing import PreprocessingException, acf, _pacf_values

logger = LazyForecastLogger(__name__)

MAX_ACF_LAGS = 56
WORST_DISCREPANCY = 2.0


class NeighborSweep(BaseModel):
    """
    Local constant models for k = 2..Kmax neighbors of one query: `predictions[i]` is the
    mean output of the k_range[i] nearest neighbors, `criterion[i]` its score (lower is better).
    """
    k_range = None
    predictions = None
    criterion = None
    criterion_kind = CriterionKind.loo

    def validate(self):
        self.k_range = np.asarray(self.k_range, dtype=int)
        self.predictions = np.asarray(self.predictions, dtype=float)
        if self.predictions.ndim == 1:
            self.predictions = self.predictions.reshape(-1, 1)
        self.criterion = np.asarray(self.criterion, dtype=float)
        self.criterion_kind = CriterionKind.parse(self.criterion_kind)
        if not (len(self.k_range) == len(self.predictions) == len(self.criterion)) or len(self.k_range) == 0:
            raise NeighborSweep.ModelValidationException("A sweep needs one prediction and one score per k")
        if not (np.isfinite(self.criterion).all() and (self.criterion >= 0).all()):
            raise NeighborSweep.ModelValidationException("Criterion values should be finite and non-negative")

    @property
    def best_index(self) -> int:
        return int(np.argmin(self.criterion))

    @property
    def k_star(self) -> int:
        return int(self.k_range[self.best_index])

    def __str__(self):
        return "sweep k=2..%s (%s), k*=%s" % (self.k_range[-1], self.criterion_kind.value, self.k_star)


class AggregationPolicy(BaseModel):
    mode = AggregationMode.WINNER

    def validate(self):
        self.mode = AggregationMode.parse(self.mode)

    def __str__(self):
        return self.mode.value


def order_neighbors(dataset: EmbeddedDataset, query) -> np.ndarray:
    """Row indices by increasing Euclidean distance to the query, ties by lowest index"""
    query = np.asarray(query, dtype=float).reshape(-1)
    if query.size != dataset.input_dimension:
        raise LearnerException("The query has dimension %s, the dataset %s" % (query.size, dataset.input_dimension))
    distances = ((dataset.inputs - query[None, :]) ** 2).sum(axis=1)
    return np.argsort(distances, kind='stable')


def press_residuals(neighbor_outputs: np.ndarray, k: int) -> np.ndarray:
    """
    Leave-one-out residuals of the k-neighbor mean, e_j(k) = k (y_[j] - y_q(k)) / (k - 1),
    for the first k rows of the (nearest-first) neighbor outputs.
    """
    nearest = np.asarray(neighbor_outputs, dtype=float)[:k]
    return k * (nearest - nearest.mean(axis=0)) / (k - 1)


def _neighbor_means(dataset, query, kmax):
    if kmax < 2:
        raise InsufficientNeighborsException("Kmax should be at least 2 (got %s)" % kmax)
    if len(dataset) < kmax:
        raise InsufficientNeighborsException("%s points are fewer than Kmax=%s" % (len(dataset), kmax))
    neighbor_outputs = dataset.outputs[order_neighbors(dataset, query)[:kmax]]
    k_range = np.arange(2, kmax + 1)
    predictions = np.array([neighbor_outputs[:k].mean(axis=0) for k in k_range])
    return k_range, predictions, neighbor_outputs


def neighbor_sweep_loo(dataset: EmbeddedDataset, query, kmax: int) -> NeighborSweep:
    """PRESS leave-one-out score per k, averaged over the output components"""
    k_range, predictions, neighbor_outputs = _neighbor_means(dataset, query, kmax)
    criterion = np.array([(press_residuals(neighbor_outputs, k) ** 2).mean(axis=0).mean() for k in k_range])
    return NeighborSweep(k_range=k_range, predictions=predictions, criterion=criterion,
                         criterion_kind=CriterionKind.loo)


def default_acf_lags(train_series: TimeSeries, dataset: EmbeddedDataset) -> int:
    max_lag = max(dataset.lags) if dataset.lags else dataset.input_dimension
    return int(max(2, min(dataset.output_dimension + max_lag, MAX_ACF_LAGS, len(train_series) // 4)))


def _abs_correlation(a, b):
    if np.std(a) == 0 or np.std(b) == 0:
        return None
    return abs(float(np.corrcoef(a, b)[0, 1]))


def neighbor_sweep_acflin(train_series: TimeSeries, dataset: EmbeddedDataset, query, kmax: int,
                          acf_lags: int = None) -> NeighborSweep:
    """
    Discrepancy score per k: how much appending the k-neighbor forecast to the training
    series changes its autocorrelation and partial autocorrelation profiles,
    (1 - |cor(acf(ts.y), acf(ts))|) + (1 - |cor(pacf(ts.y), pacf(ts))|).
    """
    if dataset.output_dimension < 2:
        raise LearnerException("The discrepancy criterion needs vector outputs (l >= 2)")
    k_range, predictions, _ = _neighbor_means(dataset, query, kmax)
    acf_lags = acf_lags if acf_lags is not None else default_acf_lags(train_series, dataset)
    history = np.asarray(train_series.values, dtype=float)
    if len(history) <= acf_lags + 1:
        raise LearnerException("The training series is too short for %s autocorrelation lags" % acf_lags)

    criterion = [acf_discrepancy(history, prediction, acf_lags) for prediction in predictions]
    return NeighborSweep(k_range=k_range, predictions=predictions, criterion=np.array(criterion),
                         criterion_kind=CriterionKind.acflin)


def acf_discrepancy(history, forecast, acf_lags: int) -> float:
    """Discrepancy score of one forecast appended to `history`, 0 when both profiles keep their shape"""
    history = np.asarray(history, dtype=float)
    try:
        reference_acf = acf(history, acf_lags)
        reference_pacf = _pacf_values(history, acf_lags)
    except PreprocessingException:
        return WORST_DISCREPANCY
    extended = np.concatenate([history, np.asarray(forecast, dtype=float).reshape(-1)])
    try:
        linear = _abs_correlation(acf(extended, acf_lags), reference_acf)
        partial = _abs_correlation(_pacf_values(extended, acf_lags), reference_pacf)
    except PreprocessingException:
        return WORST_DISCREPANCY
    if linear is None or partial is None:
        return WORST_DISCREPANCY
    return min(WORST_DISCREPANCY, max(0.0, (1.0 - linear) + (1.0 - partial)))


def aggregate(sweep: NeighborSweep, policy: AggregationPolicy) -> np.ndarray:
    """
    WINNER: prediction of the best-scored k (lowest k on ties). COMB: plain mean of all
    predictions. WCOMB: mean weighted by 1/criterion; when some criterion is exactly
    zero only those exact predictions are averaged.
    """
    mode = policy.mode if isinstance(policy, AggregationPolicy) else AggregationMode.parse(policy)
    if mode == AggregationMode.WINNER:
        return sweep.predictions[sweep.best_index].copy()
    if mode == AggregationMode.COMB:
        return sweep.predictions.mean(axis=0)
    exact = sweep.criterion == 0
    if exact.any():
        return sweep.predictions[exact].mean(axis=0)
    weights = 1.0 / sweep.criterion
    return (weights[:, None] * sweep.predictions).sum(axis=0) / weights.sum()


def lazy_predict(dataset: EmbeddedDataset, query, kmax: int, criterion_kind=CriterionKind.loo,
                 policy=AggregationMode.WINNER, train_series: TimeSeries = None) -> np.ndarray:
    criterion_kind = CriterionKind.parse(criterion_kind)
    if criterion_kind == CriterionKind.acflin:
        if train_series is None:
            raise LearnerException("The discrepancy criterion needs the training series")
        sweep = neighbor_sweep_acflin(train_series, dataset, query, kmax)
    else:
        sweep = neighbor_sweep_loo(dataset, query, kmax)
    return aggregate(sweep, policy if isinstance(policy, AggregationPolicy) else AggregationPolicy(mode=policy))


class LazyLearner(BasicLearner):
    """
    Query-time local constant models over k = 2..Kmax neighbors. Kmax is clipped to the
    dataset size; the discrepancy criterion falls back to leave-one-out on scalar outputs.
    """

    def __init__(self, kmax: int = 50, policy=AggregationMode.WINNER, acf_lags: int = None):
        self.kmax = int(kmax)
        self.policy = policy if isinstance(policy, AggregationPolicy) else AggregationPolicy(mode=policy)
        self.acf_lags = acf_lags
        self.__clip_reported = False

    def sweep(self, dataset: EmbeddedDataset, query, criterion=CriterionKind.loo,
              train_series: TimeSeries = None) -> NeighborSweep:
        criterion = CriterionKind.parse(criterion)
        kmax = min(self.kmax, len(dataset))
        if kmax < self.kmax and not self.__clip_reported:
            logger.warning("Kmax=%s clipped to the %s available neighbors", self.kmax, len(dataset))
            self.__clip_reported = True
        if criterion == CriterionKind.acflin and dataset.output_dimension >= 2:
            if train_series is None:
                raise LearnerException("The discrepancy criterion needs the training series")
            return neighbor_sweep_acflin(train_series, dataset, query, kmax, self.acf_lags)
        return neighbor_sweep_loo(dataset, query, kmax)

    def predict(self, dataset: EmbeddedDataset, query, criterion=CriterionKind.loo,
                train_series: TimeSeries = None) -> Prediction:
        sweep = self.sweep(dataset, query, criterion, train_series)
        value = aggregate(sweep, self.policy)
        return Prediction(value, dict(k_star=sweep.k_star, kmax=int(sweep.k_range[-1]),
                                      criterion=sweep.criterion_kind.value,
                                      criterion_min=float(sweep.criterion.min()),
                                      policy=self.policy.mode.value))

    def describe(self) -> dict:
        return {"learner": self.__class__.__name__, "kmax": self.kmax, "policy": self.policy.mode.value}
