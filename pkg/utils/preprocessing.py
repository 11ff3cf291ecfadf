import numpy as np
import pandas as pd
from statsmodels.tsa.stattools import acovf, levinson_durbin

from ForecastModel.base import BaseModel, CalendarAnchor, LagSet, TimeSeries, MAX_LAG, embed_multi_output
from utils.enums import LagOrigin
from utils.logging import LazyForecastLogger

logger = LazyForecastLogger(__name__)

GAP_DONOR_OFFSETS = (365, -365, 7, -7)
MONTH_SHRINKAGE = 5.0
SPARSE_DAYS_OF_MONTH = (29, 30, 31)
FALLBACK_LAGS = tuple(range(1, 8))


class PreprocessingException(Exception):
    pass


class UnrepairableGapException(PreprocessingException):
    pass


class DegenerateSeriesException(PreprocessingException):
    pass


class CalendarMissingException(PreprocessingException):
    pass


class ZeroVarianceException(PreprocessingException):
    pass


class TooFewPointsException(PreprocessingException):
    pass


def repair_gaps(series: TimeSeries, zero_is_gap: bool = True) -> TimeSeries:
    """
    Replaces every gap (a missing record or, for withdrawal data, a recorded zero) by the
    median of the available values among y[m+365], y[m-365], y[m+7] and y[m-7].
    Donors are read from the original series, so the result does not depend on the
    order in which the gaps are visited.
    """
    values = series.values
    gaps = series.missing_mask.copy()
    if zero_is_gap:
        gaps |= (values == 0)
    if not gaps.any():
        return series

    n = len(series)
    repaired = values.copy()
    for m in np.flatnonzero(gaps):
        donors = [values[m + offset] for offset in GAP_DONOR_OFFSETS if 0 <= m + offset < n and not gaps[m + offset]]
        if len(donors) == 0:
            raise UnrepairableGapException("The gap at position %s of %s has no valid donor" % (m, series.name))
        repaired[m] = np.median(donors)
    logger.debug("Repaired %s gaps of %s", int(gaps.sum()), series.name)
    return series.replace(repaired, np.zeros(n, dtype=bool))


class SeasonalModel(BaseModel):
    """
    Multiplicative day-of-week and day-of-month indices, both with mean 1.
    `anchor` is the calendar anchor the indices were fitted against.
    """
    weekly_index = None
    monthly_index = None
    fitted_on = None
    anchor = None

    def validate(self):
        self.weekly_index = np.asarray(self.weekly_index if self.weekly_index is not None else np.ones(7), dtype=float)
        self.monthly_index = np.asarray(
            self.monthly_index if self.monthly_index is not None else np.ones(31), dtype=float)
        if self.weekly_index.shape != (7,) or self.monthly_index.shape != (31,):
            raise SeasonalModel.ModelValidationException("A seasonal model needs 7 weekly and 31 monthly factors")
        for factors in (self.weekly_index, self.monthly_index):
            if not (np.isfinite(factors).all() and (factors > 0).all()):
                raise SeasonalModel.ModelValidationException("Seasonal factors should be positive and finite")
            if abs(factors.mean() - 1.0) > 1e-9:
                raise SeasonalModel.ModelValidationException("Seasonal factors should have mean 1")

    def factors(self, series: TimeSeries) -> np.ndarray:
        anchor = series.calendar_start if series.calendar_start is not None else self.anchor
        if anchor is None:
            raise CalendarMissingException("The calendar positions of %s can not be resolved" % series.name)
        positions = series.positions
        res = self.weekly_index[anchor.days_of_week(positions)]
        if anchor.has_day_of_month:
            res = res * self.monthly_index[anchor.days_of_month(positions) - 1]
        return res

    def __str__(self):
        return "weekly %s, monthly range [%.3f, %.3f]" % (
            np.round(self.weekly_index, 3).tolist(), self.monthly_index.min(), self.monthly_index.max())


def _renormalize(factors):
    return factors / factors.mean()


def infer_weekly_anchor(series: TimeSeries) -> CalendarAnchor:
    """Without a calendar, the position holding the strongest weekday mean becomes day 0"""
    values = series.values
    phases = series.positions % 7
    means = [np.nanmean(values[phases == p]) if (phases == p).any() else -np.inf for p in range(7)]
    strongest = int(np.argmax(means))
    logger.warning("No calendar anchor for %s: weekly phase inferred, day-of-month seasonality disabled",
                   series.name)
    return CalendarAnchor(day_of_week=(-strongest) % 7)


def fit_seasonal(series: TimeSeries, fit_range: tuple = None) -> SeasonalModel:
    """
    Day-of-week factors: weekday mean over overall mean. Day-of-month factors: the same
    ratio on the weekly-deseasonalized values, days 29..31 shrunk toward 1 with weight
    n/(n+5). Both sets renormalized to mean 1.
    """
    start, stop = fit_range if fit_range is not None else (0, len(series))
    if stop - start < 14:
        raise TooFewPointsException("Fitting seasonal indices needs at least two full weeks")
    if series.has_gaps:
        raise DegenerateSeriesException("Repair the gaps of %s before fitting seasonal indices" % series.name)
    anchor = series.calendar_start
    if anchor is None:
        anchor = infer_weekly_anchor(series)
    window = series.window(start, stop)
    values = window.values
    overall = values.mean()
    if overall <= 0:
        raise DegenerateSeriesException("The training mean of %s is not positive (%s)" % (series.name, overall))

    weekdays = anchor.days_of_week(window.positions)
    weekly = pd.Series(values).groupby(weekdays).mean().reindex(range(7))
    weekly = (weekly / overall).fillna(1.0).to_numpy()
    if (weekly <= 0).any():
        raise DegenerateSeriesException("A day-of-week mean of %s is not positive" % series.name)
    weekly = _renormalize(weekly)

    monthly = np.ones(31)
    if anchor.has_day_of_month:
        adjusted = values / weekly[weekdays]
        days = anchor.days_of_month(window.positions)
        grouped = pd.Series(adjusted).groupby(days).agg(['mean', 'count']).reindex(range(1, 32))
        counts = grouped['count'].fillna(0).to_numpy()
        raw = (grouped['mean'] / adjusted.mean()).fillna(1.0).to_numpy()
        for day in SPARSE_DAYS_OF_MONTH:
            n = counts[day - 1]
            raw[day - 1] = 1.0 + (raw[day - 1] - 1.0) * n / (n + MONTH_SHRINKAGE)
        if (raw <= 0).any():
            raise DegenerateSeriesException("A day-of-month mean of %s is not positive" % series.name)
        monthly = _renormalize(raw)

    return SeasonalModel(weekly_index=weekly, monthly_index=monthly, fitted_on=(start, stop), anchor=anchor)


def deseasonalize(series: TimeSeries, model: SeasonalModel) -> TimeSeries:
    return series.replace(series.values / model.factors(series), series.missing_mask)


def reseasonalize(series: TimeSeries, model: SeasonalModel) -> TimeSeries:
    return series.replace(series.values * model.factors(series), series.missing_mask)


def _check_variance(series: TimeSeries) -> np.ndarray:
    if series.has_gaps:
        raise ZeroVarianceException("Autocorrelations need a gap-free series (%s)" % series.name)
    values = np.asarray(series.values, dtype=float)
    if values.size < 2 or np.var(values) <= 0:
        raise ZeroVarianceException("The series %s has zero variance" % series.name)
    return values


def acf(values, max_lag: int) -> np.ndarray:
    """Sample autocorrelations at lags 1..max_lag"""
    values = np.asarray(values.values if isinstance(values, TimeSeries) else values, dtype=float)
    acov = acovf(values, adjusted=False, demean=True, fft=False, nlag=max_lag)
    if acov[0] <= 0:
        raise ZeroVarianceException("The series has zero variance")
    return acov[1:max_lag + 1] / acov[0]


def _pacf_values(values: np.ndarray, max_lag: int) -> np.ndarray:
    acov = acovf(values, adjusted=False, demean=True, fft=False, nlag=max_lag)
    if acov[0] <= 0:
        raise ZeroVarianceException("The series has zero variance")
    _, _, partial, _, _ = levinson_durbin(acov, nlags=max_lag, isacov=True)
    return np.asarray(partial[1:max_lag + 1], dtype=float)


def pacf(series: TimeSeries, max_lag: int) -> np.ndarray:
    """Partial autocorrelations at lags 1..max_lag (Durbin-Levinson on the sample autocovariances)"""
    if max_lag < 1:
        raise TooFewPointsException("max_lag should be positive")
    if len(series) <= max_lag + 1:
        raise TooFewPointsException("%s values are too few for %s partial autocorrelations" % (len(series), max_lag))
    return _pacf_values(_check_variance(series), max_lag)


def lag_universe(series_length: int, max_lag: int = MAX_LAG) -> int:
    """Largest lag searched on a series of the given length"""
    return int(max(1, min(max_lag, MAX_LAG, series_length // 3)))


def select_embedding(series: TimeSeries, max_lag: int = MAX_LAG) -> LagSet:
    """Lags whose partial autocorrelation exceeds 1.96/sqrt(N); {1..7} when none does"""
    max_lag = min(max_lag, lag_universe(len(series), max_lag))
    partial = pacf(series, max_lag)
    threshold = 1.96 / np.sqrt(len(series))
    lags = (np.flatnonzero(np.abs(partial) > threshold) + 1).tolist()
    if len(lags) == 0:
        logger.debug("No significant partial autocorrelation for %s, falling back to one week", series.name)
        lags = list(FALLBACK_LAGS)
    return LagSet(lags=lags, origin=LagOrigin.pacf)


def _nearest_neighbor_residuals(distances: np.ndarray, outputs: np.ndarray) -> float:
    m = outputs.shape[0]
    distances = distances.copy()
    np.fill_diagonal(distances, np.inf)
    nearest = np.argmin(distances, axis=1)
    residuals = outputs[nearest] - outputs
    return float((residuals ** 2).sum() / (2.0 * m * outputs.shape[1]))


def _squared_distances(inputs: np.ndarray) -> np.ndarray:
    diff = inputs[:, None, :] - inputs[None, :, :]
    return (diff ** 2).sum(axis=2)


def delta_test(inputs, outputs) -> float:
    """
    (1/2M) sum_i |y_nn(i) - y_i|^2 / l with nn(i) the Euclidean nearest neighbor of
    input i among the others (ties go to the lowest index).
    """
    inputs = np.asarray(inputs, dtype=float)
    outputs = np.asarray(outputs, dtype=float)
    if inputs.ndim == 1:
        inputs = inputs.reshape(-1, 1)
    if outputs.ndim == 1:
        outputs = outputs.reshape(-1, 1)
    if inputs.shape[0] < 2:
        raise TooFewPointsException("The delta test needs at least two points")
    if inputs.shape[0] != outputs.shape[0]:
        raise TooFewPointsException("Inputs and outputs have a different number of points")
    return _nearest_neighbor_residuals(_squared_distances(inputs), outputs)


class TargetSpec(BaseModel):
    """Which future steps a selection targets: `block` steps starting `first` steps ahead"""
    first = 1
    block = 1

    def validate(self):
        if int(self.first) < 1 or int(self.block) < 1:
            raise TargetSpec.ModelValidationException("first and block should be positive")
        self.first, self.block = int(self.first), int(self.block)


class SelectionTrace(BaseModel):
    """
    `visited` lists every evaluated (lag set, delta) pair in evaluation order,
    `accepted` the incumbent after each accepted move (starting with the start set).
    """
    visited = None
    accepted = None
    final = None

    def validate(self):
        self.visited = list(self.visited or [])
        self.accepted = list(self.accepted or [])

    @property
    def final_delta(self) -> float:
        return self.accepted[-1][1]

    def __str__(self):
        return "%s after %s moves (delta %.6g)" % (self.final, len(self.accepted) - 1, self.final_delta)


def forward_backward_select(series: TimeSeries, start: LagSet, target: TargetSpec = None, max_iter: int = 50,
                            max_lag: int = MAX_LAG) -> SelectionTrace:
    """
    Hill climbing over lag sets with the delta test: each iteration scores every single-lag
    addition and every single-lag removal and takes the best move if it strictly lowers
    the incumbent delta. Candidates are all scored on the rows of the largest searchable
    lag so their delta values are comparable.
    """
    target = target if target is not None else TargetSpec()
    if len(start) == 0:
        raise TooFewPointsException("The search needs a non-empty start set")
    universe = max(lag_universe(len(series) - target.first - target.block + 1, max_lag), start.max_lag)
    full = embed_multi_output(series, range(1, universe + 1), target.first, target.block)
    if len(full) < 2:
        raise TooFewPointsException("%s has too few rows for the delta test" % series.name)
    columns = full.inputs  # column L-1 holds lag L
    outputs = full.outputs

    cached = {}

    def column_distances(lag):
        if lag not in cached:
            column = columns[:, lag - 1]
            cached[lag] = (column[:, None] - column[None, :]) ** 2
        return cached[lag]

    def set_distances(lags):
        # summed in ascending lag order so a lag set always gets the same value
        total = np.zeros((len(full), len(full)))
        for lag in sorted(lags):
            total = total + column_distances(lag)
        return total

    current = set(start.lags)
    incumbent = _nearest_neighbor_residuals(set_distances(current), outputs)
    trace = SelectionTrace(visited=[(LagSet(lags=current, origin=LagOrigin.pacf_plus_fbs), incumbent)])
    trace.accepted.append(trace.visited[0])

    for iteration in range(max_iter):
        moves = []
        for lag in range(1, universe + 1):
            if lag in current:
                if len(current) == 1:
                    continue
                candidate = current - {lag}
            else:
                candidate = current | {lag}
            value = _nearest_neighbor_residuals(set_distances(candidate), outputs)
            if lag not in current:
                cached.pop(lag, None)
            trace.visited.append((LagSet(lags=candidate, origin=LagOrigin.pacf_plus_fbs), value))
            moves.append((value, lag, candidate))
        if len(moves) == 0:
            break
        value, lag, candidate = min(moves, key=lambda move: (move[0], move[1]))
        if not value < incumbent:
            break
        logger.debug("FBS iteration %s: %s lag %s, delta %.6g", iteration, "removed" if lag in current else "added",
                     lag, value)
        current, incumbent = candidate, value
        trace.accepted.append((LagSet(lags=current, origin=LagOrigin.pacf_plus_fbs), incumbent))

    trace.final = trace.accepted[-1][0]
    return trace
