import datetime
from abc import ABC
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from utils.enums import LagOrigin

MAX_LAG = 200


class BaseModel(ABC):
    class ModelValidationException(Exception):
        pass

    def __init__(self, data=None, **kwargs):
        self.__dict__.update(data if data is not None else {})
        self.__dict__.update(kwargs)
        self.validate()

    def __repr__(self):
        return self.__str__()

    def validate(self):
        """This method validates the model"""
        pass


class SeriesTooShortException(BaseModel.ModelValidationException):
    pass


class GapInWindowException(BaseModel.ModelValidationException):
    pass


def _frozen(values, dtype=float):
    res = np.array(values, dtype=dtype)
    res.setflags(write=False)
    return res


class CalendarAnchor(BaseModel):
    """
    Calendar position of the observation at position 0.
    A full anchor knows the date (day of week and day of month); a weekly anchor only
    knows the day of week, in which case day-of-month seasonality is unavailable.
    """
    day_of_week = None
    start_date = None

    def validate(self):
        if self.start_date is not None:
            if isinstance(self.start_date, str):
                from dateutil import parser
                self.start_date = parser.isoparse(self.start_date).date()
            if isinstance(self.start_date, datetime.datetime):
                self.start_date = self.start_date.date()
            self.day_of_week = self.start_date.weekday()
        if self.day_of_week is None or not 0 <= int(self.day_of_week) <= 6:
            raise CalendarAnchor.ModelValidationException("A calendar anchor needs a day of week in 0..6")
        self.day_of_week = int(self.day_of_week)

    @property
    def has_day_of_month(self) -> bool:
        return self.start_date is not None

    @property
    def day_of_month(self) -> Optional[int]:
        return self.start_date.day if self.start_date is not None else None

    def days_of_week(self, positions) -> np.ndarray:
        return (np.asarray(positions, dtype=int) + self.day_of_week) % 7

    def days_of_month(self, positions) -> np.ndarray:
        if self.start_date is None:
            raise CalendarAnchor.ModelValidationException("The anchor does not carry a date")
        dates = pd.Timestamp(self.start_date) + pd.to_timedelta(np.asarray(positions, dtype=int), unit="D")
        return np.asarray(dates.day, dtype=int)

    def __str__(self):
        if self.start_date is not None:
            return "anchor %s" % self.start_date.isoformat()
        return "anchor day-of-week %s" % self.day_of_week


class TimeSeries(BaseModel):
    """
    Ordered real observations. `missing_mask` flags gaps, `calendar_start` anchors
    position 0 in the calendar and `start_index` is the calendar position of the first
    value (a window cut from a longer series keeps its absolute positions).
    """
    values = None
    missing_mask = None
    calendar_start = None
    start_index = 0
    name = ''

    def validate(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size < 1:
            raise TimeSeries.ModelValidationException("A time series needs at least one observation")
        if self.missing_mask is None:
            mask = ~np.isfinite(values)
        else:
            mask = np.array(self.missing_mask, dtype=bool).reshape(-1)
            if mask.size != values.size:
                raise TimeSeries.ModelValidationException("missing_mask length differs from the values length")
            mask = mask | ~np.isfinite(values)
        values = np.where(mask, np.nan, values)
        self.values = _frozen(values)
        self.missing_mask = _frozen(mask, dtype=bool)
        self.start_index = int(self.start_index)

    def __len__(self):
        return self.values.size

    def __str__(self):
        return "series %s: %s values, %s gaps, %s" % (
            self.name, len(self), int(self.missing_mask.sum()), self.calendar_start)

    @property
    def has_gaps(self) -> bool:
        return bool(self.missing_mask.any())

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.start_index, self.start_index + len(self))

    def replace(self, values, missing_mask=None, **kwargs) -> 'TimeSeries':
        params = dict(values=values, missing_mask=missing_mask, calendar_start=self.calendar_start,
                      start_index=self.start_index, name=self.name)
        params.update(kwargs)
        return TimeSeries(**params)

    def window(self, start: int = 0, stop: int = None) -> 'TimeSeries':
        """The observations in [start, stop) (offsets relative to this series)"""
        stop = len(self) if stop is None else stop
        if not 0 <= start < stop <= len(self):
            raise TimeSeries.ModelValidationException("Invalid window [%s, %s) on %s values" % (start, stop, len(self)))
        return self.replace(self.values[start:stop], self.missing_mask[start:stop],
                            start_index=self.start_index + start)

    def extend(self, values) -> 'TimeSeries':
        """Appends values (e.g. forecasts) after the last observation"""
        values = np.asarray(values, dtype=float).reshape(-1)
        return self.replace(np.concatenate([self.values, values]),
                            np.concatenate([self.missing_mask, np.zeros(values.size, dtype=bool)]))

    def following(self, values) -> 'TimeSeries':
        """A series holding `values` at the positions right after this series"""
        return TimeSeries(values=values, calendar_start=self.calendar_start,
                          start_index=self.start_index + len(self), name=self.name)


class LagSet(BaseModel):
    """Selected input lags; lag 1 is the most recent observation"""
    lags = ()
    origin = 'pacf'

    def validate(self):
        lags = sorted(set(int(i) for i in self.lags))
        if len(lags) == 0:
            raise LagSet.ModelValidationException("A lag set can not be empty")
        if lags[0] < 1 or lags[-1] > MAX_LAG:
            raise LagSet.ModelValidationException("Lags should lie in 1..%s (got %s)" % (MAX_LAG, lags))
        self.lags = tuple(lags)
        self.origin = LagOrigin.parse(self.origin)

    @classmethod
    def contiguous(cls, d: int, origin='pacf'):
        return cls(lags=range(1, d + 1), origin=origin)

    @property
    def max_lag(self) -> int:
        return self.lags[-1]

    def __len__(self):
        return len(self.lags)

    def __iter__(self):
        return iter(self.lags)

    def __eq__(self, other):
        return isinstance(other, LagSet) and self.lags == other.lags

    def __hash__(self):
        return hash(self.lags)

    def __str__(self):
        return "lags %s (%s)" % (list(self.lags), self.origin.value)


class EmbeddedDataset(BaseModel):
    """
    Input/output pairs. `inputs` is M x d, `outputs` is M x l with column 0 the nearest
    step (`horizon_offset` steps ahead) and `anchors` the series offset t of each row.
    """
    inputs = None
    outputs = None
    horizon_offset = 1
    anchors = None
    lags = None

    def validate(self):
        inputs = np.asarray(self.inputs, dtype=float)
        if inputs.ndim == 1:
            inputs = inputs.reshape(-1, 1)
        outputs = np.asarray(self.outputs, dtype=float)
        if outputs.ndim == 1:
            outputs = outputs.reshape(-1, 1)
        if inputs.shape[0] < 1 or inputs.shape[0] != outputs.shape[0]:
            raise EmbeddedDataset.ModelValidationException(
                "Inputs and outputs need the same positive number of rows (%s, %s)" % (inputs.shape, outputs.shape))
        if outputs.shape[1] < 1:
            raise EmbeddedDataset.ModelValidationException("Outputs need at least one component")
        if not (np.isfinite(inputs).all() and np.isfinite(outputs).all()):
            raise EmbeddedDataset.ModelValidationException("An embedded dataset can not hold gap values")
        self.inputs = _frozen(inputs)
        self.outputs = _frozen(outputs)
        self.horizon_offset = int(self.horizon_offset)
        if self.anchors is not None:
            self.anchors = _frozen(self.anchors, dtype=int)

    def __len__(self):
        return self.inputs.shape[0]

    @property
    def input_dimension(self) -> int:
        return self.inputs.shape[1]

    @property
    def output_dimension(self) -> int:
        return self.outputs.shape[1]

    def __str__(self):
        return "dataset M=%s d=%s l=%s h=%s" % (len(self), self.input_dimension, self.output_dimension,
                                                self.horizon_offset)


LagsLike = Union[LagSet, Sequence[int], np.ndarray]


def as_lag_array(lags: LagsLike) -> np.ndarray:
    res = np.asarray(list(lags.lags) if isinstance(lags, LagSet) else list(lags), dtype=int)
    if res.size == 0 or res.min() < 1:
        raise LagSet.ModelValidationException("Lags should be positive and non-empty")
    return res


def embed_multi_output(series: TimeSeries, lags: LagsLike, first: int, block: int) -> EmbeddedDataset:
    """
    Pairs (y_{t-L+1} for L in lags) -> (y_{t+first}, ..., y_{t+first+block-1}).
    Rows whose window touches a gap are skipped.
    """
    if first < 1 or block < 1:
        raise BaseModel.ModelValidationException("first and block should be positive (%s, %s)" % (first, block))
    lag_array = as_lag_array(lags)
    n = len(series)
    anchors = np.arange(lag_array.max() - 1, n - first - block + 1)
    if anchors.size == 0:
        raise SeriesTooShortException("%s values can not embed lags up to %s with %s steps ahead" % (
            n, lag_array.max(), first + block - 1))
    input_index = anchors[:, None] - (lag_array - 1)[None, :]
    output_index = anchors[:, None] + np.arange(first, first + block)[None, :]
    gaps = series.missing_mask
    usable = ~(gaps[input_index].any(axis=1) | gaps[output_index].any(axis=1))
    if not usable.any():
        raise SeriesTooShortException("Every window of the series overlaps a gap")
    anchors, input_index, output_index = anchors[usable], input_index[usable], output_index[usable]
    return EmbeddedDataset(inputs=series.values[input_index], outputs=series.values[output_index],
                           horizon_offset=first, anchors=anchors, lags=tuple(int(i) for i in lag_array))


def embed_single_output(series: TimeSeries, lags: LagsLike, h: int) -> EmbeddedDataset:
    return embed_multi_output(series, lags, first=h, block=1)


def query_vector(series: TimeSeries, lags: LagsLike) -> np.ndarray:
    """The input vector anchored at the last observation of the series"""
    lag_array = as_lag_array(lags)
    if lag_array.max() > len(series):
        raise SeriesTooShortException("The series is shorter than the largest lag %s" % lag_array.max())
    index = len(series) - lag_array
    if series.missing_mask[index].any():
        raise GapInWindowException("The query window overlaps a gap")
    return series.values[index].copy()

