import datetime
import os
import re

import numpy as np
import pandas as pd
import yaml

from ForecastModel.base import BaseModel, CalendarAnchor, TimeSeries
from bench import BenchException, EmptyDirectoryException, MalformedFileException
from utils.logging import LazyForecastLogger

logger = LazyForecastLogger(__name__)

CALENDAR_SIDECAR = 'calendar.yaml'
DATE_COLUMN = 'date'
FIRST_DATA_LINE = 2


def anchor_from_value(value) -> CalendarAnchor:
    """An integer is a day of week (0 = Monday), anything else a date"""
    if isinstance(value, bool):
        raise CalendarAnchor.ModelValidationException("%s is not a calendar anchor" % value)
    if isinstance(value, int):
        return CalendarAnchor(day_of_week=value)
    if isinstance(value, (datetime.date, datetime.datetime)):
        return CalendarAnchor(start_date=value)
    try:
        return CalendarAnchor(start_date=str(value).strip())
    except ValueError as ex:
        raise CalendarAnchor.ModelValidationException("%s is not a date: %s" % (value, ex))


def read_calendar(data_dir: str) -> dict:
    """Series name -> CalendarAnchor from the optional sidecar file"""
    path = os.path.join(data_dir, CALENDAR_SIDECAR)
    if not os.path.isfile(path):
        return {}
    with open(path) as f:
        content = yaml.safe_load(f) or {}
    if not isinstance(content, dict):
        raise MalformedFileException(path, 1, "the calendar should map series names to dates or days of week")
    res = {}
    for name, value in content.items():
        try:
            res[str(name)] = anchor_from_value(value)
        except BaseModel.ModelValidationException as ex:
            raise MalformedFileException(path, None, "series %s: %s" % (name, ex))
    return res


def _read_frame(path: str) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False)
    except pd.errors.EmptyDataError:
        raise MalformedFileException(path, 1, "the file is empty")
    except pd.errors.ParserError as ex:
        line = re.search(r'line (\d+)', str(ex))
        raise MalformedFileException(path, int(line.group(1)) if line else None, str(ex).strip())
    except UnicodeDecodeError as ex:
        raise MalformedFileException(path, None, "not a text file (%s)" % ex)
    frame = frame.fillna('')
    filled = (frame.apply(lambda column: column.str.strip()) != '').any(axis=1).to_numpy()
    last = len(filled) - int(np.argmax(filled[::-1])) if filled.any() else 0
    return frame.iloc[:last]


def _parse_values(path: str, column: pd.Series) -> tuple:
    text = column.astype(str).str.strip()
    values = pd.to_numeric(text, errors='coerce').to_numpy(dtype=float)
    invalid = np.isnan(values) & (text != '').to_numpy()
    if invalid.any():
        lines = (np.flatnonzero(invalid) + FIRST_DATA_LINE).tolist()
        logger.warning("%s: non-numeric cells in column %s at lines %s marked missing", path, column.name,
                       lines[:10] + (['...'] if len(lines) > 10 else []))
    return values, np.isnan(values)


def read_series_file(path: str, calendar: dict = None, default_anchor: CalendarAnchor = None) -> list:
    """
    One series per value column: a single-column file is named after the file, a wide file
    after its columns. A `date` column anchors every series of the file in the calendar.
    """
    calendar = calendar or {}
    frame = _read_frame(path)
    if len(frame) == 0:
        raise MalformedFileException(path, FIRST_DATA_LINE, "no data rows")
    columns = {str(c).strip(): c for c in frame.columns}
    date_column = next((c for name, c in columns.items() if name.lower() == DATE_COLUMN), None)
    value_columns = [c for c in frame.columns if c != date_column]
    if len(value_columns) == 0:
        raise MalformedFileException(path, 1, "no value column")

    file_anchor = None
    if date_column is not None:
        dates = frame[date_column].str.strip()
        first = int(np.argmax((dates != '').to_numpy())) if (dates != '').any() else None
        if first is None:
            raise MalformedFileException(path, FIRST_DATA_LINE, "the date column is empty")
        try:
            start = pd.Timestamp(dates.iloc[first]) - pd.Timedelta(days=first)
            file_anchor = CalendarAnchor(start_date=start.date())
        except (ValueError, BaseModel.ModelValidationException) as ex:
            raise MalformedFileException(path, first + FIRST_DATA_LINE, "invalid date (%s)" % ex)

    stem = os.path.splitext(os.path.basename(path))[0]
    res = []
    for column in value_columns:
        name = stem if len(value_columns) == 1 else str(column).strip()
        values, missing = _parse_values(path, frame[column])
        anchor = file_anchor or calendar.get(name) or default_anchor
        res.append(TimeSeries(values=values, missing_mask=missing, calendar_start=anchor, name=name))
    return res


def ingest(data_dir: str, default_anchor: CalendarAnchor = None, failures: list = None) -> list:
    """
    Reads every CSV of the directory (sorted by file name). When `failures` is given, a
    malformed file is logged and recorded there and the other files are still read;
    otherwise the first malformed file raises.
    """
    if not os.path.isdir(data_dir):
        raise BenchException("%s is not a directory" % data_dir)
    files = sorted(f for f in os.listdir(data_dir) if f.lower().endswith('.csv'))
    if len(files) == 0:
        raise EmptyDirectoryException("%s holds no CSV file" % data_dir)
    calendar = read_calendar(data_dir)

    series, names = [], set()
    for file in files:
        path = os.path.join(data_dir, file)
        try:
            file_series = read_series_file(path, calendar, default_anchor)
            duplicates = [s.name for s in file_series if s.name in names]
            if duplicates:
                raise MalformedFileException(path, 1, "series %s already read from another file" % duplicates)
        except MalformedFileException as ex:
            if failures is None:
                raise
            logger.error("Skipping %s", ex)
            failures.append(dict(series=os.path.splitext(file)[0], strategy='*', config='*', error=str(ex)))
            continue
        names.update(s.name for s in file_series)
        series.extend(file_series)
    if len(series) == 0:
        raise EmptyDirectoryException("No readable series in %s" % data_dir)
    without_anchor = [s.name for s in series if s.calendar_start is None]
    if without_anchor:
        logger.warning("%s series have no calendar anchor: %s", len(without_anchor), without_anchor[:5])
    logger.info("Read %s series from %s", len(series), data_dir)
    return series
