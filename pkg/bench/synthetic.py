import os

import numpy as np
import pandas as pd
import yaml

from ForecastModel.base import CalendarAnchor, TimeSeries
from utils.logging import LazyForecastLogger

logger = LazyForecastLogger(__name__)

DEFAULT_START = '1996-03-18'
GAP_RATE = 0.025
AR_COEFFICIENT = 0.6
NOISE_SCALE = 0.08


def generate_series(count: int, length: int = 735, seed: int = 0, start_date: str = DEFAULT_START,
                    gap_rate: float = GAP_RATE) -> list:
    """
    Positive daily series shaped like cash withdrawals: a level times a day-of-week and a
    day-of-month pattern times exp(AR(1) noise), with about `gap_rate` of the days
    missing (half of them recorded as zeros). No two gaps are a week apart and none falls
    in the first week, so every gap has a donor one week earlier.
    """
    rng = np.random.default_rng(seed)
    anchor = CalendarAnchor(start_date=start_date)
    positions = np.arange(length)
    weekdays = anchor.days_of_week(positions)
    monthdays = anchor.days_of_month(positions)
    res = []
    for i in range(count):
        level = rng.uniform(10.0, 40.0)
        weekly = np.exp(rng.normal(0.0, 0.35, 7))
        monthly = np.exp(0.15 * np.sin(2 * np.pi * (np.arange(31) + rng.uniform(0, 31)) / 31.0))
        noise = np.zeros(length)
        shocks = rng.normal(0.0, NOISE_SCALE, length)
        for t in range(1, length):
            noise[t] = AR_COEFFICIENT * noise[t - 1] + shocks[t]
        values = level * weekly[weekdays] * monthly[monthdays - 1] * np.exp(noise)

        missing = np.zeros(length, dtype=bool)
        for m in np.flatnonzero(rng.random(length) < gap_rate):
            if m >= 7 and not missing[m - 7]:
                missing[m] = True
        zeros = missing & (rng.random(length) < 0.5)
        values[zeros] = 0.0
        res.append(TimeSeries(values=values, missing_mask=missing & ~zeros, calendar_start=anchor,
                              name="synthetic_%03d" % (i + 1)))
    logger.debug("Generated %s synthetic series of %s values (seed %s)", count, length, seed)
    return res


def save_series(series: list, data_dir: str):
    """
    One `<name>.csv` per series, gaps as blank cells. Dated series carry a `date` column;
    weekly anchors go to the calendar sidecar.
    """
    os.makedirs(data_dir, exist_ok=True)
    calendar = {}
    for s in series:
        frame = pd.DataFrame({'value': [repr(float(v)) if np.isfinite(v) else '' for v in s.values]})
        anchor = s.calendar_start
        if anchor is not None and anchor.has_day_of_month:
            dates = pd.Timestamp(anchor.start_date) + pd.to_timedelta(s.positions, unit='D')
            frame.insert(0, 'date', dates.strftime('%Y-%m-%d'))
        elif anchor is not None:
            calendar[s.name] = anchor.day_of_week
        frame.to_csv(os.path.join(data_dir, "%s.csv" % s.name), index=False)
    with open(os.path.join(data_dir, 'calendar.yaml'), 'w') as f:
        yaml.safe_dump(calendar, f, default_flow_style=False)
