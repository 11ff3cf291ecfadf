"""
Converts the NN5 spreadsheet (one column per series, one row per day, the dates in the
first column) into a bench data directory: one `<series>.csv` per series plus the
calendar sidecar.

    python scripts/nn5_to_csv.py NN5_FINAL_DATASET.xls data/nn5
"""
import argparse
import os
import sys

import numpy as np
import pandas as pd

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from ForecastModel.base import CalendarAnchor, TimeSeries  # noqa: E402
from bench.synthetic import save_series  # noqa: E402
from utils.logging import LazyForecastLogger  # noqa: E402

logger = LazyForecastLogger(__name__)


def _header_row(raw: pd.DataFrame) -> int:
    """The first row naming series (cells like NN5-001)"""
    for i in range(len(raw)):
        if raw.iloc[i].astype(str).str.upper().str.startswith('NN5').sum() > 1:
            return i
    raise ValueError("No row of the spreadsheet names NN5 series")


def read_nn5(path: str, sheet=0) -> list:
    raw = pd.read_excel(path, sheet_name=sheet, header=None)
    header = _header_row(raw)
    frame = raw.iloc[header + 1:].reset_index(drop=True)
    frame.columns = [str(c).strip() for c in raw.iloc[header]]
    dates = pd.to_datetime(frame.iloc[:, 0], errors='coerce')
    frame = frame[dates.notna()].reset_index(drop=True)
    dates = dates[dates.notna()].reset_index(drop=True)
    if len(frame) == 0:
        raise ValueError("No dated rows in %s" % path)
    anchor = CalendarAnchor(start_date=dates.iloc[0].date())

    res = []
    for column in frame.columns[1:]:
        if not column.upper().startswith('NN5'):
            continue
        values = pd.to_numeric(frame[column], errors='coerce').to_numpy(dtype=float)
        res.append(TimeSeries(values=values, missing_mask=np.isnan(values), calendar_start=anchor,
                              name=column.replace(' ', '_')))
    logger.info("Read %s series of %s days starting %s", len(res), len(frame), anchor.start_date)
    return res


def main(argv=None):
    parser = argparse.ArgumentParser(description='NN5 spreadsheet to bench CSV directory')
    parser.add_argument('spreadsheet', help='Path of the NN5 .xls/.xlsx file')
    parser.add_argument('out_dir', help='Data directory to create')
    parser.add_argument('--sheet', default=0, help='Sheet name or index')
    args = parser.parse_args(argv)
    sheet = int(args.sheet) if str(args.sheet).isdigit() else args.sheet
    save_series(read_nn5(args.spreadsheet, sheet), args.out_dir)
    logger.info("Wrote %s", args.out_dir)


if __name__ == '__main__':
    main()
