import json
import os

import numpy as np
import pandas as pd

from bench import UnwritablePathException
from evaluation.models import CompetitionForecasts, EmptyInputException, EvaluationReport
from evaluation.stats_tests import rank_rows
from utils.logging import LazyForecastLogger

logger = LazyForecastLogger(__name__)

SMAPE_FILE = 'smape.csv'
SUMMARY_FILE = 'summary.csv'
POSTHOC_FILE = 'posthoc.csv'
RUN_FILE = 'run.json'
FORECAST_DIR = 'forecasts'


def _ensure_dir(path: str):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as ex:
        raise UnwritablePathException("Can not create %s: %s" % (path, ex))
    if not os.access(path, os.W_OK):
        raise UnwritablePathException("%s is not writable" % path)


def _write_csv(frame: pd.DataFrame, path: str) -> str:
    try:
        frame.to_csv(path, index=False)
    except OSError as ex:
        raise UnwritablePathException("Can not write %s: %s" % (path, ex))
    return path


def summary_frame(report: EvaluationReport, comparisons: dict = None) -> pd.DataFrame:
    """SMAPE*, within-configuration mean rank and post-hoc group of every (strategy, config)"""
    comparisons = comparisons or {}
    summary = report.smape_star()
    summary['mean_rank'] = np.nan
    summary['group'] = pd.array([pd.NA] * len(summary), dtype='Int64')
    for config in report.configurations:
        try:
            scores = report.score_matrix(config)
        except EmptyInputException:
            continue
        if scores.shape[0] == 0:
            continue
        rm = rank_rows(scores)
        groups = comparisons[config].posthoc.groups if config in comparisons else [pd.NA] * rm.k
        for strategy, mean_rank, group in zip(rm.strategies, rm.mean_ranks, groups):
            selected = (summary['config'] == config) & (summary['strategy'] == strategy)
            summary.loc[selected, 'mean_rank'] = mean_rank
            summary.loc[selected, 'group'] = group
    return summary[['strategy', 'config', 'smape_star', 'mean_rank', 'group']].sort_values(
        ['config', 'strategy'], kind='mergesort').reset_index(drop=True)


def posthoc_frame(comparisons: dict) -> pd.DataFrame:
    frames = []
    for config in sorted(comparisons):
        frame = comparisons[config].posthoc.frame()
        frame.insert(0, 'config', config)
        frames.append(frame)
    if len(frames) == 0:
        return pd.DataFrame(columns=['config', 'pair', 'z', 'p_raw', 'rejected'])
    return pd.concat(frames, ignore_index=True)


def tests_summary(comparisons: dict) -> dict:
    res = {}
    for config in sorted(comparisons):
        comparison = comparisons[config]
        res[config] = dict(N=comparison.rank_matrix.N, k=comparison.rank_matrix.k,
                           friedman=comparison.friedman._asdict(),
                           iman_davenport=comparison.iman_davenport._asdict(),
                           posthoc_executed=comparison.posthoc.executed,
                           rejections=comparison.posthoc.rejections)
    return res


def write_run_info(out_dir: str, run_info: dict) -> str:
    _ensure_dir(out_dir)
    path = os.path.join(out_dir, RUN_FILE)
    try:
        with open(path, 'w') as f:
            json.dump(run_info, f, indent=2, sort_keys=True, default=str)
    except OSError as ex:
        raise UnwritablePathException("Can not write %s: %s" % (path, ex))
    return path


def emit_report(report: EvaluationReport, comparisons: dict, out_dir: str, run_info: dict = None) -> list:
    """Writes smape.csv, summary.csv, posthoc.csv and run.json under out_dir"""
    _ensure_dir(out_dir)
    paths = [
        _write_csv(report.frame(), os.path.join(out_dir, SMAPE_FILE)),
        _write_csv(summary_frame(report, comparisons), os.path.join(out_dir, SUMMARY_FILE)),
        _write_csv(posthoc_frame(comparisons), os.path.join(out_dir, POSTHOC_FILE)),
    ]
    run_info = dict(run_info or {})
    run_info.update(failures=report.failures, tuning=report.tuning, tests=tests_summary(comparisons),
                    rows=len(report))
    paths.append(write_run_info(out_dir, run_info))
    logger.info("Report written to %s", out_dir)
    return paths


def write_forecasts(forecasts: CompetitionForecasts, out_dir: str, run_info: dict = None) -> list:
    """One `forecasts/<series>.csv` per series: a step column then one column per strategy"""
    directory = os.path.join(out_dir, FORECAST_DIR)
    _ensure_dir(directory)
    paths = [_write_csv(forecasts.frame(series), os.path.join(directory, "%s.csv" % series))
             for series in sorted(forecasts.forecasts)]
    run_info = dict(run_info or {})
    run_info.update(failures=forecasts.failures, tuning=forecasts.tuning, series=len(forecasts.forecasts))
    paths.append(write_run_info(out_dir, run_info))
    logger.info("%s forecast files written to %s", len(forecasts.forecasts), directory)
    return paths
