import logging
import os
import sys

PREFIX = 'LazyForecast'
QUIET_LOGGERS = ('matplotlib', 'numexpr')

logging.basicConfig(stream=sys.stdout, level=os.getenv('LOG_LEVEL', 'INFO').upper(), force=True,
                    format='%(levelname)s:%(name)s: %(message)s')


class LazyForecastLogger():

    def __new__(cls, name):
        logger = logging.getLogger(f'{PREFIX}:{name}')
        return logger


def set_verbosity(verbose: bool = False):
    """DEBUG for the bench loggers when verbose; third-party loggers stay at WARNING"""
    logging.getLogger().setLevel(logging.DEBUG if verbose else logging.INFO)
    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)
