import hashlib
import json
import os

import yaml

from ForecastModel.base import BaseModel, CalendarAnchor
from ForecastModel.strategies import VARIANT_NAMES
from evaluation.models import Configuration
from utils.enums import AggregationMode, Phase

STRATEGY_ALIASES = {"MIMO": "MIMO-LOO", "DIRMO": "DIRMO-SEL"}


def _parse_list(value):
    if value is None:
        return None
    if isinstance(value, str):
        return [item.strip() for item in value.split(',') if item.strip()]
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


class RunConfig(BaseModel):
    """
    Parameters of one bench run. `deseasonalize`, `input_selection` and `model_selection`
    left to None span every value of the configuration grid.
    """
    data_dir = None
    strategies = list(VARIANT_NAMES)
    deseasonalize = None
    input_selection = None
    model_selection = None
    kmax_grid = [20, 50, 100]
    horizon = 56
    seed = 0
    phase = Phase.precompetition
    alpha = 0.05
    workers = 1
    out_dir = 'results'
    config_file = None
    calendar_start = None
    start_day_of_week = None
    max_iter = 50
    synthetic = 0
    synthetic_length = 735
    verbose = False

    def validate(self):
        unknown = set(self.__dict__) - set(self.fields())
        if unknown:
            raise RunConfig.ModelValidationException("Unknown configuration keys %s" % sorted(unknown))
        self.strategies = [STRATEGY_ALIASES.get(name.upper(), name.upper()) for name in _parse_list(self.strategies)]
        for name in self.strategies:
            if name not in VARIANT_NAMES:
                raise RunConfig.ModelValidationException("Unknown strategy %s (one of %s)" % (name, VARIANT_NAMES))
        if len(self.strategies) == 0 or len(set(self.strategies)) != len(self.strategies):
            raise RunConfig.ModelValidationException("Strategies should be a non-empty list without repeats")
        model_selection = _parse_list(self.model_selection)
        self.model_selection = None if model_selection is None else [AggregationMode.parse(i) for i in model_selection]
        self.kmax_grid = sorted(set(int(i) for i in _parse_list(self.kmax_grid) or []))
        if len(self.kmax_grid) == 0 or self.kmax_grid[0] < 2:
            raise RunConfig.ModelValidationException("kmax_grid should hold integers >= 2")
        self.horizon, self.workers, self.seed = int(self.horizon), int(self.workers), int(self.seed)
        if self.horizon < 1:
            raise RunConfig.ModelValidationException("horizon should be at least 1")
        if self.workers < 1:
            raise RunConfig.ModelValidationException("workers should be at least 1")
        self.alpha = float(self.alpha)
        if not 0.0 < self.alpha < 1.0:
            raise RunConfig.ModelValidationException("alpha should lie in (0, 1)")
        self.phase = Phase.parse(self.phase)
        self.synthetic, self.synthetic_length, self.max_iter = int(self.synthetic), int(self.synthetic_length), int(
            self.max_iter)
        if self.data_dir is None and self.synthetic < 1:
            raise RunConfig.ModelValidationException("Either a data directory or a synthetic series count is needed")
        if self.calendar_start is not None:
            self.calendar_start = str(self.calendar_start)
            CalendarAnchor(start_date=self.calendar_start)
        if self.start_day_of_week is not None:
            CalendarAnchor(day_of_week=self.start_day_of_week)
            self.start_day_of_week = int(self.start_day_of_week)

    @classmethod
    def fields(cls) -> list:
        return [key for key, value in vars(cls).items()
                if not key.startswith('_') and not callable(value) and not isinstance(value, (classmethod, property))]

    @classmethod
    def from_sources(cls, cli: dict = None, config_file: str = None) -> 'RunConfig':
        """CLI values (None meaning unset) override config-file keys, which override the defaults"""
        cli = {key: value for key, value in (cli or {}).items() if value is not None}
        config_file = cli.get('config_file', config_file)
        params = load_config_file(config_file) if config_file else {}
        params.update(cli)
        if config_file:
            params['config_file'] = config_file
        return cls(**params)

    @property
    def default_anchor(self):
        if self.calendar_start is not None:
            return CalendarAnchor(start_date=self.calendar_start)
        if self.start_day_of_week is not None:
            return CalendarAnchor(day_of_week=self.start_day_of_week)
        return None

    def configurations(self) -> list:
        return Configuration.grid(self.deseasonalize, self.input_selection, self.model_selection)

    def to_dict(self) -> dict:
        res = {}
        for key in self.fields():
            value = getattr(self, key)
            if isinstance(value, Phase):
                value = value.value
            elif isinstance(value, list):
                value = [i.value if isinstance(i, AggregationMode) else i for i in value]
            res[key] = value
        return res

    def config_hash(self) -> str:
        """Digest of the parameters that shape the results (paths and verbosity excluded)"""
        echo = {key: value for key, value in self.to_dict().items()
                if key not in ('out_dir', 'config_file', 'verbose', 'workers')}
        return hashlib.sha256(json.dumps(echo, sort_keys=True, default=str).encode()).hexdigest()[:16]

    def __str__(self):
        return "run %s (%s)" % (self.phase.value, self.config_hash())


class ConfigFileException(Exception):
    pass


def load_config_file(path: str) -> dict:
    """A flat YAML mapping whose keys are RunConfig fields"""
    if not os.path.isfile(path):
        raise ConfigFileException("The config file %s does not exist" % path)
    with open(path) as f:
        content = yaml.safe_load(f)
    if content is None:
        return {}
    if not isinstance(content, dict) or any(isinstance(v, dict) for v in content.values()):
        raise ConfigFileException("The config file %s should hold flat key/value pairs" % path)
    return {str(key).replace('-', '_'): value for key, value in content.items()}
