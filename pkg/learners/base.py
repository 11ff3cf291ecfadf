from abc import ABC, abstractmethod

import numpy as np

from ForecastModel.base import EmbeddedDataset, TimeSeries
from utils.enums import CriterionKind


class LearnerException(Exception):
    pass


class InsufficientNeighborsException(LearnerException):
    pass


class Prediction(object):
    """A learner's answer to one query: the target vector plus what was chosen to produce it"""

    def __init__(self, value, diagnostics=None):
        self.value = np.asarray(value, dtype=float).reshape(-1)
        self.diagnostics = diagnostics if diagnostics is not None else {}

    def __str__(self):
        return "prediction %s (%s)" % (np.round(self.value, 4).tolist(), self.diagnostics)

    def __repr__(self):
        return self.__str__()


class BasicLearner(ABC):

    @abstractmethod
    def predict(self, dataset: EmbeddedDataset, query: np.ndarray, criterion: CriterionKind = CriterionKind.loo,
                train_series: TimeSeries = None) -> Prediction:
        """
        Answers one query against a training set
        :param dataset: the embedded training pairs
        :param query: input vector with the dataset's input dimension
        :param criterion: how competing local models are scored
        :param train_series: the series the dataset was embedded from (needed by series-level criteria)
        :return: a Prediction holding one value per output component
        """
        pass

    def describe(self) -> dict:
        """Parameters echoed in reports"""
        return {"learner": self.__class__.__name__}
