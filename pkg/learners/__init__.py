import os

from . import materialized_learners
from .base import BasicLearner


def get_learner_class():
    learner_class = os.environ['LEARNER'] if 'LEARNER' in os.environ else 'LazyLearner'
    learner_class = getattr(materialized_learners, learner_class, getattr(materialized_learners, 'LazyLearner'))
    return learner_class


def get_learner(**kwargs) -> BasicLearner:
    default_params = dict(kmax=int(os.environ['KMAX']) if 'KMAX' in os.environ else 50, policy='WINNER')
    default_params.update(kwargs)
    return get_learner_class()(**default_params)
