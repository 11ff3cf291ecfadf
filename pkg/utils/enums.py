from enum import Enum


class ValuesEnum(Enum):

    @classmethod
    def get_values(cls):
        return list(map(lambda c: c.value, cls))

    @classmethod
    def parse(cls, value):
        """Accepts a member, its value or its name (case-insensitive)"""
        if isinstance(value, cls):
            return value
        text = str(value).strip()
        for member in cls:
            if text.lower() in (str(member.value).lower(), member.name.lower()):
                return member
        raise ValueError("%s is not one of %s" % (value, cls.get_values()))


class StrategyKind(ValuesEnum):
    REC = "REC"  # one single-output model iterated over the horizon
    DIR = "DIR"  # one single-output model per step
    DIRREC = "DIRREC"  # one model per step, inputs grow with the previous forecasts
    MIMO = "MIMO"  # one vector-output model for the whole horizon
    DIRMO = "DIRMO"  # H/s vector-output models of size s


class CriterionKind(ValuesEnum):
    loo = "loo"
    acflin = "acflin"


class AggregationMode(ValuesEnum):
    WINNER = "WINNER"
    COMB = "COMB"
    WCOMB = "WCOMB"


class DirmoVariant(ValuesEnum):
    SEL = "SEL"
    AVG = "AVG"
    WAVG = "WAVG"


class LagOrigin(ValuesEnum):
    pacf = "pacf"
    pacf_plus_fbs = "pacf_plus_fbs"


class Phase(ValuesEnum):
    precompetition = "precompetition"
    competition = "competition"
