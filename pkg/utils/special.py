"""
Regularized incomplete gamma and beta functions and the distribution tails built on
them (chi-squared, F, standard normal). Series / continued-fraction evaluation with
modified Lentz iterations.
"""
import math
import sys

EPSILON = 1.0e-15
TINY = sys.float_info.min / sys.float_info.epsilon
MAX_ITERATION = 500


class SpecialFunctionException(Exception):
    pass


def _check(condition, message):
    if not condition:
        raise SpecialFunctionException(message)


def regularized_gamma_p(a: float, x: float) -> float:
    """P(a, x), the lower regularized incomplete gamma function"""
    _check(a > 0.0, "non-positive a is not allowed")
    _check(x >= 0.0, "negative x is not allowed")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_continued_fraction(a, x)


def regularized_gamma_q(a: float, x: float) -> float:
    """Q(a, x) = 1 - P(a, x), evaluated directly in the tail"""
    _check(a > 0.0, "non-positive a is not allowed")
    _check(x >= 0.0, "negative x is not allowed")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_continued_fraction(a, x)


def _gamma_series(a, x):
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(MAX_ITERATION):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * EPSILON:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise SpecialFunctionException("incomplete gamma series did not converge (a=%s, x=%s)" % (a, x))


def _gamma_continued_fraction(a, x):
    b = x + 1.0 - a
    c = 1.0 / TINY
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITERATION + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < TINY:
            d = TINY
        c = b + an / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPSILON:
            return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h
    raise SpecialFunctionException("incomplete gamma fraction did not converge (a=%s, x=%s)" % (a, x))


def regularized_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), the regularized incomplete beta function"""
    _check(a > 0.0 and b > 0.0, "a and b should be positive")
    _check(0.0 <= x <= 1.0, "x should lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def _beta_continued_fraction(a, b, x):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < TINY:
        d = TINY
    d = 1.0 / d
    h = d
    for m in range(1, MAX_ITERATION + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPSILON:
            return h
    raise SpecialFunctionException("incomplete beta fraction did not converge (a=%s, b=%s, x=%s)" % (a, b, x))


def chi2_sf(statistic: float, dof: float) -> float:
    """Upper tail P(X > statistic) of a chi-squared variable"""
    _check(dof > 0, "degrees of freedom should be positive")
    if statistic <= 0.0:
        return 1.0
    return regularized_gamma_q(dof / 2.0, statistic / 2.0)


def f_sf(statistic: float, dof1: float, dof2: float) -> float:
    """Upper tail P(X > statistic) of an F(dof1, dof2) variable"""
    _check(dof1 > 0 and dof2 > 0, "degrees of freedom should be positive")
    if statistic <= 0.0:
        return 1.0
    if math.isinf(statistic):
        return 0.0
    return regularized_beta(dof2 / 2.0, dof1 / 2.0, dof2 / (dof2 + dof1 * statistic))


def normal_two_sided_p(z: float) -> float:
    """2 (1 - Phi(|z|))"""
    return math.erfc(abs(z) / math.sqrt(2.0))
