import collections
import math

import numpy as np
from scipy.integrate import quad


def _check_exponent(p):
    if not 0. < p < 0.5:
        raise ValueError("'p' must lie in (0, 1/2); got {0}".format(p))


def _panel(function, lower, upper, wvar, limit):
    if upper - lower <= 0.:
        return 0.
    value, _ = quad(function, lower, upper, weight='alg', wvar=wvar, epsabs=1e-11, epsrel=1e-11, limit=limit)
    return value


def singular_cos_integral(a, b, p, limit=200):
    """
    Integral of |a + b cos(t)|^(-p) over [0, 2pi].
    The domain is split at the roots of a + b cos(t); the power-law factor at each root is handed to
    QUADPACK's algebraic weight, leaving a smooth regularized integrand.
    :param a: real offset.
    :param b: non-zero amplitude.
    :param p: exponent in (0, 1/2).
    :return: value of the integral.
    """
    _check_exponent(p)
    if b == 0:
        raise ValueError("'b' must be non-zero")
    a, b = float(a), float(b)

    def integrand(t):
        return abs(a + b * math.cos(t)) ** (-p)

    ratio = -a / b
    if abs(ratio) > 1.:
        value, _ = quad(integrand, 0., math.pi, epsabs=1e-11, epsrel=1e-11, limit=limit)
        return 2. * value

    root = math.acos(ratio)
    if root == 0. or root == math.pi:
        # double root at an endpoint: |a + b cos t| ~ |b| (t - root)^2 / 2
        limit_value = (abs(b) / 2.) ** (-p)

        def regular(t):
            gap = abs(t - root)
            if gap < 1e-12:
                return limit_value
            return integrand(t) * gap ** (2. * p)

        wvar = (-2. * p, 0.) if root == 0. else (0., -2. * p)
        return 2. * _panel(regular, 0., math.pi, wvar, limit)

    limit_value = abs(b * math.sin(root)) ** (-p)

    def regular(t):
        gap = abs(t - root)
        if gap < 1e-12:
            return limit_value
        return integrand(t) * gap ** p

    left = _panel(regular, 0., root, (0., -p), limit)
    right = _panel(regular, root, math.pi, (-p, 0.), limit)
    return 2. * (left + right)


def default_ratio_grid():
    return np.round(np.linspace(-10., 10., 2001), 10)


def claim_constant_probe(p, ratios=None, full_output=False):
    """
    Empirical constant C_p = max over a/b of |b|^p times the singular cosine integral.
    With b = 1 the scale factor is one, so the probe sweeps a over the ratio grid.
    :param p: exponent in (0, 1/2).
    :param ratios: grid of a/b values, default [-10, 10] with step 0.01.
    :param full_output: also return the maximizing ratio and the swept values.
    """
    _check_exponent(p)
    if ratios is None:
        ratios = default_ratio_grid()
    ratios = np.asarray(ratios, dtype=float)
    values = np.array([singular_cos_integral(ratio, 1., p) for ratio in ratios])
    index = int(np.argmax(values))
    if full_output:
        return values[index], ratios[index], values
    return values[index]


MidpointOracle = collections.namedtuple("MidpointOracle", ["value", "error_bound", "points"])


def midpoint_oracle(a, b, p, points=10 ** 7, chunk=10 ** 6):
    """
    Brute-force midpoint rule for the singular cosine integral, with an a-priori error budget.
    Near a simple root t0 the rule misses by about h^(1-p) |b sin t0|^-p times an order-one Hurwitz zeta factor,
    and by h^(1-2p) (|b| / 2)^-p at a double root; without roots the periodic rule converges geometrically.
    :param points: number of midpoints on [0, 2pi].
    :param chunk: midpoints evaluated per batch.
    :return: MidpointOracle(value, error_bound, points)
    """
    _check_exponent(p)
    if b == 0:
        raise ValueError("'b' must be non-zero")
    points = int(points)
    if points < 1:
        raise ValueError("'points' must be at least 1; got {0}".format(points))
    a, b = float(a), float(b)
    h = 2. * math.pi / points
    total = 0.
    for start in range(0, points, chunk):
        t = (np.arange(start, min(start + chunk, points)) + 0.5) * h
        with np.errstate(divide='ignore'):
            total += float(np.sum(np.abs(a + b * np.cos(t)) ** (-p)))
    bound = 1e-9
    ratio = -a / b
    if abs(ratio) <= 1.:
        strength = abs(b * math.sqrt(1. - ratio * ratio))
        simple = 16. * h ** (1. - p) * strength ** (-p) if strength > 0. else math.inf
        double = 16. * h ** (1. - 2. * p) * (abs(b) / 2.) ** (-p)
        bound += min(simple, double)
    return MidpointOracle(total * h, bound, points)
