'''
  @ Date: 2026/10/18 23:10
'''
import collections
import math
import sys
import warnings

import pandas as pd

from chirikov.utils.rng import RngStreamSpec

LOG10_E = math.log10(math.e)
# nested rates whose log10 exceeds this do not fit a float once unnested
LOG10_FLOAT_MAX = math.log10(sys.float_info.max)

# unnamed prefactors of the rate pipeline; every output echoes the table it used
DEFAULT_CONSTANTS = collections.OrderedDict([
    ("C", 1.),  # p_K = K^(-C K^264)
    ("C1", 1.),  # radius prefactor of the small-set ball, and the rate prefactor C1 / (1 + q)
    ("C2", 1.),  # mass prefactor C2 K^-780, moment bound C2 K^p
    ("C3", 1.),  # c1(K) = C3 K^-764
])


class LogRate(collections.namedtuple("LogRate", ["log10_value", "description", "nested"])):
    """
    log10 of a positive quantity. With nested=True the field holds log10(-log10(value)) instead, the only
    representable form of values such as K^(-K^264).
    """
    __slots__ = ()

    def __new__(cls, log10_value, description="", nested=False):
        log10_value = float(log10_value)
        if not math.isfinite(log10_value):
            raise ValueError("LogRate must be finite; got {0} for '{1}'".format(log10_value, description))
        return super(LogRate, cls).__new__(cls, log10_value, description, bool(nested))

    def log10(self):
        """Plain log10 of the value; nested rates beyond float range raise OverflowError."""
        if not self.nested:
            return self.log10_value
        if self.log10_value > LOG10_FLOAT_MAX:
            raise OverflowError("log10 of '{0}' is -10^{1:.3f} and does not fit a float".format(
                self.description, self.log10_value))
        return -10. ** self.log10_value


class DriftParams(collections.namedtuple("DriftParams", ["gamma", "C", "m"])):
    """P^m V <= gamma V + C."""
    __slots__ = ()

    def __new__(cls, gamma, C, m=1):
        if not 0. < gamma < 1.:
            raise ValueError("'gamma' must lie in (0, 1); got {0}".format(gamma))
        if C < 0.:
            raise ValueError("'C' must be non-negative; got {0}".format(C))
        if int(m) < 1:
            raise ValueError("'m' must be a positive integer; got {0}".format(m))
        return super(DriftParams, cls).__new__(cls, float(gamma), float(C), int(m))


class MinorizationParams(collections.namedtuple("MinorizationParams", ["alpha", "R", "M"])):
    """inf over {V <= R} of P^M(z, .) >= alpha nu(.)."""
    __slots__ = ()

    def __new__(cls, alpha, R, M=1):
        if not 0. < alpha < 1.:
            raise ValueError("'alpha' must lie in (0, 1); got {0}".format(alpha))
        if not R > 0.:
            raise ValueError("'R' must be positive; got {0}".format(R))
        if int(M) < 1:
            raise ValueError("'M' must be a positive integer; got {0}".format(M))
        return super(MinorizationParams, cls).__new__(cls, float(alpha), float(R), int(M))


HarrisOutput = collections.namedtuple("HarrisOutput", ["beta", "alpha_bar", "gamma0", "alpha0"])
CriterionRate = collections.namedtuple("CriterionRate", ["gamma", "l0", "tau", "prefactor", "exponent"])
MixingRate = collections.namedtuple("MixingRate", ["zeta", "rate", "branch"])
HeadlineRates = collections.namedtuple("HeadlineRates", ["rates", "M", "constants"])


def harris_constants(drift, minorization, alpha0, gamma0):
    """
    Weighted-norm contraction constants of a drift/minorization pair:
    beta = alpha0 / C and alpha_bar = max(1 + alpha0 - alpha, (2 + R beta gamma0) / (2 + R beta)).
    :param drift: DriftParams
    :param minorization: MinorizationParams
    :param alpha0: in (0, alpha).
    :param gamma0: in (gamma + 2C / R, 1).
    :return: HarrisOutput
    """
    gamma, C = drift.gamma, drift.C
    alpha, R = minorization.alpha, minorization.R
    if not R > 2. * C / (1. - gamma):
        raise ValueError("R must exceed 2C/(1-gamma) = {0}; got {1}".format(2. * C / (1. - gamma), R))
    if not 0. < alpha0 < alpha:
        raise ValueError("alpha0 must lie in (0, alpha) = (0, {0}); got {1}".format(alpha, alpha0))
    if not gamma + 2. * C / R < gamma0 < 1.:
        raise ValueError("gamma0 must lie in (gamma + 2C/R, 1) = ({0}, 1); got {1}".format(
            gamma + 2. * C / R, gamma0))
    if C == 0.:
        raise ValueError("C must be positive for beta = alpha0/C")
    beta = alpha0 / C
    alpha_bar = max(1. + alpha0 - alpha, (2. + R * beta * gamma0) / (2. + R * beta))
    if not 0. < alpha_bar < 1.:
        raise ArithmeticError("alpha_bar = {0} left (0, 1)".format(alpha_bar))
    return HarrisOutput(beta, alpha_bar, gamma0, alpha0)


def admissible_sweep(points=10 ** 4, stream=None):
    """
    harris_constants over random points of the admissible region: R beyond 2C/(1-gamma), alpha0 in (0, alpha) and
    gamma0 in (gamma + 2C/R, 1).
    :param points: number of draws.
    :param stream: RngStreamSpec; seed 0 by default.
    :return: DataFrame with the inputs, beta and alpha_bar of every draw.
    """
    if points < 1:
        raise ValueError("'points' must be at least 1; got {0}".format(points))
    generator = (stream if stream is not None else RngStreamSpec(0)).generator()
    draws = generator.uniform(0.01, 0.99, size=(int(points), 6))
    gamma = 0.05 + 0.9 * draws[:, 0]
    C = 10. ** (2. * draws[:, 1] - 1.)
    alpha = 0.05 + 0.9 * draws[:, 2]
    R = 2. * C / (1. - gamma) * (1. + 4. * draws[:, 3])
    alpha0 = alpha * draws[:, 4]
    floor = gamma + 2. * C / R
    gamma0 = floor + (1. - floor) * draws[:, 5]
    rows = []
    for values in zip(gamma, C, alpha, R, alpha0, gamma0):
        output = harris_constants(DriftParams(values[0], values[1]), MinorizationParams(values[2], values[3]),
                                  values[4], values[5])
        rows.append(values + (output.beta, output.alpha_bar))
    return pd.DataFrame(rows, columns=["gamma", "C", "alpha", "R", "alpha0", "gamma0", "beta", "alpha_bar"])


def l0_constant(p):
    """l0 = 4 (1 + 1 / (1 - 2^(p - 1)))."""
    if not 0. < p < 1.:
        raise ValueError("'p' must lie in (0, 1); got {0}".format(p))
    return 4. * (1. + 1. / (1. - 2. ** (p - 1.)))


def criterion_rate(m, k, p, gamma_prime, C1, C2_small, d=2):
    """
    Rate of the transition-kernel contraction from an m-step moment contraction.
    gamma = 2^p gamma', tau = min(C2, 1 / (m k)), and the kernel contracts like 2^(k+1) C1^((d-1)p) e^(-tau^2 n / l0).
    :return: CriterionRate(gamma, l0, tau, prefactor, exponent) with exponent = tau^2 / l0 per step.
    """
    for name, value in (("m", m), ("k", k), ("C1", C1), ("C2_small", C2_small)):
        if not value > 0:
            raise ValueError("'{0}' must be positive; got {1}".format(name, value))
    if not 0. < gamma_prime < 0.5:
        raise ValueError("'gamma_prime' must lie in (0, 1/2); got {0}".format(gamma_prime))
    l0 = l0_constant(p)
    gamma = 2. ** p * gamma_prime
    if not gamma < 1.:
        raise ValueError("gamma = 2^p gamma' must be below 1; got {0}".format(gamma))
    tau = min(C2_small, 1. / (m * k))
    prefactor = 2. ** (k + 1) * C1 ** ((d - 1) * p)
    return CriterionRate(gamma, l0, tau, prefactor, tau * tau / l0)


def mixing_rate_from_tau(tau, q, d, p):
    """
    zeta = (tau^2 / 2 l0) min{1 / (2 (1 + q)), 1 / (5d/2 + 3)} and the correlation rate 2 zeta / (d + 4).
    :return: MixingRate(zeta, rate, branch) where branch names the active term of the minimum.
    """
    if not 0. < tau <= 1.:
        raise ValueError("'tau' must lie in (0, 1]; got {0}".format(tau))
    if not q > 0:
        raise ValueError("'q' must be positive; got {0}".format(q))
    if d < 2:
        raise ValueError("'d' must be at least 2; got {0}".format(d))
    moment, dimension = 1. / (2. * (1. + q)), 1. / (5. * d / 2. + 3.)
    zeta = tau * tau / (2. * l0_constant(p)) * min(moment, dimension)
    return MixingRate(zeta, 2. * zeta / (d + 4.), "moment" if moment <= dimension else "dimension")


def iterated_drift(gamma, C, n):
    """L_n = C (1 - gamma^n) / (1 - gamma), so that P^n V <= gamma^n V + L_n."""
    if not 0. < gamma < 1.:
        raise ValueError("'gamma' must lie in (0, 1); got {0}".format(gamma))
    return C * (1. - gamma ** n) / (1. - gamma)


def contraction_assembly(gamma, C, k, alpha, gamma0=None, l0=4.):
    """
    Contraction constants of P^M, M = 2k, with R2 = 4C / (1 - gamma) and L_M = iterated_drift(gamma, C, k).
    :param gamma0: default (3 + gamma^k) / 4; the large-K pipeline uses 3/4.
    :param l0: denominator of the upper bracket 1 - alpha / l0 on the second branch.
    :return: dict with R2, L_M, gamma0, beta, alpha_bar, second_branch, closed_form (gamma0 = 3/4 only), bracket and
    in_bracket.
    """
    if not 0. < alpha < 1.:
        raise ValueError("'alpha' must lie in (0, 1); got {0}".format(alpha))
    if not C > 0:
        raise ValueError("'C' must be positive; got {0}".format(C))
    R2 = 4. * C / (1. - gamma)
    L_M = iterated_drift(gamma, C, k)
    gamma_k = gamma ** k
    if gamma0 is None:
        gamma0 = (3. + gamma_k) / 4.
    beta = alpha / (2. * L_M)
    second = (2. + beta * R2 * gamma0) / (2. + beta * R2)
    closed_form = None
    if gamma0 == 0.75:
        closed_form = 0.75 + 0.25 / (1. + alpha / (1. - gamma_k))
    bracket = (1. - alpha / 2., 1. - alpha / l0)
    in_bracket = bracket[0] < second < bracket[1]
    if not in_bracket:
        warnings.warn(RuntimeWarning("second branch {0} is outside ({1}, {2}); the refinement bound does not hold "
                                     "for these parameters".format(second, bracket[0], bracket[1])))
    return collections.OrderedDict([("R2", R2), ("L_M", L_M), ("gamma0", gamma0), ("beta", beta),
                                    ("alpha_bar", max(1. - alpha / 2., second)), ("second_branch", second),
                                    ("closed_form", closed_form), ("bracket", bracket), ("in_bracket", in_bracket)])


def zeta_large_K(alpha, q):
    """zeta = (alpha^2 / 10) min{1/4, 1/(1 + q)}."""
    return alpha * alpha / 10. * min(0.25, 1. / (1. + q))


def zeta_admissible(zeta, tau, l0, q, d):
    """(2 zeta - tau^2/l0) / (zeta q) + 2 < 0 and 5d/2 + 1 + (2 zeta - tau^2/l0) / zeta < 0."""
    excess = (2. * zeta - tau * tau / l0) / zeta
    return bool(excess / q + 2. < 0. and 5. * d / 2. + 1. + excess < 0.)


def log10_sum(*logs):
    """log10(sum 10^l) without leaving log space."""
    top = max(logs)
    return top + math.log10(sum(10. ** (value - top) for value in logs))


def _nested_total(nested_first, nested_second, plain_third):
    """
    log10 of 10^nested_first + 10^nested_second + plain_third, where the third term may be zero or negative
    (a mass factor C2 K^-780 of at least one).
    """
    total = log10_sum(nested_first, nested_second)
    if plain_third > 0.:
        return log10_sum(total, math.log10(plain_third))
    # 10^-total underflows to zero for the astronomically small masses
    shrink = 1. + plain_third * 10. ** -total
    if not shrink > 0.:
        raise ArithmeticError("assembled minorization mass is not below one: -log10 alpha = {0}".format(
            10. ** total + plain_third))
    return total + math.log10(shrink)


def minorization_time(K, s=1., C1=1., separation_exponent=9., tolerance_exponent=132.):
    """
    Smallest even integer >= floor(pi / (K^-a s)) + floor(12 pi / (C1 K^-b)) + 8.
    :return: (M or None, log10 M); the integer is exact only while the sum fits in 2^53.
    """
    log_first = math.log10(math.pi / s) + separation_exponent * math.log10(K)
    log_second = math.log10(12. * math.pi / C1) + tolerance_exponent * math.log10(K)
    if max(log_first, log_second) < 15.:
        total = int(math.floor(math.pi * K ** separation_exponent / s)) \
            + int(math.floor(12. * math.pi * K ** tolerance_exponent / C1)) + 8
        total += total % 2
        return total, math.log10(total)
    return None, log10_sum(log_first, log_second)


def chirikov_headline_rates(K, q, p, s=1., constants=None):
    """
    The K-dependent rate pipeline in log space.
    :param K: kick strength > 1.
    :param q: moment order > 0.
    :param p: drift exponent in (0, 1/2).
    :param s: separation scale of the drift sublevel set.
    :param constants: overrides of DEFAULT_CONSTANTS.
    :return: HeadlineRates(rates, M, constants) where rates maps a name to a LogRate; nested entries hold
    log10(-log10(value)).
    """
    if not K > 1:
        raise ValueError("'K' must exceed 1; got {0}".format(K))
    if not q > 0:
        raise ValueError("'q' must be positive; got {0}".format(q))
    if not 0. < p < 0.5:
        raise ValueError("'p' must lie in (0, 1/2); got {0}".format(p))
    table = collections.OrderedDict(DEFAULT_CONSTANTS)
    table.update(constants or {})
    unknown = set(table) - set(DEFAULT_CONSTANTS)
    if unknown:
        raise ValueError("unknown constants {0}; expected a subset of {1}".format(sorted(unknown),
                                                                                  list(DEFAULT_CONSTANTS)))
    lk = math.log10(K)
    M, log10_M = minorization_time(K, s=s, C1=table["C1"])
    # -log10 of each factor of the minorization mass p_K c1(K)^(floor(M/4) - 1) C2 K^-780
    nested_pK = math.log10(table["C"]) + 264. * lk + math.log10(lk)
    log_c1 = math.log10(table["C3"]) - 764. * lk
    if M is not None:
        nested_c1_power = math.log10(max(M // 4 - 1, 1)) + math.log10(-log_c1)
    else:
        nested_c1_power = log10_M - math.log10(4.) + math.log10(-log_c1)
    mass_tail = 780. * lk - math.log10(table["C2"])
    nested_alpha = _nested_total(nested_pK, nested_c1_power, mass_tail)
    # zeta = alpha^2 / 10 min{1/4, 1/(1+q)}: -log10 zeta = 2 (-log10 alpha) + 1 - log10 min
    nested_zeta = log10_sum(math.log10(2.) + nested_alpha, math.log10(1. - math.log10(min(0.25, 1. / (1. + q)))))
    # rate C1 / (1 + q) e^(-K^265): -log10 = K^265 log10 e - log10(C1 / (1 + q))
    rate_shift = math.log10(table["C1"] / (1. + q))
    if rate_shift < 0.:
        nested_rate = log10_sum(265. * lk + math.log10(LOG10_E), math.log10(-rate_shift))
    else:
        nested_rate = 265. * lk + math.log10(LOG10_E)

    rates = collections.OrderedDict()
    rates["M"] = LogRate(log10_M, "minorization time M (smallest even integer above the reachability bound)")
    rates["p_K"] = LogRate(nested_pK, "reachability probability p_K = K^(-C K^264)", nested=True)
    rates["c1_power"] = LogRate(nested_c1_power, "c1(K)^(floor(M/4) - 1) with c1(K) = C3 K^-764", nested=True)
    rates["alpha"] = LogRate(nested_alpha, "assembled minorization mass alpha", nested=True)
    rates["zeta"] = LogRate(nested_zeta, "per-step correlation rate zeta = alpha^2/10 min{1/4, 1/(1+q)}",
                            nested=True)
    rates["rate"] = LogRate(nested_rate, "per-step rate C1/(1+q) e^(-K^265)", nested=True)
    rates["moment_bound"] = LogRate(math.log10(table["C2"]) + p * lk, "moment bound C2 K^p")
    return HeadlineRates(rates, M, table)


def rates_frame(headline):
    """Flatten HeadlineRates into rows (name, log10_value, nested, description) for CSV/JSON output."""
    rows = [(name, rate.log10_value, rate.nested, rate.description) for name, rate in headline.rates.items()]
    return pd.DataFrame(rows, columns=["name", "log10_value", "nested", "description"])
