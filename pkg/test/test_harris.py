import math
import warnings
from unittest import TestCase

from chirikov.harris import (DEFAULT_CONSTANTS, LogRate, DriftParams, MinorizationParams, harris_constants,
                             l0_constant, criterion_rate, mixing_rate_from_tau, iterated_drift, contraction_assembly,
                             zeta_large_K, zeta_admissible, log10_sum, minorization_time, chirikov_headline_rates,
                             rates_frame, admissible_sweep, _nested_total)
from chirikov.utils.rng import RngStreamSpec


class TestHarrisConstants(TestCase):
    def test_worked_example(self):
        output = harris_constants(DriftParams(0.5, 1.), MinorizationParams(0.35, 8.), alpha0=0.25, gamma0=0.76)
        self.assertAlmostEqual(output.beta, 0.25)
        self.assertAlmostEqual(output.alpha_bar, 0.9)

    def test_admissible_sweep(self):
        sweep = admissible_sweep(500, RngStreamSpec(8))
        self.assertEqual(len(sweep), 500)
        self.assertTrue((sweep["alpha_bar"] < 1.).all())
        self.assertTrue((sweep["alpha_bar"] > 0.).all())
        self.assertTrue((sweep["beta"] > 0.).all())
        with self.assertRaises(ValueError):
            admissible_sweep(0)

    def test_names_the_violated_inequality(self):
        with self.assertRaisesRegex(ValueError, "2C/\\(1-gamma\\)"):
            harris_constants(DriftParams(0.5, 1.), MinorizationParams(0.35, 3.), alpha0=0.25, gamma0=0.9)
        with self.assertRaisesRegex(ValueError, "alpha0"):
            harris_constants(DriftParams(0.5, 1.), MinorizationParams(0.35, 8.), alpha0=0.4, gamma0=0.9)
        with self.assertRaisesRegex(ValueError, "gamma0"):
            harris_constants(DriftParams(0.5, 1.), MinorizationParams(0.35, 8.), alpha0=0.25, gamma0=0.7)

    def test_parameter_validation(self):
        with self.assertRaises(ValueError):
            DriftParams(1., 1.)
        with self.assertRaises(ValueError):
            MinorizationParams(0.5, 0.)


class TestRates(TestCase):
    def test_criterion_rate(self):
        rate = criterion_rate(m=2, k=3, p=0.25, gamma_prime=0.4, C1=1., C2_small=1.)
        self.assertAlmostEqual(rate.gamma, 2 ** 0.25 * 0.4)
        self.assertAlmostEqual(rate.gamma, 0.4757, places=4)
        self.assertAlmostEqual(rate.l0, 13.8669, places=3)
        self.assertAlmostEqual(rate.tau, 1. / 6.)
        self.assertEqual(rate.prefactor, 16.)
        self.assertAlmostEqual(rate.exponent, rate.tau ** 2 / rate.l0)

    def test_l0(self):
        self.assertAlmostEqual(l0_constant(0.25), 4. * (1. + 1. / (1. - 2. ** -0.75)))
        with self.assertRaises(ValueError):
            l0_constant(1.)

    def test_mixing_rate(self):
        rate = mixing_rate_from_tau(0.1, q=1., d=2, p=0.25)
        self.assertAlmostEqual(rate.zeta * 1e5, 4.5071, places=3)
        self.assertAlmostEqual(rate.rate, rate.zeta / 3.)
        self.assertEqual(rate.branch, "dimension")
        self.assertEqual(mixing_rate_from_tau(0.1, q=5., d=2, p=0.25).branch, "moment")
        self.assertTrue(zeta_admissible(rate.zeta, 0.1, l0_constant(0.25), 1., 2))
        self.assertFalse(zeta_admissible(0.01 / l0_constant(0.25), 0.1, l0_constant(0.25), 1., 2))

    def test_iterated_drift(self):
        self.assertAlmostEqual(iterated_drift(0.5, 1., 1), 1.)
        self.assertAlmostEqual(iterated_drift(0.5, 1., 3), 1.75)

    def test_contraction_assembly_closed_form(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            table = contraction_assembly(0.5, 1., 2, 0.1, gamma0=0.75)
            default = contraction_assembly(0.5, 1., 2, 0.1)
        self.assertAlmostEqual(table["R2"], 8.)
        self.assertAlmostEqual(table["L_M"], 1.5)
        self.assertAlmostEqual(table["second_branch"], table["closed_form"])
        self.assertAlmostEqual(table["closed_form"], 0.75 + 0.25 / (1. + 0.1 / 0.75))
        self.assertIsNone(default["closed_form"])
        self.assertAlmostEqual(default["gamma0"], 0.8125)

    def test_zeta_large_K(self):
        self.assertAlmostEqual(zeta_large_K(0.1, 1.), 0.001 * 0.25)
        self.assertAlmostEqual(zeta_large_K(0.1, 7.), 0.001 / 8.)


class TestLogSpace(TestCase):
    def test_log_rate(self):
        self.assertEqual(LogRate(2., nested=True).log10(), -100.)
        self.assertEqual(LogRate(-3.).log10(), -3.)
        self.assertEqual(LogRate(264., nested=True).log10(), -1e264)
        self.assertTrue(math.isfinite(LogRate(308.2, nested=True).log10()))
        with self.assertRaises(OverflowError):
            LogRate(308.3, nested=True).log10()
        with self.assertRaises(ValueError):
            LogRate(float("inf"))

    def test_log10_sum(self):
        self.assertAlmostEqual(log10_sum(2., 2.), 2. + math.log10(2.))
        self.assertAlmostEqual(log10_sum(400., 0.), 400.)

    def test_minorization_time(self):
        M, log10_M = minorization_time(1.1)
        self.assertEqual(M % 2, 0)
        self.assertGreaterEqual(M, math.floor(math.pi * 1.1 ** 9) + math.floor(12 * math.pi * 1.1 ** 132) + 8)
        self.assertAlmostEqual(log10_M, math.log10(M))
        M, log10_M = minorization_time(10.)
        self.assertIsNone(M)
        self.assertAlmostEqual(log10_M, math.log10(12 * math.pi) + 132., places=6)

    def test_headline_rates(self):
        headline = chirikov_headline_rates(10., q=1., p=0.25)
        self.assertTrue(headline.rates["p_K"].nested)
        self.assertAlmostEqual(headline.rates["p_K"].log10_value, 264.)
        self.assertEqual(dict(headline.constants), dict(DEFAULT_CONSTANTS))
        self.assertAlmostEqual(chirikov_headline_rates(100., q=1., p=0.25).rates["moment_bound"].log10_value, 0.5)
        scaled = chirikov_headline_rates(10., q=1., p=0.25, constants={"C": 10.})
        self.assertAlmostEqual(scaled.rates["p_K"].log10_value, 265.)
        self.assertEqual(len(rates_frame(headline)), len(headline.rates))

    def test_headline_rejects(self):
        with self.assertRaises(ValueError):
            chirikov_headline_rates(10., q=1., p=0.25, constants={"C9": 1.})
        with self.assertRaises(ValueError):
            chirikov_headline_rates(1., q=1., p=0.25)

    def test_headline_with_unit_mass_tail(self):
        headline = chirikov_headline_rates(1.01, q=1., p=0.25, constants={"C2": 1e4})
        for rate in headline.rates.values():
            self.assertTrue(math.isfinite(rate.log10_value))
        self.assertGreater(headline.rates["alpha"].log10_value, headline.rates["c1_power"].log10_value - 0.01)
        with self.assertRaises(ArithmeticError):
            chirikov_headline_rates(1.01, q=1., p=0.25, constants={"C2": 1e200})

    def test_nested_total(self):
        self.assertAlmostEqual(_nested_total(2., 2., 100.), math.log10(300.))
        self.assertAlmostEqual(_nested_total(2., 2., 0.), math.log10(200.))
        self.assertAlmostEqual(_nested_total(2., 2., -100.), 2.)
        with self.assertRaises(ArithmeticError):
            _nested_total(2., 2., -200.)
