import math
from unittest import TestCase

import numpy as np

from chirikov.processes import TwoPointState
from chirikov.utils.rng import RngStreamSpec
from chirikov.transport import GridSpec
from chirikov.estimators import (mc_config, contraction_estimate, drift_check, lyapunov_function,
                                 apriori_bound_check, lyapunov_exponent, correlation_decay, fit_exponential_rate,
                                 crossing_time, empirical_prefactor, estimate_from_samples, duality_gap)


class TestContraction(TestCase):
    def test_large_kick_contracts(self):
        cfg = mc_config(2000, RngStreamSpec(1), grid_x=2, grid_v=2)
        report = contraction_estimate(100., 0.25, cfg, workers=1)
        self.assertEqual(len(report.per_cell), 4)
        self.assertLess(report.worst_estimate.mean + 5 * report.worst_estimate.std_error, 0.5)
        self.assertEqual(report.worst_estimate.mean, report.per_cell["mean"].max())

    def test_worst_estimate_falls_with_kick(self):
        cfg = mc_config(40000, RngStreamSpec(11), grid_x=1, grid_v=1)
        worst = [contraction_estimate(K, 0.25, cfg, workers=1).worst_estimate.mean for K in (50., 100., 200.)]
        self.assertTrue(worst[0] > worst[1] > worst[2])
        # K^-p predicts a ratio of 4^p between K = 50 and K = 200
        self.assertLess(abs(math.log((worst[0] / worst[2]) / 4. ** 0.25)), math.log(2.))

    def test_reproducible(self):
        cfg = mc_config(500, RngStreamSpec(2), grid_x=2, grid_v=1)
        first = contraction_estimate(30., 0.2, cfg, workers=1)
        second = contraction_estimate(30., 0.2, cfg, workers=2)
        np.testing.assert_array_equal(first.per_cell["mean"].values, second.per_cell["mean"].values)

    def test_rejects_bad_exponent(self):
        with self.assertRaises(ValueError):
            contraction_estimate(10., 0.5, mc_config(10))
        with self.assertRaises(ValueError):
            mc_config(0)


class TestDrift(TestCase):
    def test_lyapunov_function(self):
        z = TwoPointState((0., 0.), (0.01, 0.))
        self.assertAlmostEqual(lyapunov_function(z, 0.25), 0.01 ** -0.25)

    def test_near_diagonal_ratio(self):
        z = TwoPointState((0., 0.), (1e-3, 0.))
        estimate = drift_check(100., 0.25, z, mc_config(20000, RngStreamSpec(3)))
        ratio = (estimate.mean + 5 * estimate.std_error) / lyapunov_function(z, 0.25)
        self.assertLess(ratio, 0.9)


class TestApriori(TestCase):
    def test_growth_exponents(self):
        report = apriori_bound_check(1, (10., 30., 100.), mc_config(300, RngStreamSpec(4)))
        self.assertEqual(len(report.table), 3)
        self.assertLessEqual(report.first_exponent, 1.2)
        self.assertLessEqual(report.second_exponent, 3.2)
        self.assertGreater(report.first_exponent, 0.5)

    def test_phase_and_mixed_exponents(self):
        for n in (1, 2):
            report = apriori_bound_check(n, (10., 30., 100.), mc_config(200, RngStreamSpec(9)))
            for column in ("phase_first_max", "phase_second_max", "mixed_max"):
                self.assertIn(column, report.table.columns)
                self.assertTrue(np.all(np.isfinite(report.table[column])))
            self.assertLessEqual(report.phase_first_exponent, n + 0.2)
            self.assertGreater(report.phase_first_exponent, n - 0.5)
            self.assertLessEqual(report.phase_second_exponent, 2 * n + 1.2)
            self.assertLessEqual(report.mixed_exponent, 2 * n + 1.2)

    def test_rejects_bad_arguments(self):
        with self.assertRaises(ValueError):
            apriori_bound_check(5)
        with self.assertRaises(ValueError):
            apriori_bound_check(1, (10., 100.))


class TestLyapunov(TestCase):
    def test_positive_exponent(self):
        report = lyapunov_exponent(10., 2000, 2, RngStreamSpec(5), workers=1)
        self.assertGreater(report.lambda1.mean, 1.)
        self.assertEqual(report.n_orbits, 2)

    def test_needs_long_orbits(self):
        with self.assertRaises(ValueError):
            lyapunov_exponent(10., 100, 2, RngStreamSpec(5))


class TestCorrelations(TestCase):
    def test_initial_values(self):
        grid = GridSpec(32)
        same = correlation_decay(4 * math.pi, (1, 0), (-1, 0), 3, 2, grid=grid, stream=RngStreamSpec(6), workers=1)
        self.assertEqual(same.values.shape, (4,))
        self.assertAlmostEqual(same.values[0], 1.)
        self.assertLess(same.values[-1], 1.)
        other = correlation_decay(4 * math.pi, (1, 0), (0, 1), 1, 1, grid=grid, stream=RngStreamSpec(6), workers=1)
        self.assertEqual(other.values[0], 0.)
        with self.assertRaises(ValueError):
            correlation_decay(4 * math.pi, (0, 0), (1, 0), 1, 1)

    def test_duality_with_pullback(self):
        table = duality_gap(4 * math.pi, (((1, 0), (-1, 0)), ((1, 0), (0, -1))), n_max=1, realizations=1,
                            stream=RngStreamSpec(12))
        self.assertEqual(len(table), 4)
        self.assertLessEqual(table["gap"].max(), 1e-9)
        self.assertGreater(table.loc[table["n"] == 1, "spectral"].min(), 1e-6)


class TestFits(TestCase):
    def test_exponential_rate(self):
        n = np.arange(20)
        rate, r_squared = fit_exponential_rate(np.exp(-0.3 * n))
        self.assertAlmostEqual(rate, 0.3)
        self.assertAlmostEqual(r_squared, 1.)
        rate, _ = fit_exponential_rate(np.stack([n + 5, 2. * np.exp(-0.1 * n)], axis=1))
        self.assertAlmostEqual(rate, 0.1)
        self.assertEqual(fit_exponential_rate(np.ones(6)), (0., 1.))

    def test_fit_rejects(self):
        with self.assertRaises(ValueError):
            fit_exponential_rate([1., 0.5, 0.25])
        with self.assertRaises(ValueError):
            fit_exponential_rate([1., 0.5, 0., 0.25, 0.1])

    def test_prefactor(self):
        values = [1., 0.5, 0.1, 0.01, 0.001]
        self.assertEqual(crossing_time(values, 1.), 1)
        prefactor = empirical_prefactor({((1, 0), (1, 0)): values, ((3, 4), (0, 1)): np.zeros(5)}, 1.)
        self.assertAlmostEqual(prefactor.D_hat, math.e)
        self.assertEqual(prefactor.M0, 1.)
        self.assertEqual(prefactor.crossing_times[((3, 4), (0, 1))], 0)

    def test_estimate_from_samples(self):
        estimate = estimate_from_samples([1., 2., 3., 4.])
        self.assertAlmostEqual(estimate.mean, 2.5)
        self.assertAlmostEqual(estimate.std_error, math.sqrt(np.var([1., 2., 3., 4.], ddof=1) / 4))
