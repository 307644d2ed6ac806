import math
from unittest import TestCase

import numpy as np

from chirikov.torus import torus_dist, chirikov_step
from chirikov.utils.rng import RngStreamSpec
from chirikov.estimators import mc_config
from chirikov.model.pierrehumbert import (PierreParams, p_step, p_inverse, p_jacobian, p_contraction_estimate,
                                          shear_marginals)

from test.reference_matrices import pierrehumbert_jacobian_at_origin


class TestPierrehumbert(TestCase):
    def test_step(self):
        x = p_step((math.pi / 2, 0.), (0., 0.), 1.)
        self.assertAlmostEqual(x.x1, math.pi / 2)
        self.assertAlmostEqual(x.x2, 1.)

    def test_chirikov_profile_on_same_engine(self):
        x, w = (0.4, 2.), (1., 0.3)
        self.assertEqual(p_step(x, w, 5., model="chirikov"), chirikov_step(x, w, 5.))

    def test_inverse(self):
        x, w = (0.4, 2.), (1., 0.3)
        self.assertLess(torus_dist(p_inverse(p_step(x, w, 7.), w, 7.), x), 1e-10)

    def test_jacobian(self):
        np.testing.assert_allclose(p_jacobian((0., 0.), (0., 0.), 3.).to_array(), pierrehumbert_jacobian_at_origin(3.))
        self.assertAlmostEqual(p_jacobian((0.4, 2.), (1., 0.3), 3.).det(), 1.)

    def test_params(self):
        with self.assertRaises(ValueError):
            PierreParams(0.)
        with self.assertRaises(ValueError):
            p_step((0., 0.), (0., 0.), -1.)

    def test_marginals_match_scaled_cosine(self):
        ch, cv = shear_marginals(10., 20000, RngStreamSpec(8))
        for values in (ch, cv):
            self.assertLessEqual(np.max(np.abs(values)), 10.)
            self.assertAlmostEqual(np.mean(values ** 2), 50., delta=2.)
            self.assertAlmostEqual(np.mean(values), 0., delta=0.3)

    def test_one_step_contraction(self):
        report = p_contraction_estimate(100., 0.25, mc_config(2000, RngStreamSpec(12), grid_x=2, grid_v=2),
                                        workers=1)
        self.assertEqual(report.m, 1)
        self.assertEqual(report.model, "pierrehumbert")
        self.assertLess(report.worst_estimate.mean, 0.5)
