import math
from unittest import TestCase

import numpy as np

from chirikov.torus import (TWO_PI, TorusPoint, PhasePair, Mat2, wrap, wrap_centered, wrap_array, torus_dist,
                            torus_dist_array, chirikov_step, chirikov_inverse, horizontal_step, vertical_step,
                            jacobian, lifted_step, lifted_orbit, check_kick, unit_vector, LINEAR_PROFILE,
                            _round_trip_errors)


class TestTorus(TestCase):
    def test_wrap_is_canonical(self):
        self.assertEqual(wrap(TWO_PI), 0.)
        self.assertEqual(wrap(-1e-20), 0.)
        self.assertAlmostEqual(wrap(-math.pi / 2), 3 * math.pi / 2)
        self.assertAlmostEqual(wrap(7 * math.pi), math.pi)
        values = wrap_array([-TWO_PI, 0., TWO_PI * 3 + 1.])
        self.assertTrue(np.all((values >= 0) & (values < TWO_PI)))
        self.assertAlmostEqual(values[2], 1.)

    def test_compiled_wrap_on_negative_input(self):
        from chirikov.torus import _wrap
        for value in (-1e-20, -0.5, -TWO_PI, -7 * TWO_PI - 1., -1e6):
            wrapped = _wrap(value)
            self.assertTrue(0. <= wrapped < TWO_PI)
            self.assertAlmostEqual(math.cos(wrapped), math.cos(value), delta=1e-9)
        self.assertAlmostEqual(_wrap(-0.5), TWO_PI - 0.5)

    def test_wrap_centered(self):
        self.assertAlmostEqual(wrap_centered(3 * math.pi / 2), -math.pi / 2)
        self.assertAlmostEqual(wrap_centered(math.pi), math.pi)

    def test_points_are_canonical(self):
        x = TorusPoint(-1., 8.)
        self.assertAlmostEqual(x.x1, TWO_PI - 1.)
        self.assertAlmostEqual(x.x2, 8. - TWO_PI)
        w = PhasePair(TWO_PI, -TWO_PI)
        self.assertEqual(tuple(w), (0., 0.))

    def test_distance_uses_nearest_lift(self):
        self.assertAlmostEqual(torus_dist((0.1, 0.), (TWO_PI - 0.1, 0.)), 0.2)
        self.assertAlmostEqual(torus_dist((0., 0.), (math.pi, math.pi)), math.sqrt(2) * math.pi)
        self.assertEqual(torus_dist((1., 2.), (1., 2.)), 0.)
        p = np.array([[0.1, 0.], [0., 0.]])
        q = np.array([[TWO_PI - 0.1, 0.], [math.pi, 0.]])
        np.testing.assert_allclose(torus_dist_array(p, q), [0.2, math.pi])

    def test_step_composition(self):
        x, w, K = TorusPoint(1., 2.), PhasePair(0.3, 0.7), 5.
        expected = vertical_step(horizontal_step(x, w.w1, K), w.w2)
        self.assertEqual(chirikov_step(x, w, K), expected)
        x1 = wrap(1. + K * math.sin(2. - 0.3))
        self.assertAlmostEqual(expected.x1, x1)
        self.assertAlmostEqual(expected.x2, wrap(2. + x1 - 0.7))

    def test_fixed_point_at_zero_phases(self):
        for K in (0.5, 10., 100.):
            self.assertEqual(tuple(chirikov_step((0., 0.), (0., 0.), K)), (0., 0.))
            self.assertLess(torus_dist(chirikov_step((0., math.pi), (0., 0.), K), (0., math.pi)), 1e-12)

    def test_inverse(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            x = TorusPoint(*rng.uniform(0, TWO_PI, 2))
            w = PhasePair(*rng.uniform(0, TWO_PI, 2))
            K = rng.uniform(0.1, 50.)
            self.assertLess(torus_dist(chirikov_inverse(chirikov_step(x, w, K), w, K), x), 1e-9)
            self.assertLess(torus_dist(chirikov_step(chirikov_inverse(x, w, K), w, K), x), 1e-9)

    def test_batched_round_trip(self):
        rng = np.random.default_rng(2024)
        count = 10 ** 6
        for K in (4 * math.pi, 100.):
            det_error, distance = _round_trip_errors(rng.uniform(0, TWO_PI, (count, 2)),
                                                     rng.uniform(0, TWO_PI, (count, 2)), np.full(count, K),
                                                     LINEAR_PROFILE)
            self.assertEqual(det_error.shape, (count,))
            self.assertLessEqual(det_error.max(), 1e-12)
            self.assertLessEqual(distance.max(), 1e-12)

    def test_jacobian_is_area_preserving(self):
        J = jacobian((0.4, 1.3), (0.2, 2.), 7.)
        c = 7. * math.cos(1.3 - 0.2)
        np.testing.assert_allclose(J.to_array(), [[1., c], [1., 1. + c]])
        self.assertAlmostEqual(J.det(), 1.)

    def test_jacobian_at_origin(self):
        np.testing.assert_allclose(jacobian((0., 0.), (0., 0.), 10.).to_array(), [[1., 10.], [1., 11.]])

    def test_jacobian_matches_finite_difference(self):
        x, w, K, h = np.array([0.4, 1.3]), np.array([0.2, 2.]), 3., 1e-6
        J = jacobian(x, w, K).to_array()
        for axis in range(2):
            shift = np.zeros(2)
            shift[axis] = h
            column = (lifted_step(x + shift, w, K) - lifted_step(x - shift, w, K)) / (2 * h)
            np.testing.assert_allclose(column, J[:, axis], atol=1e-6)

    def test_lifted_orbit_wraps_to_step(self):
        phases = np.array([[0.1, 0.2], [1.5, 3.], [2.5, 0.4]])
        x = TorusPoint(0.3, 4.)
        for w in phases:
            x = chirikov_step(x, w, 4.)
        lifted = lifted_orbit([0.3, 4.], phases, 4.)
        self.assertLess(torus_dist(lifted, x), 1e-10)

    def test_mat2(self):
        A = Mat2(1., 2., 3., 4.)
        np.testing.assert_allclose(A.dot(Mat2.identity()).to_array(), A.to_array())
        self.assertAlmostEqual(A.det(), -2.)
        self.assertEqual(tuple(A.apply((1., 1.))), (3., 7.))
        self.assertEqual(Mat2.from_array([[1., 2.], [3., 4.]]), A)

    def test_rejects_bad_kick(self):
        for K in (0., -1., float("nan"), float("inf")):
            with self.assertRaises(ValueError):
                check_kick(K)
        with self.assertRaises(ValueError):
            unit_vector(0., 0.)
