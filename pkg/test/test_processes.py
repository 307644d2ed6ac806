import math
import warnings
from unittest import TestCase

import numpy as np

from chirikov.torus import TorusPoint, torus_dist, chirikov_step, jacobian
from chirikov.processes import (TwoPointState, ProjectiveState, CocycleAccumulator, as_phases, iterate_one_point,
                                propagate_one_point, iterate_two_point, propagate_two_point, iterate_projective,
                                log_norm_growth, accumulate, derivative_cocycle, MAX_COCYCLE_STEPS)
from chirikov.utils.rng import RngStreamSpec, sample_phases


class TestProcesses(TestCase):
    def setUp(self):
        self.K = 6.
        self.phases = sample_phases(RngStreamSpec(11), 20)

    def test_one_point_trajectory(self):
        trajectory = iterate_one_point((0.5, 1.), self.phases, self.K)
        self.assertEqual(len(trajectory), 21)
        x = TorusPoint(0.5, 1.)
        for w, point in zip(self.phases, trajectory[1:]):
            x = chirikov_step(x, w, self.K)
            self.assertLess(torus_dist(x, point), 1e-12)
        self.assertLess(torus_dist(propagate_one_point((0.5, 1.), self.phases, self.K), trajectory[-1]), 1e-12)

    def test_empty_phases(self):
        self.assertEqual(as_phases([]).shape, (0, 2))
        self.assertEqual(iterate_one_point((1., 1.), [], self.K), [TorusPoint(1., 1.)])
        with self.assertRaises(ValueError):
            as_phases(np.zeros((3, 3)))

    def test_two_point_matches_componentwise(self):
        z = TwoPointState((0.5, 1.), (2., 3.))
        states = iterate_two_point(z, self.phases, self.K)
        self.assertEqual(len(states), 21)
        final = propagate_two_point(z, self.phases, self.K)
        self.assertLess(torus_dist(final.x, propagate_one_point(z.x, self.phases, self.K)), 1e-12)
        self.assertLess(torus_dist(final.y, propagate_one_point(z.y, self.phases, self.K)), 1e-12)
        self.assertEqual(states[-1], final)

    def test_two_point_rejects_diagonal(self):
        with self.assertRaises(ValueError):
            TwoPointState((1., 1.), (1., 1.))

    def test_two_point_warns_on_underflow(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            z = TwoPointState((0., 0.), (0., 1e-310))
            propagate_two_point(z, np.zeros((1, 2)), self.K)
        self.assertTrue(any(issubclass(item.category, RuntimeWarning) for item in caught))

    def test_projective_requires_unit_vector(self):
        with self.assertRaises(ValueError):
            ProjectiveState((0., 0.), (1., 1.))
        s = ProjectiveState((0., 0.), (1. / math.sqrt(2), 1. / math.sqrt(2)))
        self.assertAlmostEqual(math.hypot(*s.v), 1.)

    def test_log_norm_growth_matches_cocycle(self):
        phases = self.phases[:10]
        v = (0.6, 0.8)
        state, log_sum = log_norm_growth((0.5, 1.), v, phases, self.K)
        product = derivative_cocycle((0.5, 1.), phases, self.K)
        image = product.apply(v)
        self.assertAlmostEqual(log_sum, math.log(math.hypot(*image)), places=8)
        norm = math.hypot(*image)
        self.assertAlmostEqual(state.v.v1, image.v1 / norm, places=10)
        self.assertAlmostEqual(state.v.v2, image.v2 / norm, places=10)
        self.assertEqual(iterate_projective(ProjectiveState((0.5, 1.), v), phases, self.K), state)

    def test_cocycle_is_ordered_product(self):
        phases = self.phases[:2]
        x1 = chirikov_step((0.5, 1.), phases[0], self.K)
        expected = jacobian(x1, phases[1], self.K).dot(jacobian((0.5, 1.), phases[0], self.K))
        np.testing.assert_allclose(derivative_cocycle((0.5, 1.), phases, self.K).to_array(), expected.to_array())
        self.assertAlmostEqual(derivative_cocycle((0.5, 1.), phases, self.K).det(), 1., places=10)

    def test_cocycle_refuses_long_products(self):
        with self.assertRaises(ValueError):
            derivative_cocycle((0., 0.), np.zeros((MAX_COCYCLE_STEPS + 1, 2)), self.K)

    def test_accumulate_in_blocks(self):
        acc = CocycleAccumulator(TorusPoint(0.5, 1.), (1., 0.), 0.)
        acc = accumulate(acc, self.phases[:7], self.K)
        acc = accumulate(acc, self.phases[7:], self.K)
        _, total = log_norm_growth((0.5, 1.), (1., 0.), self.phases, self.K)
        self.assertAlmostEqual(acc.log_norm_sum, total, places=9)

    def test_pierrehumbert_model(self):
        x = propagate_one_point((math.pi / 2, 0.), np.zeros((1, 2)), 1., model="pierrehumbert")
        self.assertAlmostEqual(x.x1, math.pi / 2)
        self.assertAlmostEqual(x.x2, 1.)
        with self.assertRaises(ValueError):
            propagate_one_point((0., 0.), np.zeros((1, 2)), 1., model="unknown")
