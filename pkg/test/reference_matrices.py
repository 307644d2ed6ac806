import math

import numpy as np


def one_point_phase_derivative(K):
    """D_w of one step at x = (0, 0), w = (0, 0)."""
    return np.array([[-K, 0.], [-K, -1.]])


def origin_jacobian(K):
    return np.array([[1., K], [1., 1. + K]])


def flip_jacobian(K):
    """Step with cos(x2 - w1) = -1."""
    return np.array([[1., -K], [1., 1. - K]])


def pierrehumbert_jacobian_at_origin(A):
    return np.array([[1., A], [A, 1. + A * A]])


def projective_phase_derivative(K):
    """D_w of two projective steps at x = (0, 0), v = (1, 0), w = ((0, 0), (pi/2, 0)); rows (x1, x2, v1, v2)."""
    s = 5. * math.sqrt(5.)
    return np.array([[-K, 0., 0., 0.],
                     [-2. * K, -1., 0., -1.],
                     [-2. * K * K / s, -2. * K / s, -2. * K / s, 0.],
                     [K * K / s, K / s, K / s, 0.]])


def two_point_phase_derivative(K):
    """D_w of three two-point steps at x = (0, 0), y = (pi, pi), zero phases; rows (x1, x2, y1, y2)."""
    return np.array([[-K * (K * K + 3. * K + 1.), -K * (K + 2.), -K * (K + 1.), -K, -K, 0.],
                     [-K * (K * K + 4. * K + 3.), -K * K - 3. * K - 1., -K * (K + 2.), -K - 1., -K, -1.],
                     [-K * (K * K + K - 1.), K * K, (K - 1.) * K, K, K, 0.],
                     [-K * (K * K - 3.), K * K - K - 1., (K - 2.) * K, K - 1., K, -1.]])


def surjectivity_phase_derivative(K):
    """D_w of four one-point steps at the surjectivity point."""
    return np.array([[K, 0., 0., 0., 0., 0., 0., 0.],
                     [4. * K, -1., 0., -1., 0., -1., 0., -1.]])


def surjectivity_kernel():
    """Kernel basis of surjectivity_phase_derivative with unit free coordinates."""
    basis = np.zeros((8, 6))
    basis[2:, :] = np.eye(6)
    basis[1, [1, 3, 5]] = -1.
    return basis


def cocycle_phase_derivative(K):
    """D_w of the four-step cocycle, flattened row-major to (a, b, c, d)."""
    return np.array([
        [-14. * K * K, 6. * K, K, 5. * K, 2. * K, 3. * K, 3. * K, 0.],
        [2. * K * K * (7. * K - 3.), 3. * K * (1. - 2. * K), K * (1. - K), K * (2. - 5. * K), K * (1. - 2. * K),
         K * (1. - 3. * K), K * (1. - 3. * K), 0.],
        [-20. * K * K, 10. * K, 3. * K, 7. * K, 4. * K, 3. * K, 3. * K, 0.],
        [10. * K * K * (2. * K - 1.), 2. * K * (3. - 5. * K), 3. * K * (1. - K), K * (3. - 7. * K),
         2. * K * (1. - 2. * K), K * (1. - 3. * K), K * (1. - 3. * K), 0.]])


def cocycle_kernel_product(K):
    return np.array([
        [K, -K, 2. * K, -3. * K, 3. * K, -6. * K],
        [K * (1. - K), K * (K - 1.), K * (1. - 2. * K), K * (3. * K - 2.), K * (1. - 3. * K), 3. * K * (2. * K - 1.)],
        [3. * K, -3. * K, 4. * K, -7. * K, 3. * K, -10. * K],
        [3. * K * (1. - K), 3. * K * (K - 1.), 2. * K * (1. - 2. * K), K * (7. * K - 5.), K * (1. - 3. * K),
         2. * K * (5. * K - 3.)]])
