'''
  @ Date: 2026/10/18 19:05
'''
import collections
import math
import warnings

import numba as nb
import numpy as np

from chirikov.model import get_model
from chirikov.torus import (TorusPoint, TangentVector, Mat2, torus_dist, torus_dist_array, is_unit,
                            _step, _jacobian, _orbit, _endpoint)
from chirikov.utils.rng import RngStreamSpec, sample_phases

MAX_COCYCLE_STEPS = 60
UNDERFLOW_SEPARATION = 1e-300


class TwoPointState(collections.namedtuple("TwoPointState", ["x", "y"])):
    """Pair of distinct torus points driven by common phases."""
    __slots__ = ()

    def __new__(cls, x, y):
        x, y = TorusPoint(*x), TorusPoint(*y)
        if not torus_dist(x, y) > 0.:
            raise ValueError("TwoPointState must be off-diagonal; got x = y = {0}".format(tuple(x)))
        return super(TwoPointState, cls).__new__(cls, x, y)

    def separation(self):
        return torus_dist(self.x, self.y)


class ProjectiveState(collections.namedtuple("ProjectiveState", ["x", "v"])):
    """Torus point with a unit tangent direction."""
    __slots__ = ()

    def __new__(cls, x, v):
        v = TangentVector(float(v[0]), float(v[1]))
        if not is_unit(v):
            raise ValueError("ProjectiveState requires |v| = 1 within 1e-12; got |v| = {0}".format(
                math.hypot(v.v1, v.v2)))
        return super(ProjectiveState, cls).__new__(cls, TorusPoint(*x), v)


CocycleAccumulator = collections.namedtuple("CocycleAccumulator", ["x", "v", "log_norm_sum"])


def as_phases(phases):
    """Coerce a phase sequence (list of PhasePair or array) into a contiguous (n, 2) float array."""
    phases = np.asarray(phases, dtype=float)
    if phases.size == 0:
        return np.zeros((0, 2))
    if phases.ndim != 2 or phases.shape[1] != 2:
        raise ValueError("'phases' must have shape (n, 2); got {0}".format(phases.shape))
    return np.ascontiguousarray(phases)


@nb.njit(cache=True)
def _projective_orbit(x1, x2, v1, v2, phases, amplitude, profile):
    log_sum = 0.
    for i in range(phases.shape[0]):
        a, b, c, d = _jacobian(x1, x2, phases[i, 0], phases[i, 1], amplitude, profile)
        u1 = a * v1 + b * v2
        u2 = c * v1 + d * v2
        norm = math.hypot(u1, u2)
        if norm < 1e-300:
            return x1, x2, v1, v2, log_sum, False
        log_sum += math.log(norm)
        v1 = u1 / norm
        v2 = u2 / norm
        x1, x2 = _step(x1, x2, phases[i, 0], phases[i, 1], amplitude, profile)
    return x1, x2, v1, v2, log_sum, True


def iterate_one_point(x, phases, K, model="chirikov"):
    """
    Trajectory f_{w_i} o ... o f_{w_1}(x) for i = 0..n.
    :param x: initial TorusPoint.
    :param phases: (n, 2) phases; row i is applied at step i (newest phase applied last).
    :param K: kick strength (shear amplitude for other models).
    :return: list of n + 1 TorusPoints.
    """
    shear = get_model(model, K)
    x = TorusPoint(*x)
    trajectory = _orbit(x.x1, x.x2, as_phases(phases), shear.amplitude, shear.profile)
    return [TorusPoint(x1, x2) for x1, x2 in trajectory]


def propagate_one_point(x, phases, K, model="chirikov"):
    shear = get_model(model, K)
    x = TorusPoint(*x)
    return TorusPoint(*_endpoint(x.x1, x.x2, as_phases(phases), shear.amplitude, shear.profile))


def _check_separation(separations):
    smallest = float(np.min(separations))
    if smallest < UNDERFLOW_SEPARATION:
        warnings.warn(RuntimeWarning("two-point separation underflowed to {0:.3e}".format(smallest)))


def iterate_two_point(z, phases, K, model="chirikov"):
    """Both components driven by the same phases; returns the n + 1 two-point iterates."""
    shear = get_model(model, K)
    phases = as_phases(phases)
    z = TwoPointState(*z)
    xs = _orbit(z.x.x1, z.x.x2, phases, shear.amplitude, shear.profile)
    ys = _orbit(z.y.x1, z.y.x2, phases, shear.amplitude, shear.profile)
    _check_separation(torus_dist_array(xs, ys))
    return [TwoPointState._make((TorusPoint(*x), TorusPoint(*y))) for x, y in zip(xs, ys)]


def propagate_two_point(z, phases, K, model="chirikov"):
    """Final two-point state only; same arithmetic as iterate_two_point."""
    shear = get_model(model, K)
    phases = as_phases(phases)
    x = _endpoint(float(z[0][0]), float(z[0][1]), phases, shear.amplitude, shear.profile)
    y = _endpoint(float(z[1][0]), float(z[1][1]), phases, shear.amplitude, shear.profile)
    separation = torus_dist(x, y)
    if separation < UNDERFLOW_SEPARATION:
        _check_separation([separation])
    return TwoPointState._make((TorusPoint(*x), TorusPoint(*y)))


def log_norm_growth(x, v, phases, K, model="chirikov"):
    """
    Renormalized tangent dynamics.
    :return: (final ProjectiveState, sum of log |D v_i|) over the phases.
    """
    shear = get_model(model, K)
    x = TorusPoint(*x)
    if not is_unit(v):
        raise ValueError("'v' must be a unit vector; got |v| = {0}".format(math.hypot(v[0], v[1])))
    x1, x2, v1, v2, log_sum, ok = _projective_orbit(x.x1, x.x2, float(v[0]), float(v[1]), as_phases(phases),
                                                     shear.amplitude, shear.profile)
    if not ok:
        raise ArithmeticError("projective step degenerated: |D_x f v| < 1e-300")
    return ProjectiveState((x1, x2), (v1, v2)), log_sum


def iterate_projective(s, phases, K, model="chirikov"):
    return log_norm_growth(s[0], s[1], phases, K, model=model)[0]


def accumulate(acc, phases, K, model="chirikov"):
    """Advance a CocycleAccumulator by a block of phases."""
    state, log_sum = log_norm_growth(acc.x, acc.v, phases, K, model=model)
    return CocycleAccumulator(state.x, state.v, acc.log_norm_sum + log_sum)


def derivative_cocycle(x, phases, K, model="chirikov"):
    """
    Ordered product D f_{w_n} ... D f_{w_1} along the trajectory of x.
    Products longer than MAX_COCYCLE_STEPS are refused; use log_norm_growth instead.
    """
    phases = as_phases(phases)
    if len(phases) > MAX_COCYCLE_STEPS:
        raise ValueError("derivative_cocycle refuses products longer than {0} steps; got {1}".format(
            MAX_COCYCLE_STEPS, len(phases)))
    shear = get_model(model, K)
    product = Mat2.identity()
    x = TorusPoint(*x)
    for w in phases:
        product = shear.jacobian(x, w).dot(product)
        x = shear.step(x, w)
    return product


__all__ = ["TwoPointState", "ProjectiveState", "CocycleAccumulator", "as_phases", "sample_phases",
           "iterate_one_point", "propagate_one_point", "iterate_two_point", "propagate_two_point",
           "iterate_projective", "log_norm_growth", "accumulate", "derivative_cocycle", "RngStreamSpec"]
