'''
  @ Date: 2026/10/18 18:30
'''
import collections
import math

import numba as nb
import numpy as np

TWO_PI = 2. * math.pi

# vertical shear profiles understood by the kernels
LINEAR_PROFILE = 0
SINE_PROFILE = 1


@nb.njit(cache=True)
def _wrap(value):
    # floored modulo: non-negative for a positive divisor, but may round up to TWO_PI
    remainder = value % TWO_PI
    if remainder >= TWO_PI:
        remainder = 0.
    return remainder


@nb.njit(cache=True)
def _wrap_centered(value):
    remainder = _wrap(value)
    if remainder > math.pi:
        remainder -= TWO_PI
    return remainder


@nb.njit(cache=True)
def _horizontal(x1, x2, w1, amplitude):
    return _wrap(x1 + amplitude * math.sin(x2 - w1)), x2


@nb.njit(cache=True)
def _vertical(x1, x2, w2, amplitude, profile):
    if profile == LINEAR_PROFILE:
        return x1, _wrap(x2 + (x1 - w2))
    return x1, _wrap(x2 + amplitude * math.sin(x1 - w2))


@nb.njit(cache=True)
def _step(x1, x2, w1, w2, amplitude, profile):
    h1, h2 = _horizontal(x1, x2, w1, amplitude)
    return _vertical(h1, h2, w2, amplitude, profile)


@nb.njit(cache=True)
def _inverse(x1, x2, w1, w2, amplitude, profile):
    if profile == LINEAR_PROFILE:
        u2 = _wrap(x2 - x1 + w2)
    else:
        u2 = _wrap(x2 - amplitude * math.sin(x1 - w2))
    return _wrap(x1 - amplitude * math.sin(u2 - w1)), u2


@nb.njit(cache=True)
def _jacobian(x1, x2, w1, w2, amplitude, profile):
    """Entries (a, b, c, d) of [[1, CH], [CV, 1 + CH CV]]."""
    ch = amplitude * math.cos(x2 - w1)
    if profile == LINEAR_PROFILE:
        cv = 1.
    else:
        cv = amplitude * math.cos(x1 + amplitude * math.sin(x2 - w1) - w2)
    return 1., ch, cv, 1. + ch * cv


@nb.njit(cache=True)
def _orbit(x1, x2, phases, amplitude, profile):
    n = phases.shape[0]
    trajectory = np.empty((n + 1, 2))
    trajectory[0, 0] = x1
    trajectory[0, 1] = x2
    for i in range(n):
        x1, x2 = _step(x1, x2, phases[i, 0], phases[i, 1], amplitude, profile)
        trajectory[i + 1, 0] = x1
        trajectory[i + 1, 1] = x2
    return trajectory


@nb.njit(cache=True)
def _endpoint(x1, x2, phases, amplitude, profile):
    for i in range(phases.shape[0]):
        x1, x2 = _step(x1, x2, phases[i, 0], phases[i, 1], amplitude, profile)
    return x1, x2


@nb.njit(cache=True)
def _backward_endpoint(x1, x2, phases, amplitude, profile):
    for i in range(phases.shape[0] - 1, -1, -1):
        x1, x2 = _inverse(x1, x2, phases[i, 0], phases[i, 1], amplitude, profile)
    return x1, x2


@nb.njit(cache=True)
def _round_trip_errors(points, phases, amplitudes, profile):
    """Per sample |det J - 1| and the torus distance between x and inverse(step(x))."""
    count = points.shape[0]
    det_error = np.empty(count)
    distance = np.empty(count)
    for i in range(count):
        x1, x2 = points[i, 0], points[i, 1]
        w1, w2 = phases[i, 0], phases[i, 1]
        a, b, c, d = _jacobian(x1, x2, w1, w2, amplitudes[i], profile)
        det_error[i] = abs(a * d - b * c - 1.)
        y1, y2 = _step(x1, x2, w1, w2, amplitudes[i], profile)
        z1, z2 = _inverse(y1, y2, w1, w2, amplitudes[i], profile)
        d1 = abs(z1 - x1)
        d2 = abs(z2 - x2)
        distance[i] = math.hypot(min(d1, TWO_PI - d1), min(d2, TWO_PI - d2))
    return det_error, distance


class TorusPoint(collections.namedtuple("TorusPoint", ["x1", "x2"])):
    """Point of the two-torus; both coordinates are kept canonical in [0, 2pi)."""
    __slots__ = ()

    def __new__(cls, x1, x2):
        return super(TorusPoint, cls).__new__(cls, _wrap(float(x1)), _wrap(float(x2)))


class PhasePair(collections.namedtuple("PhasePair", ["w1", "w2"])):
    """Random phase shifts of one period; canonical in [0, 2pi)."""
    __slots__ = ()

    def __new__(cls, w1, w2):
        return super(PhasePair, cls).__new__(cls, _wrap(float(w1)), _wrap(float(w2)))


TangentVector = collections.namedtuple("TangentVector", ["v1", "v2"])


class Mat2(collections.namedtuple("Mat2", ["a", "b", "c", "d"])):
    """Row-major 2x2 matrix [[a, b], [c, d]]."""
    __slots__ = ()

    @classmethod
    def identity(cls):
        return cls(1., 0., 0., 1.)

    @classmethod
    def from_array(cls, array):
        array = np.asarray(array, dtype=float)
        return cls(array[0, 0], array[0, 1], array[1, 0], array[1, 1])

    def det(self):
        return self.a * self.d - self.b * self.c

    def dot(self, other):
        return Mat2(self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d,
                    self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d)

    def apply(self, v):
        return TangentVector(self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1])

    def to_array(self):
        return np.array([[self.a, self.b], [self.c, self.d]])


def wrap(value):
    """Canonical representative of an angle in [0, 2pi)."""
    return _wrap(float(value))


def wrap_centered(value):
    """Representative of an angle in (-pi, pi]."""
    return _wrap_centered(float(value))


def wrap_array(values):
    values = np.mod(np.asarray(values, dtype=float), TWO_PI)
    values[values >= TWO_PI] = 0.
    return values


def check_kick(K, name="K"):
    if not K > 0 or not np.isfinite(K):
        raise ValueError("'{0}' must be a positive real; got {1}".format(name, K))
    return float(K)


def unit_vector(v1, v2):
    norm = math.hypot(v1, v2)
    if norm == 0.:
        raise ValueError("cannot normalize the zero tangent vector")
    return TangentVector(v1 / norm, v2 / norm)


def is_unit(v, tol=1e-12):
    return abs(math.hypot(v[0], v[1]) - 1.) <= tol


def torus_dist(p, q):
    """
    Euclidean distance between the nearest lifts of two torus points.
    Minimizing each coordinate displacement separately is the same as minimizing over the 3x3 lift neighbourhood,
    because canonical coordinates differ by less than 2pi.
    :param p: TorusPoint or pair of angles.
    :param q: TorusPoint or pair of angles.
    :return: distance in [0, sqrt(2) pi].
    """
    d1 = abs(_wrap(float(p[0])) - _wrap(float(q[0])))
    d2 = abs(_wrap(float(p[1])) - _wrap(float(q[1])))
    return math.hypot(min(d1, TWO_PI - d1), min(d2, TWO_PI - d2))


def torus_dist_array(p, q):
    """Vectorized torus_dist over (..., 2) arrays."""
    d = np.abs(wrap_array(p) - wrap_array(q))
    d = np.minimum(d, TWO_PI - d)
    return np.hypot(d[..., 0], d[..., 1])


def horizontal_step(x, w1, K):
    return TorusPoint(*_horizontal(float(x[0]), float(x[1]), float(w1), float(K)))


def vertical_step(x, w2):
    return TorusPoint(*_vertical(float(x[0]), float(x[1]), float(w2), 1., LINEAR_PROFILE))


def chirikov_step(x, w, K):
    return vertical_step(horizontal_step(x, w[0], K), w[1])


def chirikov_inverse(x, w, K):
    return TorusPoint(*_inverse(float(x[0]), float(x[1]), float(w[0]), float(w[1]), float(K), LINEAR_PROFILE))


def jacobian(x, w, K):
    """
    One-step Jacobian [[1, K c], [1, 1 + K c]] with c = cos(x2 - w1).
    :return: Mat2
    """
    return Mat2(*_jacobian(float(x[0]), float(x[1]), float(w[0]), float(w[1]), float(K), LINEAR_PROFILE))


def lifted_step(x, w, K):
    """Unwrapped step on the plane; accepts (..., 2) arrays for x and w."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    x1 = x[..., 0] + K * np.sin(x[..., 1] - w[..., 0])
    x2 = x[..., 1] + x1 - w[..., 1]
    return np.stack([x1, x2], axis=-1)


def lifted_orbit(x, phases, K):
    """Unwrapped endpoint of len(phases) steps; phases has shape (..., n, 2)."""
    x = np.asarray(x, dtype=float)
    phases = np.asarray(phases, dtype=float)
    for i in range(phases.shape[-2]):
        x = lifted_step(x, phases[..., i, :], K)
    return x
