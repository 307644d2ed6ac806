import collections

import numpy as np

from chirikov.estimators import contraction_estimate
from chirikov.model import get_model
from chirikov.utils.rng import uniform_angles


class PierreParams(collections.namedtuple("PierreParams", ["A"])):
    """Shear amplitude of the alternating sine-shear model."""
    __slots__ = ()

    def __new__(cls, A):
        if not A > 0 or not np.isfinite(A):
            raise ValueError("'A' must be a positive real; got {0}".format(A))
        return super(PierreParams, cls).__new__(cls, float(A))


def p_step(x, w, A, model="pierrehumbert"):
    """
    x1 <- x1 + A sin(x2 - w1), then x2 <- x2 + A sin(x1 - w2).
    :param model: vertical profile; 'chirikov' substitutes the linear profile on the same engine.
    """
    return get_model(model, PierreParams(A).A).step(x, w)


def p_inverse(x, w, A):
    return get_model("pierrehumbert", PierreParams(A).A).inverse(x, w)


def p_jacobian(x, w, A):
    """[[1, CH], [CV, 1 + CH CV]] with CH = A cos(x2 - w1), CV = A cos(x1 + A sin(x2 - w1) - w2)."""
    return get_model("pierrehumbert", PierreParams(A).A).jacobian(x, w)


def p_contraction_estimate(A, p, cfg, workers=None, verbose=False):
    """One-step (m = 1) Monte Carlo of E |D_x f_w v|^-p on the (x2, v) grid."""
    return contraction_estimate(PierreParams(A).A, p, cfg, m=1, model="pierrehumbert", workers=workers,
                                verbose=verbose)


def shear_marginals(A, samples, stream):
    """
    Samples of (CH, CV) at uniformly random (x, w); both should be distributed as A cos(U), U uniform.
    :return: two arrays of length samples
    """
    A = PierreParams(A).A
    shear = get_model("pierrehumbert", A)
    generator = stream.generator()
    x = uniform_angles(generator, (samples, 2))
    w = uniform_angles(generator, (samples, 2))
    _, ch, cv, _ = shear.jacobian_array(x, w)
    return ch, cv
