'''
  @ Date: 2026/10/18 19:40
'''
__version__ = "0.1.0"

from chirikov.torus import (TWO_PI, TorusPoint, PhasePair, TangentVector, Mat2, wrap, wrap_centered, torus_dist,
                            chirikov_step, chirikov_inverse, jacobian, lifted_step, lifted_orbit)
from chirikov.processes import (TwoPointState, ProjectiveState, iterate_one_point, propagate_one_point,
                                iterate_two_point, propagate_two_point, iterate_projective, derivative_cocycle)
from chirikov.utils.rng import RngStreamSpec, sample_phases
