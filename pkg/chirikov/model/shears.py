import numpy as np

from chirikov.torus import (TorusPoint, Mat2, LINEAR_PROFILE, SINE_PROFILE, check_kick, wrap_array,
                            _horizontal, _vertical, _inverse, _jacobian)


def _as_array(values):
    # complex inputs pass through for complex-step derivatives
    values = np.asarray(values)
    return values.astype(complex if np.iscomplexobj(values) else float)


class ShearModel(object):
    """
    Alternating horizontal/vertical shear map of the torus.
    The horizontal shear is always x1 + A sin(x2 - w1); the vertical profile is either the Chirikov
    x1 - w2 or the sine profile A sin(x1 - w2).
    """

    def __init__(self, name, amplitude, profile=LINEAR_PROFILE):
        if profile not in (LINEAR_PROFILE, SINE_PROFILE):
            raise ValueError("'profile' must be LINEAR_PROFILE or SINE_PROFILE; got {0}".format(profile))
        self.name = name
        self.amplitude = check_kick(amplitude, name="amplitude")
        self.profile = profile

    def __repr__(self):
        return "ShearModel(name={0!r}, amplitude={1!r})".format(self.name, self.amplitude)

    def horizontal(self, x, w1):
        return TorusPoint(*_horizontal(float(x[0]), float(x[1]), float(w1), self.amplitude))

    def vertical(self, x, w2):
        return TorusPoint(*_vertical(float(x[0]), float(x[1]), float(w2), self.amplitude, self.profile))

    def step(self, x, w):
        return self.vertical(self.horizontal(x, w[0]), w[1])

    def inverse(self, x, w):
        return TorusPoint(*_inverse(float(x[0]), float(x[1]), float(w[0]), float(w[1]), self.amplitude,
                                    self.profile))

    def jacobian(self, x, w):
        return Mat2(*_jacobian(float(x[0]), float(x[1]), float(w[0]), float(w[1]), self.amplitude, self.profile))

    def vertical_displacement(self, x1, w2):
        if self.profile == LINEAR_PROFILE:
            return x1 - w2
        return self.amplitude * np.sin(x1 - w2)

    def vertical_slope(self, x1, w2):
        if self.profile == LINEAR_PROFILE:
            return np.ones_like(_as_array(x1))
        return self.amplitude * np.cos(x1 - w2)

    def step_array(self, x, w):
        """Vectorized wrapped step; x and w are (..., 2) arrays."""
        x = np.asarray(x, dtype=float)
        w = np.asarray(w, dtype=float)
        x1 = wrap_array(x[..., 0] + self.amplitude * np.sin(x[..., 1] - w[..., 0]))
        x2 = wrap_array(x[..., 1] + self.vertical_displacement(x1, w[..., 1]))
        return np.stack([x1, x2], axis=-1)

    def lifted_step(self, x, w):
        x = _as_array(x)
        w = _as_array(w)
        x1 = x[..., 0] + self.amplitude * np.sin(x[..., 1] - w[..., 0])
        x2 = x[..., 1] + self.vertical_displacement(x1, w[..., 1])
        return np.stack([x1, x2], axis=-1)

    def jacobian_array(self, x, w):
        """Entries (a, b, c, d) of the one-step Jacobian, broadcast over (..., 2) inputs."""
        x = _as_array(x)
        w = _as_array(w)
        ch = self.amplitude * np.cos(x[..., 1] - w[..., 0])
        cv = self.vertical_slope(x[..., 0] + self.amplitude * np.sin(x[..., 1] - w[..., 0]), w[..., 1])
        return np.ones_like(ch), ch, cv, 1. + ch * cv

    def phase_derivative_array(self, x, w):
        """Columns d(step)/dw1 and d(step)/dw2 of the lifted step, each as (dx1, dx2)."""
        x = _as_array(x)
        w = _as_array(w)
        ch = self.amplitude * np.cos(x[..., 1] - w[..., 0])
        cv = self.vertical_slope(x[..., 0] + self.amplitude * np.sin(x[..., 1] - w[..., 0]), w[..., 1])
        return (-ch, -cv * ch), (np.zeros_like(cv), -cv)
