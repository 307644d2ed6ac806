'''
  @ Date: 2026/10/18 20:10
'''
import collections
import math
import warnings
from functools import partial

import numpy as np
import pandas as pd
from scipy.special import jv

from chirikov.torus import TWO_PI, LINEAR_PROFILE, check_kick
from chirikov.model import MODELS
from chirikov.utils.rng import RngStreamSpec, sample_phases
from chirikov.utils.parallel import fan_out

NORMALIZATION = "fft2/n^2"
UNDERFLOW_NORM = 1e-280
RESOLUTION_FRACTION = 1e-8
MEAN_ZERO_TOL = 1e-12
BAND_MARGIN = 40


class GridSpec(collections.namedtuple("GridSpec", ["n", "dealias"])):
    """
    Square Fourier grid with n modes per axis, wavenumbers in numpy fft order (-n/2 .. n/2 - 1).
    With dealias set, sine shears are evaluated on a zero-padded physical grid wide enough to hold the
    whole Jacobi-Anger band, so no product ever aliases.
    """
    __slots__ = ()

    def __new__(cls, n=256, dealias=True):
        n = int(n)
        if n < 8 or n & (n - 1):
            raise ValueError("'n' must be a power of two no smaller than 8; got {0}".format(n))
        return super(GridSpec, cls).__new__(cls, n, bool(dealias))

    def wavenumbers(self):
        return np.rint(np.fft.fftfreq(self.n, 1. / self.n)).astype(np.int64)

    def index(self, k):
        half = self.n // 2
        if not -half <= k < half:
            raise ValueError("wavenumber {0} is outside the grid of {1} modes".format(k, self.n))
        return k % self.n

    def points(self):
        return TWO_PI * np.arange(self.n) / self.n


class SpectralField(object):
    """
    Fourier amplitudes rho_hat[k1, k2] of a scalar on the torus, normalized so that
    rho_hat_k = (2pi)^-2 * integral of rho * exp(-i k.x), i.e. numpy.fft.fft2 / n^2.
    Fields are treated as immutable; every operation returns a new field.
    """

    def __init__(self, grid, amplitudes, mean_zero=True):
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (grid.n, grid.n):
            raise ValueError("amplitudes must have shape ({0}, {0}); got {1}".format(grid.n, amplitudes.shape))
        self.grid = grid
        self.amplitudes = amplitudes
        self.mean_zero = mean_zero

    @classmethod
    def single_mode(cls, grid, k, amplitude=1.):
        amplitudes = np.zeros((grid.n, grid.n), dtype=np.complex128)
        amplitudes[grid.index(k[0]), grid.index(k[1])] = amplitude
        return cls(grid, amplitudes, mean_zero=tuple(k) != (0, 0))

    @classmethod
    def real_mode(cls, grid, k, amplitude=1.):
        """exp(i k.x) plus its complex conjugate."""
        field = cls.single_mode(grid, k, amplitude)
        field.amplitudes[grid.index(-k[0]), grid.index(-k[1])] += np.conj(amplitude)
        return field

    @classmethod
    def from_physical(cls, grid, values):
        amplitudes = np.fft.fft2(np.asarray(values)) / grid.n ** 2
        # the transform leaves rounding of order 1e-17 in the mean of a mean-zero field
        norm = math.sqrt(float(np.sum(np.abs(amplitudes) ** 2)))
        return cls(grid, amplitudes, mean_zero=abs(amplitudes[0, 0]) <= MEAN_ZERO_TOL * max(1., norm))

    def to_physical(self):
        return np.fft.ifft2(self.amplitudes) * self.grid.n ** 2

    def coefficient(self, k):
        return self.amplitudes[self.grid.index(k[0]), self.grid.index(k[1])]

    def l2_norm(self):
        return math.sqrt(float(np.sum(np.abs(self.amplitudes) ** 2)))

    def copy(self, amplitudes):
        return SpectralField(self.grid, amplitudes, mean_zero=self.mean_zero)

    def wavenumber_mesh(self):
        k = self.grid.wavenumbers()
        return np.meshgrid(k, k, indexing='ij')

    def resolution_fraction(self):
        """Share of the gradient energy sitting beyond 2/3 of the Nyquist wavenumber."""
        k1, k2 = self.wavenumber_mesh()
        energy = (k1 ** 2 + k2 ** 2) * np.abs(self.amplitudes) ** 2
        total = float(np.sum(energy))
        if total == 0.:
            return 0.
        outer = np.maximum(np.abs(k1), np.abs(k2)) > self.grid.n // 3
        return float(np.sum(energy[outer])) / total


def _padded_size(n, band):
    return int(2 ** math.ceil(math.log2(n + math.ceil(band) + BAND_MARGIN)))


def _sine_shear(amplitudes, grid, amplitude, phase):
    """
    Exact unit-time advection by the shear y_dual -> displacement A sin(y - phase) of the axis-0 variable.
    Axis 0 stays spectral (wavenumber k); axis 1 is taken to physical space, multiplied by
    exp(-i k A sin(y - phase)) and transformed back.
    """
    n = grid.n
    half = n // 2
    k = grid.wavenumbers()
    result = amplitudes.copy()
    active = np.any(amplitudes != 0, axis=1) & (k != 0)
    if amplitude == 0. or not active.any():
        return result
    rows = amplitudes[active]
    kr = k[active].astype(float)
    size = _padded_size(n, amplitude * np.max(np.abs(kr))) if grid.dealias else n
    padded = np.zeros((rows.shape[0], size), dtype=np.complex128)
    padded[:, :half] = rows[:, :half]
    padded[:, size - half:] = rows[:, half:]
    y = TWO_PI * np.arange(size) / size
    physical = np.fft.ifft(padded, axis=1) * size
    physical *= np.exp(-1j * amplitude * kr[:, np.newaxis] * np.sin(y[np.newaxis, :] - phase))
    spectrum = np.fft.fft(physical, axis=1) / size
    result[active] = np.concatenate([spectrum[:, :half], spectrum[:, size - half:]], axis=1)
    return result


def _linear_vertical(amplitudes, grid, w2, damping=None):
    """Mode map (k1, k2) -> (k1 - k2, k2) with phase exp(i k2 w2); modes leaving the box are dropped."""
    n = grid.n
    half = n // 2
    k = grid.wavenumbers()
    k1, k2 = np.meshgrid(k, k, indexing='ij')
    target = k1 - k2
    inside = (target >= -half) & (target < half)
    values = amplitudes * np.exp(1j * k2 * w2)
    if damping is not None:
        values = values * damping
    result = np.zeros_like(amplitudes)
    result[target[inside] % n, k2[inside] % n] = values[inside]
    return result


def apply_horizontal_shear(field, w1, K):
    """
    Unit-time advection rho(x1 - K sin(x2 - w1), x2).
    :param field: SpectralField.
    :param w1: horizontal phase.
    :param K: kick strength (zero allowed).
    :return: SpectralField
    """
    return field.copy(_sine_shear(field.amplitudes, field.grid, float(K), float(w1)))


def apply_vertical_shear(field, w2):
    """Unit-time advection rho(x1, x2 - (x1 - w2)), exact per mode."""
    return field.copy(_linear_vertical(field.amplitudes, field.grid, float(w2)))


def apply_sine_vertical_shear(field, w2, A):
    """Unit-time advection rho(x1, x2 - A sin(x1 - w2))."""
    return field.copy(_sine_shear(field.amplitudes.T, field.grid, float(A), float(w2)).T)


def apply_diffusion(field, nu, t):
    if nu < 0 or t < 0:
        raise ValueError("'nu' and 't' must be non-negative; got nu={0}, t={1}".format(nu, t))
    if nu == 0 or t == 0:
        return field.copy(field.amplitudes.copy())
    k1, k2 = field.wavenumber_mesh()
    return field.copy(field.amplitudes * np.exp(-nu * (k1 ** 2 + k2 ** 2) * t))


def _strang(field, shear, nu, substeps):
    tau = 1. / substeps
    for _ in range(substeps):
        field = apply_diffusion(field, nu, tau / 2.)
        field = shear(field, tau)
        field = apply_diffusion(field, nu, tau / 2.)
    return field


def step_period(field, w, K, nu=0., substeps=8, model="chirikov"):
    """
    One time-2 period: the horizontal interval, then the vertical interval.
    For nu > 0 each sine shear is Strang split with diffusion; the Chirikov linear vertical shear carries
    its exact Kelvin-mode damping exp(-nu (k1^2 - k1 k2 + 4 k2^2 / 3)).
    :param field: SpectralField.
    :param w: PhasePair of the period.
    :param K: kick strength (shear amplitude for the sine vertical profile).
    :param nu: diffusivity.
    :param substeps: Strang sub-intervals per unit interval.
    """
    if substeps < 1:
        raise ValueError("'substeps' must be at least 1; got {0}".format(substeps))
    if K < 0:
        raise ValueError("'K' must be non-negative; got {0}".format(K))
    w1, w2 = float(w[0]), float(w[1])
    linear = _is_linear(model)
    if nu == 0:
        field = apply_horizontal_shear(field, w1, K)
        if linear:
            return apply_vertical_shear(field, w2)
        return apply_sine_vertical_shear(field, w2, K)

    field = _strang(field, lambda f, tau: apply_horizontal_shear(f, w1, K * tau), nu, substeps)
    if linear:
        k1, k2 = field.wavenumber_mesh()
        damping = np.exp(-nu * (k1 ** 2 - k1 * k2 + 4. * k2 ** 2 / 3.))
        return field.copy(_linear_vertical(field.amplitudes, field.grid, w2, damping=damping))
    return _strang(field, lambda f, tau: apply_sine_vertical_shear(f, w2, K * tau), nu, substeps)


def _is_linear(model):
    if isinstance(model, str):
        if model not in MODELS:
            raise ValueError("'model' must be one of {0}; '{1}' is not recognized".format(sorted(MODELS), model))
        return MODELS[model] == LINEAR_PROFILE
    return model.profile == LINEAR_PROFILE


def sobolev_norm(field, s, negative=True):
    """
    Homogeneous Sobolev norm sqrt(sum_{k != 0} |k|^(-+2s) |rho_hat_k|^2).
    :param negative: True for the H^-s norm, False for H^s.
    """
    zero = abs(field.amplitudes[0, 0])
    if negative and s > 0 and zero > 1e-12 * max(field.l2_norm(), 1e-300):
        raise ValueError("negative Sobolev norms need a mean-zero field; mean mode is {0}".format(zero))
    k1, k2 = field.wavenumber_mesh()
    squared = (k1 ** 2 + k2 ** 2).astype(float)
    squared[0, 0] = 1.
    weight = squared ** (-s if negative else s)
    weight[0, 0] = 0.
    return math.sqrt(float(np.sum(weight * np.abs(field.amplitudes) ** 2)))


DecayExperiment = collections.namedtuple("DecayExperiment", ["K", "nu", "steps", "s", "negative", "realizations",
                                                             "stream", "model", "grid", "substeps", "initial_mode",
                                                             "window"])


def decay_experiment(K, nu=0., steps=200, s=1., negative=True, realizations=10, stream=None, model="chirikov",
                     grid=None, substeps=8, initial_mode=(1, 0), window=0.1):
    """Validated DecayExperiment with the repository defaults."""
    if nu < 0:
        raise ValueError("'nu' must be non-negative; got {0}".format(nu))
    if steps < 1:
        raise ValueError("'steps' must be at least 1; got {0}".format(steps))
    if realizations < 1:
        raise ValueError("'realizations' must be at least 1; got {0}".format(realizations))
    if not 0 <= window < 1:
        raise ValueError("'window' must lie in [0, 1); got {0}".format(window))
    if K != 0:
        check_kick(K)
    return DecayExperiment(float(K), float(nu), int(steps), float(s), bool(negative), int(realizations),
                           stream if stream is not None else RngStreamSpec(0), model,
                           grid if grid is not None else GridSpec(), int(substeps), tuple(initial_mode),
                           float(window))


DecayResult = collections.namedtuple("DecayResult", ["series", "rates", "resolution_limited", "truncated"])


def _decay_realization(cfg, realization):
    phases = sample_phases(cfg.stream.child(realization), cfg.steps)
    field = SpectralField.real_mode(cfg.grid, cfg.initial_mode)
    norms = [sobolev_norm(field, cfg.s, cfg.negative)]
    resolution_limited = False
    truncated = False
    for w in phases:
        field = step_period(field, w, cfg.K, nu=cfg.nu, substeps=cfg.substeps, model=cfg.model)
        norms.append(sobolev_norm(field, cfg.s, cfg.negative))
        if not resolution_limited and field.resolution_fraction() > RESOLUTION_FRACTION:
            resolution_limited = True
        if norms[-1] < UNDERFLOW_NORM:
            truncated = True
            break
    return np.array(norms), resolution_limited, truncated


def half_life(norms):
    """First (interpolated) period at which a norm series falls to half its initial value; inf if never."""
    norms = np.asarray(norms, dtype=float)
    below = np.nonzero(norms <= norms[0] / 2.)[0]
    if below.size == 0:
        return np.inf
    n = int(below[0])
    if n == 0:
        return 0.
    upper, lower = math.log(norms[n - 1]), math.log(norms[n])
    return n - 1 + (upper - math.log(norms[0] / 2.)) / (upper - lower)


def run_decay_experiment(cfg, workers=None, verbose=False):
    """
    Evolve a real single-mode scalar for cfg.steps periods per realization and fit the per-period decay rate.
    :param cfg: DecayExperiment (see decay_experiment).
    :return: DecayResult with the long-format norm table (realization, n, t, norm) and a rate table.
    """
    from chirikov.estimators import fit_exponential_rate

    outcomes = fan_out(partial(_decay_realization, cfg), range(cfg.realizations), workers=workers,
                       verbose=verbose, desc="decay")
    frames, rates, limited, truncated = [], [], [], []
    for realization, (norms, resolution_limited, was_truncated) in enumerate(outcomes):
        n = np.arange(norms.size)
        frames.append(pd.DataFrame({"realization": realization, "n": n, "t": 2. * n, "norm": norms}))
        start = int(math.floor(cfg.window * (norms.size - 1)))
        rate, r_squared = fit_exponential_rate(norms[start:], start=start)
        rates.append({"realization": realization, "rate": rate, "rate_per_time": rate / 2., "r_squared": r_squared,
                      "half_life": half_life(norms)})
        if resolution_limited:
            warnings.warn(RuntimeWarning("realization {0} became resolution-limited on a {1}^2 grid".format(
                realization, cfg.grid.n)))
            limited.append(realization)
        if was_truncated:
            warnings.warn(RuntimeWarning("realization {0} underflowed below {1:g}; series truncated".format(
                realization, UNDERFLOW_NORM)))
            truncated.append(realization)
        if verbose:
            print("realization {0}: rate {1:.4g} per period, R^2 {2:.4f}".format(realization, rate, r_squared))
    return DecayResult(pd.concat(frames, ignore_index=True), pd.DataFrame(rates), limited, truncated)


def shear_exactness(K=4., grid=None, w=(0.3, 0.7), nu=1e-2, substeps=(4, 8, 16)):
    """
    Exactness checks of the shear solvers on a band the grid holds (K <= 8 on 256 modes):
    the horizontal shear of e_(1,0) against the Jacobi-Anger coefficients J_j(K) e^(i j w1) at (1, -j),
    the vertical shear of e_(0,1) onto e_(-1,1) e^(i w2), L2 conservation of both shears, and the
    self-convergence ratio of the Strang split period under substep doubling.
    :return: DataFrame with columns check, value, target, tolerance, passed
    """
    grid = grid if grid is not None else GridSpec(256)
    w1, w2 = float(w[0]), float(w[1])
    half = grid.n // 2
    if K + BAND_MARGIN >= half:
        raise ValueError("the Jacobi-Anger band of K = {0} does not fit {1} modes".format(K, grid.n))
    rows = []

    moved = apply_horizontal_shear(SpectralField.single_mode(grid, (1, 0)), w1, K)
    oracle = np.zeros_like(moved.amplitudes)
    for j in range(-half + 1, half):
        oracle[grid.index(1), grid.index(-j)] = jv(j, K) * np.exp(1j * j * w1)
    rows.append(("jacobi_anger", float(np.max(np.abs(moved.amplitudes - oracle))), 0., 1e-10))

    tilted = apply_vertical_shear(SpectralField.single_mode(grid, (0, 1)), w2)
    expected = SpectralField.single_mode(grid, (-1, 1), np.exp(1j * w2))
    rows.append(("vertical_mode_map", float(np.max(np.abs(tilted.amplitudes - expected.amplitudes))), 0., 1e-14))

    field = SpectralField.real_mode(grid, (1, 1))
    rows.append(("l2_horizontal", abs(apply_horizontal_shear(field, w1, K).l2_norm() - field.l2_norm()), 0., 1e-12))
    rows.append(("l2_vertical", abs(apply_vertical_shear(moved, w2).l2_norm() - moved.l2_norm()), 0., 1e-12))

    periods = [step_period(field, (w1, w2), K, nu=nu, substeps=count).amplitudes for count in substeps]
    coarse = float(np.sqrt(np.sum(np.abs(periods[0] - periods[1]) ** 2)))
    fine = float(np.sqrt(np.sum(np.abs(periods[1] - periods[2]) ** 2)))
    rows.append(("strang_ratio", coarse / fine if fine > 0. else math.inf, 4., 0.5))

    table = pd.DataFrame(rows, columns=["check", "value", "target", "tolerance"])
    table["passed"] = (table["value"] - table["target"]).abs() <= table["tolerance"]
    return table
