'''
  @ Date: 2026/10/18 20:55
'''
import collections
import math
from functools import partial

import numpy as np
import pandas as pd
from scipy.stats import linregress

from chirikov.model import get_model
from chirikov.processes import TwoPointState, log_norm_growth
from chirikov.torus import TWO_PI, torus_dist, torus_dist_array
from chirikov.transport import GridSpec, SpectralField, step_period
from chirikov.utils.parallel import fan_out, moments, reduce_moments
from chirikov.utils.rng import RngStreamSpec, sample_phases, uniform_angles

CHUNK = 65536

McConfig = collections.namedtuple("McConfig", ["samples", "stream", "grid_x", "grid_v"])
Estimate = collections.namedtuple("Estimate", ["mean", "std_error", "samples"])
ContractionReport = collections.namedtuple("ContractionReport", ["K", "p", "worst_estimate", "per_cell", "m",
                                                                 "model"])
LyapunovReport = collections.namedtuple("LyapunovReport", ["lambda1", "n_steps", "n_orbits"])
AprioriReport = collections.namedtuple("AprioriReport", ["n", "table", "first_exponent", "second_exponent",
                                                     "phase_first_exponent", "phase_second_exponent",
                                                     "mixed_exponent"])
CorrelationSeries = collections.namedtuple("CorrelationSeries", ["m", "m_prime", "values", "second_moment",
                                                                 "realizations", "normalization"])
Prefactor = collections.namedtuple("Prefactor", ["D_hat", "M0", "crossing_times"])


def mc_config(samples=10 ** 6, stream=None, grid_x=32, grid_v=32):
    if samples < 1:
        raise ValueError("'samples' must be at least 1; got {0}".format(samples))
    if grid_x < 1 or grid_v < 1:
        raise ValueError("'grid_x' and 'grid_v' must be at least 1; got {0}, {1}".format(grid_x, grid_v))
    return McConfig(int(samples), stream if stream is not None else RngStreamSpec(0), int(grid_x), int(grid_v))


def _check_p(p):
    if not 0. < p < 0.5:
        raise ValueError("'p' must lie in (0, 1/2); got {0}".format(p))


def estimate_from_moments(block):
    if block.count < 1:
        raise ValueError("cannot form an estimate from zero samples")
    if block.count == 1:
        return Estimate(float(block.mean), 0., 1)
    variance = block.m2 / (block.count - 1)
    return Estimate(float(block.mean), math.sqrt(variance / block.count), int(block.count))


def estimate_from_samples(values):
    return estimate_from_moments(moments(values))


def _chunks(total, chunk=CHUNK):
    while total > 0:
        size = min(chunk, total)
        yield size
        total -= size


def contraction_values(shear, p, x2, theta, phases):
    """
    |D f_{w_m} ... D f_{w_1}(x) v|^-p for every row of phases.
    :param phases: (samples, m, 2) array.
    """
    count = phases.shape[0]
    x = np.zeros((count, 2))
    x[:, 1] = x2
    v1 = np.full(count, math.cos(theta))
    v2 = np.full(count, math.sin(theta))
    for j in range(phases.shape[1]):
        a, b, c, d = shear.jacobian_array(x, phases[:, j])
        v1, v2 = a * v1 + b * v2, c * v1 + d * v2
        x = shear.step_array(x, phases[:, j])
    return np.hypot(v1, v2) ** (-p)


def _contraction_cell(model, K, p, m, samples, task):
    index, stream, x2, theta = task
    shear = get_model(model, K)
    generator = stream.generator()
    blocks = [moments(contraction_values(shear, p, x2, theta, uniform_angles(generator, (size, m, 2))))
              for size in _chunks(samples)]
    return index, estimate_from_moments(reduce_moments(blocks))


def contraction_cells(cfg):
    """Grid of (x2, direction angle); the norm is even in v, so directions cover [0, pi)."""
    x2_values = TWO_PI * np.arange(cfg.grid_x) / cfg.grid_x
    theta_values = math.pi * np.arange(cfg.grid_v) / cfg.grid_v
    cells = []
    for i, x2 in enumerate(x2_values):
        for j, theta in enumerate(theta_values):
            index = i * cfg.grid_v + j
            cells.append((index, cfg.stream.child(index), float(x2), float(theta)))
    return cells


def contraction_estimate(K, p, cfg, m=2, model="chirikov", workers=None, verbose=False):
    """
    Monte Carlo estimate of E |D_x f^m v|^-p on every (x2, v) grid cell, with the worst cell reported.
    The full vector norm is used. All cells draw from their own child stream, so a smaller p evaluated with the
    same cfg sees exactly the same phases.
    :param K: kick strength (or shear amplitude).
    :param p: exponent in (0, 1/2).
    :param cfg: McConfig.
    :param m: number of steps (2 for the Chirikov map, 1 for the Pierrehumbert model).
    :return: ContractionReport
    """
    _check_p(p)
    if m < 1:
        raise ValueError("'m' must be at least 1; got {0}".format(m))
    cells = contraction_cells(cfg)
    if verbose:
        print("contraction: K={0} p={1} m={2} cells={3} samples/cell={4}".format(K, p, m, len(cells), cfg.samples))
    results = fan_out(partial(_contraction_cell, model, K, p, m, cfg.samples), cells, workers=workers,
                      verbose=verbose, desc="cells")
    rows = []
    for (index, _, x2, theta), (_, estimate) in zip(cells, results):
        rows.append({"cell": index, "x2": x2, "theta": theta, "mean": estimate.mean,
                     "std_error": estimate.std_error, "samples": estimate.samples})
    table = pd.DataFrame(rows)
    worst = int(table["mean"].values.argmax())
    return ContractionReport(float(K), float(p), results[worst][1], table, m,
                             model if isinstance(model, str) else model.name)


def lyapunov_function(z, p):
    """V(z) = d(x, y)^-p."""
    return torus_dist(z[0], z[1]) ** (-p)


def drift_values(shear, p, z, phases):
    """d(Phi(z))^-p after len(phases[0]) common steps; phases has shape (samples, m, 2)."""
    count = phases.shape[0]
    x = np.tile(np.asarray(z[0], dtype=float), (count, 1))
    y = np.tile(np.asarray(z[1], dtype=float), (count, 1))
    for j in range(phases.shape[1]):
        x = shear.step_array(x, phases[:, j])
        y = shear.step_array(y, phases[:, j])
    return torus_dist_array(x, y) ** (-p)


def drift_check(K, p, z, cfg, m=2, model="chirikov"):
    """
    Monte Carlo estimate of P^(2),m V(z) = E d(Phi_2m(z))^-p.
    :return: Estimate
    """
    _check_p(p)
    z = TwoPointState(*z)
    shear = get_model(model, K)
    generator = cfg.stream.generator()
    blocks = [moments(drift_values(shear, p, z, uniform_angles(generator, (size, m, 2))))
              for size in _chunks(cfg.samples)]
    return estimate_from_moments(reduce_moments(blocks))


def _cocycle_array(shear, x, phases):
    """Batched derivative cocycle; returns (N, 2, 2) matrices."""
    count = x.shape[0]
    product = np.tile(np.eye(2), (count, 1, 1))
    for j in range(phases.shape[1]):
        a, b, c, d = shear.jacobian_array(x, phases[:, j])
        step = np.stack([np.stack([a, b], axis=-1), np.stack([c, d], axis=-1)], axis=-2)
        product = np.matmul(step, product)
        x = shear.lifted_step(x, phases[:, j])
    return product


def _derivative_maxima(shear, x, phases, h):
    first = _cocycle_array(shear, x, phases)
    second = np.zeros(first.shape[0])
    for axis in range(2):
        shift = np.zeros(2)
        shift[axis] = h
        difference = (_cocycle_array(shear, x + shift, phases) - _cocycle_array(shear, x - shift, phases)) / (2 * h)
        second += np.sum(difference ** 2, axis=(1, 2))
    return float(np.max(np.linalg.norm(first, ord=2, axis=(1, 2)))), float(np.max(np.sqrt(second)))


def _lifted_endpoint_array(shear, x, phases):
    for j in range(phases.shape[1]):
        x = shear.lifted_step(x, phases[:, j])
    return x


def _phase_jacobian_array(shear, x, phases, h=1e-30):
    """Batched complex-step D_w of the lifted endpoint; returns (N, 2, 2n)."""
    count, n = phases.shape[0], phases.shape[1]
    flat = phases.reshape(count, 2 * n)
    columns = []
    for c in range(2 * n):
        shifted = flat.astype(complex)
        shifted[:, c] += 1j * h
        columns.append(np.imag(_lifted_endpoint_array(shear, x, shifted.reshape(count, n, 2))) / h)
    return np.stack(columns, axis=-1)


def _phase_derivative_maxima(shear, x, phases, h):
    """Largest |D_w Phi|, |D_w D_w Phi| and |D_x D_w Phi| over the batch (spectral and Frobenius norms)."""
    count, n = phases.shape[0], phases.shape[1]
    first = _phase_jacobian_array(shear, x, phases)
    flat = phases.reshape(count, 2 * n)
    second = np.zeros(count)
    for c in range(2 * n):
        shift = np.zeros(2 * n)
        shift[c] = h
        upper = _phase_jacobian_array(shear, x, (flat + shift).reshape(count, n, 2))
        lower = _phase_jacobian_array(shear, x, (flat - shift).reshape(count, n, 2))
        second += np.sum(((upper - lower) / (2 * h)) ** 2, axis=(1, 2))
    mixed = np.zeros(count)
    for axis in range(2):
        shift = np.zeros(2)
        shift[axis] = h
        difference = (_phase_jacobian_array(shear, x + shift, phases)
                      - _phase_jacobian_array(shear, x - shift, phases)) / (2 * h)
        mixed += np.sum(difference ** 2, axis=(1, 2))
    return (float(np.max(np.linalg.norm(first, ord=2, axis=(1, 2)))), float(np.max(np.sqrt(second))),
            float(np.max(np.sqrt(mixed))))


def growth_exponent(K_values, maxima):
    return float(linregress(np.log(K_values), np.log(maxima)).slope)


def apriori_bound_check(n, K_values=(10., 30., 100.), cfg=None, model="chirikov", h=1e-6):
    """
    Largest observed first and second derivatives of the n-step map over random (x, phases), for a K sweep: in x,
    in the phases, and mixed. The two-point map acts componentwise, so its derivative norms are the one-point ones.
    Differences use min(h, 1e-3 / K^n), which keeps the perturbation, grown by about K per step, near-linear.
    :param n: number of steps in {1, 2, 3, 4}.
    :return: AprioriReport with the per-K table and the fitted log-log growth exponents.
    """
    if n not in (1, 2, 3, 4):
        raise ValueError("'n' must be one of 1, 2, 3, 4; got {0}".format(n))
    if len(K_values) < 3:
        raise ValueError("the K sweep needs at least 3 values; got {0}".format(len(K_values)))
    cfg = cfg if cfg is not None else mc_config(samples=10 ** 4)
    rows = []
    for index, K in enumerate(K_values):
        shear = get_model(model, K)
        generator = cfg.stream.child(index).generator()
        x = uniform_angles(generator, (cfg.samples, 2))
        phases = uniform_angles(generator, (cfg.samples, n, 2))
        step = min(h, 1e-3 / K ** n)
        first, second = _derivative_maxima(shear, x, phases, step)
        phase_first, phase_second, mixed = _phase_derivative_maxima(shear, x, phases, step)
        rows.append({"K": float(K), "first_max": first, "second_max": second, "phase_first_max": phase_first,
                     "phase_second_max": phase_second, "mixed_max": mixed})
    table = pd.DataFrame(rows)
    return AprioriReport(n, table, *[growth_exponent(table["K"], table[column]) for column in
                                     ("first_max", "second_max", "phase_first_max", "phase_second_max", "mixed_max")])


def _lyapunov_orbit(model, K, n_steps, chunk, stream):
    generator = stream.generator()
    start = uniform_angles(generator, 3)
    x = (start[0], start[1])
    v = (math.cos(start[2]), math.sin(start[2]))
    total = 0.
    for size in _chunks(n_steps, chunk):
        state, log_sum = log_norm_growth(x, v, uniform_angles(generator, (size, 2)), K, model=model)
        x, v = state.x, state.v
        total += log_sum
    return total / n_steps


def lyapunov_exponent(K, n_steps, n_orbits, stream, model="chirikov", workers=None, chunk=CHUNK, verbose=False):
    """
    Top Lyapunov exponent in nats per map application, averaged over independent random orbits.
    :return: LyapunovReport
    """
    if n_steps < 1000:
        raise ValueError("'n_steps' must be at least 1000; got {0}".format(n_steps))
    if n_orbits < 1:
        raise ValueError("'n_orbits' must be at least 1; got {0}".format(n_orbits))
    streams = [stream.child(orbit) for orbit in range(n_orbits)]
    values = fan_out(partial(_lyapunov_orbit, model, K, int(n_steps), int(chunk)), streams, workers=workers,
                     verbose=verbose, desc="orbits")
    report = LyapunovReport(estimate_from_samples(values), int(n_steps), int(n_orbits))
    if verbose:
        print("lyapunov: K={0} lambda1={1:.5f} +/- {2:.5f}".format(K, report.lambda1.mean, report.lambda1.std_error))
    return report


def _correlation_realization(model, K, m, m_prime, n_max, grid, stream):
    phases = sample_phases(stream, n_max)
    field = SpectralField.single_mode(grid, m)
    target = (-m_prime[0], -m_prime[1])
    values = [abs(field.coefficient(target))]
    for w in phases:
        field = step_period(field, w, K, model=model)
        values.append(abs(field.coefficient(target)))
    return np.array(values)


def correlation_decay(K, m, m_prime, n_max, realizations, grid=None, stream=None, model="chirikov", workers=None):
    """
    Empirical |integral of e_m (e_m' o f^n) dpi| for n = 0..n_max, averaged over phase realizations.
    The integral equals the Fourier coefficient at -m' of e_m transported n periods, so it is read off spectrally.
    :param m: mode (k1, k2), non-zero.
    :param m_prime: mode (k1, k2), non-zero.
    :return: CorrelationSeries; values[0] is 1 when m = -m' and 0 otherwise (probability normalization).
    """
    if tuple(m) == (0, 0) or tuple(m_prime) == (0, 0):
        raise ValueError("'m' and 'm_prime' must be non-zero modes; got {0}, {1}".format(m, m_prime))
    grid = grid if grid is not None else GridSpec(128)
    stream = stream if stream is not None else RngStreamSpec(0)
    runs = fan_out(partial(_correlation_realization, model, K, tuple(m), tuple(m_prime), int(n_max), grid),
                   [stream.child(r) for r in range(realizations)], workers=workers)
    runs = np.array(runs)
    return CorrelationSeries(tuple(m), tuple(m_prime), runs.mean(axis=0), (runs ** 2).mean(axis=0),
                             int(realizations), "probability")


def correlation_by_pullback(K, m, m_prime, n_max, realizations, points=256, stream=None, model="chirikov"):
    """
    The pairing of correlation_decay evaluated the other way round: e_m times e_m' composed with the lifted orbit,
    averaged over an evenly spaced points x points grid, with the same phases per realization.
    The trapezoid rule is exact once the grid holds the band of the composed integrand, i.e. for few periods.
    :return: (n_max + 1,) array of realization-averaged |pairing|
    """
    shear = get_model(model, K)
    stream = stream if stream is not None else RngStreamSpec(0)
    axis = TWO_PI * np.arange(points) / points
    x = np.stack(np.meshgrid(axis, axis, indexing='ij'), axis=-1).reshape(-1, 2)
    weight = np.exp(1j * x.dot(np.asarray(m, dtype=float)))
    m_prime = np.asarray(m_prime, dtype=float)
    values = np.zeros((realizations, n_max + 1))
    for realization in range(realizations):
        y = x
        values[realization, 0] = abs(np.mean(weight * np.exp(1j * y.dot(m_prime))))
        for n, w in enumerate(sample_phases(stream.child(realization), n_max), 1):
            y = shear.lifted_step(y, w)
            values[realization, n] = abs(np.mean(weight * np.exp(1j * y.dot(m_prime))))
    return values.mean(axis=0)


def duality_gap(K, pairs, n_max=1, realizations=2, grid=None, points=256, stream=None, model="chirikov"):
    """
    Largest disagreement between the spectrally transported correlations and their pullback quadrature.
    :param pairs: sequence of (m, m') mode pairs.
    :return: DataFrame with columns m, m_prime, n, spectral, pullback, gap
    """
    grid = grid if grid is not None else GridSpec(256)
    stream = stream if stream is not None else RngStreamSpec(0)
    rows = []
    for index, (m, m_prime) in enumerate(pairs):
        spectral = correlation_decay(K, m, m_prime, n_max, realizations, grid=grid, stream=stream.child(index),
                                     model=model, workers=1).values
        pullback = correlation_by_pullback(K, m, m_prime, n_max, realizations, points=points,
                                           stream=stream.child(index), model=model)
        for n in range(n_max + 1):
            rows.append({"m": str(tuple(m)), "m_prime": str(tuple(m_prime)), "n": n, "spectral": spectral[n],
                         "pullback": pullback[n], "gap": abs(spectral[n] - pullback[n])})
    return pd.DataFrame(rows)


def fit_exponential_rate(series, start=0):
    """
    Least-squares line through (n, log value).
    :param series: values indexed from `start`, or a sequence of (n, value) pairs.
    :return: (rate, r_squared) with rate = -slope.
    """
    series = np.asarray(series, dtype=float)
    if series.ndim == 2:
        n, values = series[:, 0], series[:, 1]
    else:
        values = series
        n = start + np.arange(values.size)
    if values.size < 5:
        raise ValueError("fit_exponential_rate needs at least 5 points; got {0}".format(values.size))
    if np.any(values <= 0):
        raise ValueError("fit_exponential_rate needs positive values")
    logs = np.log(values)
    if np.ptp(logs) == 0:
        return 0., 1.
    fit = linregress(n, logs)
    return float(-fit.slope), float(fit.rvalue ** 2)


def crossing_time(values, zeta):
    """Last n with values[n] > exp(-zeta n); 0 when there is none."""
    values = np.asarray(values, dtype=float)
    above = np.nonzero(values > np.exp(-zeta * np.arange(values.size)))[0]
    return int(above[-1]) if above.size else 0


def empirical_prefactor(series_by_pair, zeta):
    """
    Finite-horizon counterparts of the random prefactor over the probed mode pairs:
    D_hat = max exp(zeta N_{m,m'}) and M0 = max{|m| v |m'| : exp(zeta N_{m,m'}) > |m| |m'|} (0 when empty).
    :param series_by_pair: dict mapping (m, m') to a correlation value series.
    :return: Prefactor(D_hat, M0, crossing_times per pair)
    """
    crossings = {pair: crossing_time(values, zeta) for pair, values in series_by_pair.items()}
    D_hat = max([math.exp(zeta * n) for n in crossings.values()] or [1.])
    M0 = 0.
    for (m, m_prime), n in crossings.items():
        size, size_prime = math.hypot(*m), math.hypot(*m_prime)
        if math.exp(zeta * n) > size * size_prime:
            M0 = max(M0, size, size_prime)
    return Prefactor(D_hat, M0, crossings)
