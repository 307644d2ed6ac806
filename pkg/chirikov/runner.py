'''
  @ Date: 2026/10/19 00:05
'''
import os
import math
import time
import json
import hashlib
import collections
from functools import partial

import numpy as np
import pandas as pd

from chirikov import __version__
from chirikov.model import MODELS
from chirikov.torus import TorusPoint, TangentVector, torus_dist, chirikov_step
from chirikov.processes import TwoPointState, ProjectiveState
from chirikov.utils.parallel import fan_out, default_workers
from chirikov.utils.rng import RngStreamSpec, uniform_angles
from chirikov.quadrature import claim_constant_probe, default_ratio_grid, singular_cos_integral, midpoint_oracle
from chirikov.estimators import (mc_config, contraction_estimate, drift_check, lyapunov_function,
                                 apriori_bound_check, lyapunov_exponent, correlation_decay, fit_exponential_rate,
                                 empirical_prefactor, duality_gap)
from chirikov.model.pierrehumbert import p_contraction_estimate
from chirikov.structure import (det_xi_phi8, fixed_point_suite, one_point_submersion, projective_submersion,
                                two_point_submersion, two_point_degenerate, lyapunov_surjectivity,
                                volume_preservation, FD_STEP)
from chirikov.control import one_point_exact, two_point_reach, projective_steer
from chirikov.transport import NORMALIZATION, GridSpec, decay_experiment, run_decay_experiment, shear_exactness
from chirikov.harris import (DEFAULT_CONSTANTS, DriftParams, MinorizationParams, harris_constants, admissible_sweep,
                             chirikov_headline_rates, rates_frame)
from chirikov.data import write_csv, write_json, write_series_to_file, file_digest

APRIORI_K = (10., 30., 100.)
DRIFT_SEPARATIONS = (1e-3, 1e-2, math.pi)
QUICK_SAMPLES = 10 ** 5
QUICK_STEPS = 50
SWEEP_KICKS = (50., 100., 200.)
VOLUME_KICKS = (4 * math.pi, 100.)
VOLUME_TOL = 1e-12
HEADLINE_KICKS = (10., 100.)
SHEAR_CHECK_KICK = 4.
DUALITY_TOL = 1e-9
DUALITY_PAIRS = (((1, 0), (-1, 0)), ((1, 0), (0, -1)), ((2, 1), (-1, -1)))


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending field."""


_DEFAULTS = collections.OrderedDict([
    ("subcommand", None),
    ("model", "chirikov"),  # 'chirikov' or 'pierrehumbert'
    ("K", 4 * math.pi),  # kick strength
    ("A", 100.),  # shear amplitude of the pierrehumbert model
    ("p", 0.25),  # moment exponent in (0, 1/2)
    ("q", 1.),  # correlation moment order
    ("nu", 1e-4),  # diffusivity of the dissipate subcommand
    ("nu_sweep", []),  # further diffusivities run by dissipate alongside nu
    ("steps", 200),  # periods per realization
    ("samples", QUICK_SAMPLES),  # Monte Carlo samples per cell / per estimate
    ("realizations", 10),  # phase realizations (or Lyapunov orbits)
    ("grid", 256),  # Fourier modes per axis (transport) or cells per axis (contraction)
    ("seed", 0),
    ("workers", None),  # defaults to $CHIRIKOV_WORKERS
    ("out", "results"),  # output directory
    ("profile", "quick"),
    ("mode", "two-point"),  # control mode: one-point, two-point, projective
    ("eps", 1e-2),  # control tolerance
    ("trials", 100),  # control problems
    ("K_values", [10., 4 * math.pi, 100.]),  # structure checks sweep
    ("constants", {}),  # overrides of the unnamed rate constants
])
_INTEGER_FIELDS = ("steps", "samples", "realizations", "grid", "seed", "trials")


class ExperimentConfig(collections.namedtuple("ExperimentConfig", list(_DEFAULTS))):
    """Complete, JSON-serializable description of one run."""
    __slots__ = ()

    def __new__(cls, **kwargs):
        unknown = sorted(set(kwargs) - set(_DEFAULTS))
        if unknown:
            raise ConfigError("unknown configuration field(s) {0}".format(unknown))
        values = collections.OrderedDict(_DEFAULTS)
        values.update(kwargs)
        for name in _INTEGER_FIELDS:
            try:
                values[name] = int(values[name])
            except (TypeError, ValueError):
                raise ConfigError("'{0}' must be an integer; got {1!r}".format(name, values[name]))
        if values["workers"] is not None:
            values["workers"] = int(values["workers"])
        values["K_values"] = [float(K) for K in values["K_values"]]
        # a single flag value arrives as a scalar
        if isinstance(values["nu_sweep"], (int, float)):
            values["nu_sweep"] = [values["nu_sweep"]]
        values["nu_sweep"] = [float(nu) for nu in values["nu_sweep"] or []]
        values["constants"] = dict(values["constants"] or {})
        return super(ExperimentConfig, cls).__new__(cls, **values).validated()

    def validated(self):
        if self.subcommand is not None and self.subcommand not in SUBCOMMANDS:
            raise ConfigError("'subcommand' must be one of {0}; '{1}' is not recognized".format(
                list(SUBCOMMANDS), self.subcommand))
        if self.model not in MODELS:
            raise ConfigError("'model' must be one of {0}; '{1}' is not recognized".format(sorted(MODELS), self.model))
        for name in ("K", "A", "eps"):
            if not getattr(self, name) > 0:
                raise ConfigError("'{0}' must be positive; got {1}".format(name, getattr(self, name)))
        if not 0. < self.p < 0.5:
            raise ConfigError("'p' must lie in (0, 1/2); got {0}".format(self.p))
        if not self.q > 0:
            raise ConfigError("'q' must be positive; got {0}".format(self.q))
        if self.nu < 0:
            raise ConfigError("'nu' must be non-negative; got {0}".format(self.nu))
        if any(not nu > 0 for nu in self.nu_sweep):
            raise ConfigError("'nu_sweep' must hold positive diffusivities; got {0}".format(self.nu_sweep))
        for name in ("steps", "samples", "realizations", "grid", "trials"):
            if getattr(self, name) < 1:
                raise ConfigError("'{0}' must be a positive integer; got {1}".format(name, getattr(self, name)))
        if self.grid < 8 or self.grid & (self.grid - 1):
            raise ConfigError("'grid' must be a power of two no smaller than 8; got {0}".format(self.grid))
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("'seed' must be a 64-bit unsigned integer; got {0}".format(self.seed))
        if self.workers is not None and self.workers < 1:
            raise ConfigError("'workers' must be a positive integer; got {0}".format(self.workers))
        if self.profile not in ("quick", "full"):
            raise ConfigError("'profile' must be 'quick' or 'full'; '{0}' is not recognized".format(self.profile))
        if self.mode not in ("one-point", "two-point", "projective"):
            raise ConfigError("'mode' must be one-point, two-point or projective; '{0}' is not recognized".format(
                self.mode))
        unknown = sorted(set(self.constants) - set(DEFAULT_CONSTANTS))
        if unknown:
            raise ConfigError("'constants' accepts {0}; {1} not recognized".format(list(DEFAULT_CONSTANTS), unknown))
        if any(not value > 0 for value in self.constants.values()):
            raise ConfigError("'constants' must all be positive; got {0}".format(self.constants))
        if not self.K_values or any(not K > 0 for K in self.K_values):
            raise ConfigError("'K_values' must be a non-empty list of positive kicks; got {0}".format(self.K_values))
        return self

    @property
    def amplitude(self):
        return self.A if self.model == "pierrehumbert" else self.K

    @property
    def n_workers(self):
        return int(self.workers) if self.workers is not None else default_workers()

    def stream(self, name):
        return RngStreamSpec(int(self.seed), list(SUBCOMMANDS).index(name))

    def replace(self, **kwargs):
        values = self._asdict()
        values.update(kwargs)
        return ExperimentConfig(**values)

    def to_json(self):
        return json.dumps(self._asdict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        try:
            values = json.loads(text)
        except ValueError as error:
            raise ConfigError("configuration is not valid JSON: {0}".format(error))
        if not isinstance(values, dict):
            raise ConfigError("configuration must be a JSON object")
        return cls(**values)

    def digest(self):
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()


def load_config(config_file=None, **overrides):
    """Defaults, then the JSON file, then explicit (non-None) overrides."""
    values = {}
    if config_file is not None:
        if not os.path.exists(config_file):
            raise ConfigError("'config_file' {0} does not exist".format(config_file))
        with open(config_file, "r") as opened_file:
            values.update(ExperimentConfig.from_json(opened_file.read())._asdict())
    values.update({key: value for key, value in overrides.items() if value is not None})
    return ExperimentConfig(**values)


RunManifest = collections.namedtuple("RunManifest", ["config", "version", "wall_time", "checks", "files", "status",
                                                     "error"])


def exit_code(manifest):
    return {"pass": 0, "fail": 1, "error": 2}[manifest.status]


class _Outputs(object):
    """Collects the files a subcommand writes, under one directory."""

    def __init__(self, config, prefix):
        self.config = config
        self.prefix = prefix
        self.paths = []
        if not os.path.exists(config.out):
            os.makedirs(config.out)

    def path(self, suffix):
        path = os.path.join(self.config.out, "{0}_{1}".format(self.prefix, suffix))
        self.paths.append(path)
        return path

    def csv(self, frame, suffix):
        return write_csv(frame, self.path(suffix + ".csv"))

    def summary(self, item, suffix="summary"):
        item = dict(item)
        item.update({"config_digest": self.config.digest(), "normalization": NORMALIZATION, "version": __version__})
        return write_json(item, self.path(suffix + ".json"))


def _contraction(config, outputs, verbose):
    m = 1 if config.model == "pierrehumbert" else 2
    cfg = mc_config(config.samples, config.stream("contraction"), grid_x=min(config.grid, 32),
                    grid_v=min(config.grid, 32))
    if config.model == "pierrehumbert":
        report = p_contraction_estimate(config.A, config.p, cfg, workers=config.n_workers, verbose=verbose)
    else:
        report = contraction_estimate(config.K, config.p, cfg, m=m, workers=config.n_workers, verbose=verbose)
    worst = report.worst_estimate
    outputs.csv(report.per_cell, "cells")
    outputs.summary({"K": report.K, "p": report.p, "m": m, "worst_mean": worst.mean, "worst_std_error":
                     worst.std_error, "samples": worst.samples, "model": report.model})
    return {"worst_below_half": worst.mean + 5. * worst.std_error < 0.5}


def _drift(config, outputs, verbose):
    cfg = mc_config(config.samples, config.stream("drift"))
    rows = []
    for index, separation in enumerate(DRIFT_SEPARATIONS):
        z = TwoPointState((0., 0.), (separation, 0.))
        estimate = drift_check(config.amplitude, config.p, z, cfg._replace(stream=cfg.stream.child(index)),
                               model=config.model)
        V = lyapunov_function(z, config.p)
        rows.append({"separation": separation, "V": V, "PV": estimate.mean, "std_error": estimate.std_error,
                     "ratio": estimate.mean / V, "ratio_upper": (estimate.mean + 5. * estimate.std_error) / V})
        if verbose:
            print("drift: separation {0:g} ratio {1:.4f}".format(separation, rows[-1]["ratio"]))
    table = pd.DataFrame(rows)
    outputs.csv(table, "ratios")
    near = table[table["separation"] < 0.1]
    return {"near_diagonal_contracts": bool(np.all(near["ratio_upper"] < 0.9)),
            "far_finite": bool(np.all(np.isfinite(table["PV"])))}


def _apriori(config, outputs, verbose):
    checks, frames = {}, []
    for n in (1, 2):
        report = apriori_bound_check(n, APRIORI_K, mc_config(min(config.samples, 10 ** 4),
                                                             config.stream("apriori").child(n)), model=config.model)
        frame = report.table.copy()
        frame["n"] = n
        frame["first_exponent"] = report.first_exponent
        frame["second_exponent"] = report.second_exponent
        frame["phase_first_exponent"] = report.phase_first_exponent
        frame["phase_second_exponent"] = report.phase_second_exponent
        frame["mixed_exponent"] = report.mixed_exponent
        frames.append(frame)
        checks["first_growth_n{0}".format(n)] = report.first_exponent <= n + 0.2
        checks["second_growth_n{0}".format(n)] = report.second_exponent <= 2 * n + 1 + 0.2
        checks["phase_first_growth_n{0}".format(n)] = report.phase_first_exponent <= n + 0.2
        checks["phase_second_growth_n{0}".format(n)] = report.phase_second_exponent <= 2 * n + 1 + 0.2
        checks["mixed_growth_n{0}".format(n)] = report.mixed_exponent <= 2 * n + 1 + 0.2
        if verbose:
            print("apriori: n={0} exponents {1:.3f} {2:.3f}".format(n, report.first_exponent,
                                                                    report.second_exponent))
    outputs.csv(pd.concat(frames, ignore_index=True), "growth")
    return checks


def _lyapunov(config, outputs, verbose):
    report = lyapunov_exponent(config.amplitude, max(config.steps, 1000), config.realizations,
                               config.stream("lyapunov"), model=config.model, workers=config.n_workers,
                               verbose=verbose)
    estimate = report.lambda1
    outputs.summary({"K": config.amplitude, "lambda1": estimate.mean, "std_error": estimate.std_error,
                     "n_steps": report.n_steps, "n_orbits": report.n_orbits})
    checks = {"positive": estimate.mean > 5. * estimate.std_error}
    if config.model == "chirikov" and config.K >= min(SWEEP_KICKS):
        # large-kick value log(K / 2)
        oracle = math.log(config.K / 2.)
        checks["near_large_kick_oracle"] = abs(estimate.mean - oracle) <= 0.1 * oracle
    return checks


CORRELATION_PAIRS = (((1, 0), (-1, 0)), ((0, 1), (0, -1)), ((1, 1), (-1, -1)), ((2, 1), (-2, -1)))


def _correlations(config, outputs, verbose):
    frames, series_by_pair, rates = [], {}, []
    for index, (m, m_prime) in enumerate(CORRELATION_PAIRS):
        series = correlation_decay(config.amplitude, m, m_prime, config.steps, config.realizations,
                                   grid=GridSpec(min(config.grid, 128)),
                                   stream=config.stream("correlations").child(index), model=config.model,
                                   workers=config.n_workers)
        n = np.arange(series.values.size)
        frames.append(pd.DataFrame({"m": str(m), "m_prime": str(m_prime), "n": n, "value": series.values,
                                    "second_moment": series.second_moment}))
        series_by_pair[(m, m_prime)] = series.values
        positive = series.values > 0
        rate, r_squared = fit_exponential_rate(np.stack([n[positive], series.values[positive]], axis=1))
        rates.append({"m": str(m), "m_prime": str(m_prime), "initial": series.values[0], "rate": rate,
                      "r_squared": r_squared})
        if verbose:
            print("correlations: {0} x {1} rate {2:.4g} (R^2 {3:.3f})".format(m, m_prime, rate, r_squared))
    table = pd.DataFrame(rates)
    outputs.csv(pd.concat(frames, ignore_index=True), "series")
    outputs.csv(table, "rates")
    zeta = float(table["rate"].min()) / 2.
    prefactor = empirical_prefactor(series_by_pair, zeta) if zeta > 0 else None
    duality = duality_gap(config.amplitude, DUALITY_PAIRS, n_max=1, realizations=min(config.realizations, 2),
                          grid=GridSpec(256), points=256,
                          stream=config.stream("correlations").child(len(CORRELATION_PAIRS)), model=config.model)
    outputs.csv(duality, "duality")
    outputs.summary({"realizations": config.realizations, "zeta": zeta,
                     "D_hat": prefactor.D_hat if prefactor else None, "M0": prefactor.M0 if prefactor else None,
                     "duality_gap": float(duality["gap"].max())})
    return {"initial_values_one": bool(np.all(np.abs(table["initial"] - 1.) < 1e-12)),
            "decays": bool(np.all(table["rate"] > 0)), "duality": bool(duality["gap"].max() <= DUALITY_TOL)}


def _ranks(config, outputs, verbose):
    rows = []
    for K in config.K_values:
        surjectivity = lyapunov_surjectivity(K)
        for name, report, expected in (("one_point", one_point_submersion(K), 2),
                                       ("projective", projective_submersion(K), 3),
                                       ("two_point", two_point_submersion(K), 4),
                                       ("two_point_n2", two_point_degenerate(K), None),
                                       ("lyapunov_phi", surjectivity.phi, 2),
                                       ("lyapunov_kernel_product", surjectivity.product, 3)):
            passed = report.rank_at_tol == expected if expected is not None else report.rank_at_tol < 4
            rows.append({"K": K, "check": name, "rows": report.rows, "cols": report.cols,
                         "rank": report.rank_at_tol, "expected": expected if expected is not None else -1,
                         "smallest_singular_value": float(report.singular_values[-1]), "passed": passed})
    table = pd.DataFrame(rows)
    outputs.csv(table, "ranks")
    return {"{0}_K{1:g}".format(row.check, row.K): bool(row.passed) for row in table.itertuples()}


def _dets(config, outputs, verbose):
    rows = []
    for K in config.K_values:
        for method, tolerance in (("chain", 1e-6), ("complex", 1e-6), ("fd", 1e-5)):
            report = det_xi_phi8(K, method=method)
            # the real-step cross-check is gated only while h K^4 stays in the near-linear range
            gated = method != "fd" or FD_STEP * K ** 4 <= 0.1
            rows.append({"K": K, "method": method, "value": report.value, "expected": report.expected,
                         "rel_error": report.rel_error, "gated": gated,
                         "passed": report.rel_error <= tolerance or not gated})
    table = pd.DataFrame(rows)
    outputs.csv(table, "dets")
    return {"det_{0}_K{1:g}".format(row.method, row.K): bool(row.passed) for row in table.itertuples()}


def _fixedpoints(config, outputs, verbose):
    frames = []
    for K in config.K_values:
        frame = fixed_point_suite(K)
        frame.insert(0, "K", K)
        frames.append(frame)
    table = pd.concat(frames, ignore_index=True)
    outputs.csv(table, "suite")
    return {"all_fixed_points": bool(table["passed"].all())}


def _random_pair(generator, minimum):
    while True:
        angles = uniform_angles(generator, 4)
        x, y = TorusPoint(angles[0], angles[1]), TorusPoint(angles[2], angles[3])
        if torus_dist(x, y) >= minimum:
            return TwoPointState(x, y)


def _random_projective(generator):
    angles = uniform_angles(generator, 3)
    return ProjectiveState((angles[0], angles[1]), TangentVector(math.cos(angles[2]), math.sin(angles[2])))


def control_trial(mode, K, eps, stream):
    """One random steering problem; returns a flat result row."""
    generator = stream.generator()
    if mode == "one-point":
        angles = uniform_angles(generator, 4)
        x, y = TorusPoint(angles[0], angles[1]), TorusPoint(angles[2], angles[3])
        distance = torus_dist(chirikov_step(x, one_point_exact(x, y, K), K), y)
        return {"steps": 1, "final_distance": distance, "success": distance <= 1e-12}
    if mode == "two-point":
        start, target = _random_pair(generator, 0.1), _random_pair(generator, 0.1)
        result = two_point_reach(start, target, eps, K)
    else:
        start, target = _random_projective(generator), _random_projective(generator)
        result = projective_steer(start, target, eps, K)
    return {"steps": result.steps, "final_distance": result.final_distance, "success": bool(result.success)}


def _control(config, outputs, verbose):
    stream = config.stream("control")
    rows = fan_out(partial(control_trial, config.mode, config.K, config.eps),
                   [stream.child(trial) for trial in range(config.trials)], workers=config.n_workers,
                   verbose=verbose, desc="control")
    for trial, row in enumerate(rows):
        row["trial"] = trial
    write_json(rows, outputs.path("results.json"))
    successes = sum(row["success"] for row in rows)
    outputs.summary({"mode": config.mode, "K": config.K, "eps": config.eps, "trials": config.trials,
                     "successes": successes})
    required = config.trials if config.mode != "projective" else int(math.ceil(0.99 * config.trials))
    return {"{0}_success".format(config.mode): successes >= required}


def _decay(config, outputs, verbose, nu, s, negative, stream):
    cfg = decay_experiment(config.amplitude, nu=nu, steps=config.steps, s=s, negative=negative,
                           realizations=config.realizations, stream=stream, model=config.model,
                           grid=GridSpec(config.grid))
    result = run_decay_experiment(cfg, workers=config.n_workers, verbose=verbose)
    return cfg, result


def _mix(config, outputs, verbose):
    cfg, result = _decay(config, outputs, verbose, 0., 1., True, config.stream("mix"))
    outputs.csv(result.series, "series")
    outputs.csv(result.rates, "rates")
    norms = [group["norm"].values for _, group in result.series.groupby("realization")]
    if len(set(len(row) for row in norms)) == 1:
        write_series_to_file(norms, outputs.path("series.h5"), labels=range(len(norms)),
                             attributes={"normalization": NORMALIZATION, "config_digest": config.digest()})
    outputs.summary({"K": cfg.K, "steps": cfg.steps, "realizations": cfg.realizations,
                     "mean_rate": float(result.rates["rate"].mean()), "resolution_limited": result.resolution_limited,
                     "truncated": result.truncated})
    return {"all_decay": bool(np.all(result.rates["rate"] > 0)),
            "log_linear": bool(np.all(result.rates["r_squared"] >= 0.9))}


def _dissipate(config, outputs, verbose):
    nus = [config.nu] + [nu for nu in config.nu_sweep if nu != config.nu]
    series, tables, checks = [], [], {}
    for nu in nus:
        _, result = _decay(config, outputs, verbose, nu, 0., False, config.stream("dissipate"))
        bare = math.log(2.) / (2. * nu) if nu > 0 else math.inf
        rates = result.rates.copy()
        rates.insert(0, "nu", nu)
        rates["bare_half_life"] = bare
        rates["speedup"] = bare / rates["half_life"]
        frame = result.series.copy()
        frame.insert(0, "nu", nu)
        series.append(frame)
        tables.append(rates)
        checks["enhanced_nu{0:g}".format(nu)] = bool(np.all(rates["half_life"] <= bare / 10.))
    rates = pd.concat(tables, ignore_index=True)
    speedups = rates.groupby("nu")["speedup"].median().sort_index(ascending=False)
    outputs.csv(pd.concat(series, ignore_index=True), "series")
    outputs.csv(rates, "rates")
    outputs.summary({"K": config.amplitude, "nu": nus, "median_speedup": [float(value) for value in speedups.values],
                     "median_half_life": [float(rates[rates["nu"] == nu]["half_life"].median()) for nu in nus]})
    if len(nus) > 1:
        checks["speedup_grows_as_nu_falls"] = bool(np.all(np.diff(speedups.values) > 0))
    return checks


def _rates(config, outputs, verbose):
    headline = chirikov_headline_rates(config.K, config.q, config.p, constants=config.constants)
    outputs.csv(rates_frame(headline), "table")
    outputs.summary({"K": config.K, "q": config.q, "p": config.p, "M": headline.M,
                     "constants": dict(headline.constants), "conditional_on_constants": True})
    expected = 264. * math.log10(config.K) + math.log10(math.log10(config.K)) + math.log10(headline.constants["C"])
    return {"nested_p_K": abs(headline.rates["p_K"].log10_value - expected) <= 1e-9}


def _claim_probe(config, outputs, verbose):
    ratios = default_ratio_grid()
    best, argmax, values = claim_constant_probe(config.p, ratios=ratios, full_output=True)
    outputs.csv(pd.DataFrame({"ratio": ratios, "value": values}), "sweep")
    outputs.summary({"p": config.p, "C_p": best, "argmax_ratio": argmax})
    step = float(ratios[1] - ratios[0])
    return {"finite": bool(np.isfinite(best)), "maximizer_at_unit_ratio": abs(abs(argmax) - 1.) <= step}


def _volume(config, outputs, verbose):
    table = volume_preservation(VOLUME_KICKS, samples=config.samples, stream=config.stream("volume"))
    outputs.csv(table, "table")
    if verbose:
        print(table.to_string(index=False))
    return {"det_one": bool(np.all(table["max_det_error"] <= VOLUME_TOL)),
            "round_trip": bool(np.all(table["max_round_trip"] <= VOLUME_TOL))}


def _contraction_sweep(config, outputs, verbose):
    rows = []
    for index, K in enumerate(SWEEP_KICKS):
        cfg = mc_config(config.samples, config.stream("contraction-sweep").child(index), grid_x=min(config.grid, 8),
                        grid_v=min(config.grid, 8))
        if config.model == "pierrehumbert":
            report = p_contraction_estimate(K, config.p, cfg, workers=config.n_workers, verbose=verbose)
        else:
            report = contraction_estimate(K, config.p, cfg, workers=config.n_workers, verbose=verbose)
        worst = report.worst_estimate
        rows.append({"K": K, "worst_mean": worst.mean, "worst_std_error": worst.std_error, "samples": worst.samples,
                     "model": config.model})
    table = pd.DataFrame(rows)
    outputs.csv(table, "table")
    worst = table["worst_mean"].values
    # K^-p predicts the ratio (K_last / K_first)^p between the ends of the sweep
    predicted = (SWEEP_KICKS[-1] / SWEEP_KICKS[0]) ** config.p
    return {"decreasing": bool(np.all(np.diff(worst) < 0)),
            "power_law": abs(math.log((worst[0] / worst[-1]) / predicted)) < math.log(2.)}


def _quadrature(config, outputs, verbose):
    generator = config.stream("quadrature").generator()
    rows = []
    for trial in range(config.trials):
        a = generator.uniform(-3., 3.)
        b = generator.uniform(0.2, 3.) * generator.choice((-1., 1.))
        value = singular_cos_integral(a, b, config.p)
        oracle = midpoint_oracle(a, b, config.p, points=config.samples)
        gap = abs(value - oracle.value)
        rows.append({"trial": trial, "a": a, "b": b, "p": config.p, "value": value, "oracle": oracle.value,
                     "gap": gap, "error_bound": oracle.error_bound, "passed": gap <= oracle.error_bound})
    table = pd.DataFrame(rows)
    outputs.csv(table, "oracle")
    outputs.summary({"p": config.p, "points": config.samples, "trials": config.trials,
                     "max_gap": float(table["gap"].max())})
    return {"midpoint_oracle": bool(table["passed"].all())}


def _harris(config, outputs, verbose):
    example = harris_constants(DriftParams(0.5, 1.), MinorizationParams(0.5, 8.), alpha0=0.25, gamma0=0.8)
    sweep = admissible_sweep(min(config.samples, 10 ** 4), config.stream("harris"))
    nested = []
    for K in HEADLINE_KICKS:
        headline = chirikov_headline_rates(K, config.q, config.p, constants=config.constants)
        expected = 264. * math.log10(K) + math.log10(math.log10(K)) + math.log10(headline.constants["C"])
        nested.append({"K": K, "log10_value": headline.rates["p_K"].log10_value, "expected": expected})
    nested = pd.DataFrame(nested)
    outputs.csv(pd.DataFrame([example._asdict()]), "example")
    outputs.csv(sweep, "sweep")
    outputs.csv(nested, "nested")
    outputs.summary({"beta": example.beta, "alpha_bar": example.alpha_bar, "sweep_points": len(sweep),
                     "max_alpha_bar": float(sweep["alpha_bar"].max())})
    return {"worked_example": abs(example.beta - 0.25) <= 1e-12 and abs(example.alpha_bar - 0.9) <= 1e-12,
            "alpha_bar_below_one": bool(np.all(sweep["alpha_bar"] < 1.)),
            "nested_p_K": bool(np.all(np.abs(nested["log10_value"] - nested["expected"]) <= 1e-9))}


def _shears(config, outputs, verbose):
    table = shear_exactness(K=SHEAR_CHECK_KICK, grid=GridSpec(256))
    outputs.csv(table, "table")
    return {row.check: bool(row.passed) for row in table.itertuples()}


SUBCOMMANDS = collections.OrderedDict([
    ("contraction", _contraction),
    ("drift", _drift),
    ("apriori", _apriori),
    ("lyapunov", _lyapunov),
    ("correlations", _correlations),
    ("ranks", _ranks),
    ("dets", _dets),
    ("fixedpoints", _fixedpoints),
    ("control", _control),
    ("mix", _mix),
    ("dissipate", _dissipate),
    ("rates", _rates),
    ("claim-probe", _claim_probe),
    ("volume", _volume),
    ("contraction-sweep", _contraction_sweep),
    ("quadrature", _quadrature),
    ("harris", _harris),
    ("shears", _shears),
])


def _inventory(paths):
    return [{"path": path, "sha256": file_digest(path)} for path in paths if os.path.exists(path)]


def run(subcommand, config, verbose=False, label=None):
    """
    Execute one subcommand and write its outputs plus a manifest under config.out.
    :param subcommand: one of SUBCOMMANDS.
    :param config: ExperimentConfig (or a dict of its fields).
    :param label: file prefix of the outputs and manifest; the subcommand name by default.
    :return: RunManifest; status is 'pass', 'fail' (an assertion failed) or 'error' (bad configuration).
    """
    start = time.time()
    try:
        if isinstance(config, dict):
            config = ExperimentConfig(**config)
        config = config.replace(subcommand=subcommand)
    except ConfigError as error:
        return RunManifest(config if isinstance(config, dict) else config._asdict(), __version__,
                           time.time() - start, {}, [], "error", str(error))
    label = label or subcommand
    outputs = _Outputs(config, label)
    if verbose:
        print("Running: {0} (seed {1}, {2} workers)".format(label, config.seed, config.n_workers))
    error = None
    try:
        checks = collections.OrderedDict(sorted((key, bool(value)) for key, value in
                                                SUBCOMMANDS[subcommand](config, outputs, verbose).items()))
        status = "pass" if all(checks.values()) else "fail"
    except ConfigError as exc:
        checks, status, error = collections.OrderedDict(), "error", str(exc)
    except (ValueError, ArithmeticError) as exc:
        checks, status, error = collections.OrderedDict(), "fail", "{0}: {1}".format(type(exc).__name__, exc)
    manifest = RunManifest(config._asdict(), __version__, time.time() - start, checks, _inventory(outputs.paths),
                           status, error)
    write_json(manifest._asdict(), os.path.join(config.out, "{0}_manifest.json".format(label)))
    if verbose:
        print("{0}: {1} ({2:.1f} s)".format(label, status, manifest.wall_time))
    return manifest


def _profile_overrides(config, profile):
    """
    The acceptance battery as (label, subcommand, overrides) triples; labels are unique and prefix the outputs.
    """
    if profile == "full":
        return [("volume", "volume", {"samples": 10 ** 6}),
                ("contraction", "contraction", {"samples": 10 ** 6, "K": 100., "grid": 32}),
                ("contraction_sweep", "contraction-sweep", {"samples": 10 ** 5, "grid": 8}),
                ("contraction_pierrehumbert", "contraction",
                 {"model": "pierrehumbert", "A": 100., "samples": 10 ** 6, "grid": 32}),
                ("contraction_sweep_pierrehumbert", "contraction-sweep",
                 {"model": "pierrehumbert", "samples": 10 ** 5, "grid": 8}),
                ("quadrature", "quadrature", {"samples": 10 ** 7, "trials": 100}),
                ("claim-probe", "claim-probe", {}),
                ("drift", "drift", {"samples": 10 ** 6, "K": 100.}),
                ("apriori", "apriori", {"samples": 10 ** 4}),
                ("lyapunov", "lyapunov", {"K": 100., "steps": 10 ** 6, "realizations": 64}),
                ("lyapunov_4pi", "lyapunov", {"K": 4 * math.pi, "steps": 10 ** 6, "realizations": 64}),
                ("correlations", "correlations", {"K": 4 * math.pi, "steps": 50, "realizations": 10}),
                ("ranks", "ranks", {}), ("dets", "dets", {}), ("fixedpoints", "fixedpoints", {}),
                ("control", "control", {"mode": "two-point", "trials": 100}),
                ("control_projective", "control", {"mode": "projective", "trials": 100}),
                ("mix", "mix", {"K": 4 * math.pi, "steps": 200, "realizations": 10, "grid": 256}),
                ("dissipate", "dissipate", {"K": 4 * math.pi, "nu": 1e-4, "nu_sweep": [1e-5], "steps": 200,
                                            "realizations": 10, "grid": 256}),
                ("rates", "rates", {"K": 10.}),
                ("harris", "harris", {"samples": 10 ** 4}),
                ("shears", "shears", {})]
    samples = min(config.samples, QUICK_SAMPLES)
    steps = min(config.steps, QUICK_STEPS)
    return [("volume", "volume", {"samples": samples}),
            ("contraction", "contraction", {"samples": samples, "K": 100., "grid": 8}),
            ("contraction_sweep", "contraction-sweep", {"samples": min(samples, 10 ** 4), "grid": 8}),
            ("contraction_pierrehumbert", "contraction",
             {"model": "pierrehumbert", "A": 100., "samples": samples, "grid": 8}),
            ("contraction_sweep_pierrehumbert", "contraction-sweep",
             {"model": "pierrehumbert", "samples": min(samples, 10 ** 4), "grid": 8}),
            ("quadrature", "quadrature", {"samples": samples, "trials": 10}),
            ("claim-probe", "claim-probe", {}),
            ("drift", "drift", {"samples": samples, "K": 100.}),
            ("apriori", "apriori", {"samples": min(samples, 10 ** 3)}),
            ("lyapunov", "lyapunov", {"K": 100., "steps": 10 ** 4, "realizations": 8}),
            ("lyapunov_4pi", "lyapunov", {"K": 4 * math.pi, "steps": 10 ** 4, "realizations": 8}),
            ("correlations", "correlations", {"K": 4 * math.pi, "steps": min(steps, 20), "realizations": 2,
                                              "grid": 128}),
            ("ranks", "ranks", {}), ("dets", "dets", {}), ("fixedpoints", "fixedpoints", {}),
            ("control", "control", {"mode": "two-point", "trials": 10}),
            ("control_projective", "control", {"mode": "projective", "trials": 10}),
            ("mix", "mix", {"K": 4 * math.pi, "steps": steps, "realizations": 2, "grid": 128}),
            ("dissipate", "dissipate", {"K": 4 * math.pi, "nu": 1e-4, "nu_sweep": [1e-5], "steps": steps,
                                        "realizations": 2, "grid": 128}),
            ("rates", "rates", {"K": 10.}),
            ("harris", "harris", {"samples": 10 ** 3}),
            ("shears", "shears", {})]


def suite(profile="quick", config=None, verbose=False):
    """
    Run the acceptance battery; 'quick' caps samples at 1e5 and steps at 50.
    :return: RunManifest aggregating every run's checks as '<label>/<check>'.
    """
    start = time.time()
    config = config if config is not None else ExperimentConfig()
    if profile not in ("quick", "full"):
        raise ConfigError("'profile' must be 'quick' or 'full'; '{0}' is not recognized".format(profile))
    checks, files, errors = collections.OrderedDict(), [], []
    for label, subcommand, overrides in _profile_overrides(config, profile):
        manifest = run(subcommand, config.replace(profile=profile, **overrides), verbose=verbose, label=label)
        for key, value in manifest.checks.items():
            checks["{0}/{1}".format(label, key)] = value
        files.extend(manifest.files)
        if manifest.error:
            errors.append("{0}: {1}".format(label, manifest.error))
            checks["{0}/completed".format(label)] = False
    status = "pass" if all(checks.values()) else "fail"
    manifest = RunManifest(config.replace(profile=profile)._asdict(), __version__, time.time() - start, checks,
                           files, status, "; ".join(errors) or None)
    write_json(manifest._asdict(), os.path.join(config.out, "suite_{0}_manifest.json".format(profile)))
    return manifest
