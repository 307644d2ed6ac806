import os
import json
import math
import shutil
import tempfile
from unittest import TestCase

from chirikov import __version__
from chirikov.data import read_json, read_csv, file_digest
from chirikov.runner import (SUBCOMMANDS, ConfigError, ExperimentConfig, RunManifest, load_config, run, suite,
                             exit_code, control_trial, _profile_overrides)
from chirikov.utils.rng import RngStreamSpec


class TestExperimentConfig(TestCase):
    def test_defaults(self):
        config = ExperimentConfig()
        self.assertEqual(config.model, "chirikov")
        self.assertAlmostEqual(config.K, 4 * math.pi)
        self.assertEqual(config.samples, 10 ** 5)

    def test_json_round_trip(self):
        config = ExperimentConfig(K=30., seed=7, constants={"C": 2.})
        self.assertEqual(ExperimentConfig.from_json(config.to_json()), config)
        self.assertEqual(config.digest(), ExperimentConfig.from_json(config.to_json()).digest())
        self.assertNotEqual(config.digest(), ExperimentConfig(K=31.).digest())

    def test_errors_name_the_field(self):
        for kwargs, field in (({"p": 0.5}, "'p'"), ({"model": "other"}, "'model'"), ({"grid": 0}, "'grid'"),
                              ({"seed": -1}, "'seed'"), ({"constants": {"C7": 1.}}, "'constants'"),
                              ({"steps": "many"}, "'steps'"), ({"colour": 1}, "colour")):
            with self.assertRaisesRegex(ConfigError, field):
                ExperimentConfig(**kwargs)
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_json("[1, 2]")
        self.assertTrue(issubclass(ConfigError, ValueError))

    def test_nu_sweep_accepts_a_scalar(self):
        self.assertEqual(ExperimentConfig(nu_sweep=1e-5).nu_sweep, [1e-5])
        self.assertEqual(ExperimentConfig(nu_sweep=[1e-5, 1e-6]).nu_sweep, [1e-5, 1e-6])
        with self.assertRaisesRegex(ConfigError, "nu_sweep"):
            ExperimentConfig(nu_sweep=[-1.])

    def test_precedence(self):
        directory = tempfile.mkdtemp()
        try:
            path = os.path.join(directory, "config.json")
            with open(path, "w") as opened_file:
                json.dump({"K": 20., "seed": 3}, opened_file)
            config = load_config(path, K=50., seed=None)
            self.assertEqual(config.K, 50.)
            self.assertEqual(config.seed, 3)
            self.assertEqual(config.steps, 200)
            with self.assertRaises(ConfigError):
                load_config(os.path.join(directory, "missing.json"))
        finally:
            shutil.rmtree(directory)

    def test_streams_are_distinct_per_subcommand(self):
        config = ExperimentConfig()
        self.assertEqual(len({config.stream(name) for name in SUBCOMMANDS}), len(SUBCOMMANDS))


class TestRun(TestCase):
    def setUp(self):
        self.directory = tempfile.mkdtemp()
        self.config = ExperimentConfig(out=self.directory, workers=1, K_values=[10.])

    def tearDown(self):
        shutil.rmtree(self.directory)

    def _check_manifest(self, manifest, subcommand):
        self.assertIsInstance(manifest, RunManifest)
        self.assertEqual(manifest.version, __version__)
        stored = read_json(os.path.join(self.directory, "{0}_manifest.json".format(subcommand)))
        self.assertEqual(stored["status"], manifest.status)
        for item in manifest.files:
            self.assertEqual(item["sha256"], file_digest(item["path"]))

    def test_rates(self):
        manifest = run("rates", self.config.replace(K=10.))
        self._check_manifest(manifest, "rates")
        self.assertEqual(manifest.status, "pass")
        self.assertEqual(exit_code(manifest), 0)
        table = read_csv(os.path.join(self.directory, "rates_table.csv"))
        self.assertIn("p_K", list(table["name"]))
        summary = read_json(os.path.join(self.directory, "rates_summary.json"))
        self.assertEqual(summary["config_digest"], self.config.replace(K=10., subcommand="rates").digest())
        self.assertEqual(summary["normalization"], "fft2/n^2")

    def test_structure_subcommands(self):
        for subcommand in ("ranks", "dets", "fixedpoints"):
            manifest = run(subcommand, self.config)
            self._check_manifest(manifest, subcommand)
            self.assertEqual(manifest.status, "pass", manifest.checks)

    def test_one_point_control(self):
        manifest = run("control", self.config.replace(mode="one-point", trials=5))
        self.assertEqual(manifest.status, "pass")
        results = read_json(os.path.join(self.directory, "control_results.json"))
        self.assertEqual([row["trial"] for row in results], list(range(5)))

    def test_control_trial_is_reproducible(self):
        stream = RngStreamSpec(0, 8, (1,))
        self.assertEqual(control_trial("one-point", 10., 0.01, stream), control_trial("one-point", 10., 0.01, stream))

    def test_bad_configuration_exits_2(self):
        manifest = run("rates", {"p": 0.7, "out": self.directory})
        self.assertEqual(manifest.status, "error")
        self.assertEqual(exit_code(manifest), 2)
        self.assertIn("'p'", manifest.error)
        self.assertEqual(exit_code(run("unknown", self.config)), 2)

    def test_quick_profile_caps(self):
        config = ExperimentConfig(samples=10 ** 6, steps=500)
        plan = _profile_overrides(config, "quick")
        overrides = {label: item for label, _, item in plan}
        self.assertTrue(all(item.get("samples", 0) <= 10 ** 5 for item in overrides.values()))
        self.assertTrue(all(item.get("steps", 0) <= 50 for label, item in overrides.items()
                            if not label.startswith("lyapunov")))
        self.assertEqual([label for label, _, _ in plan], [label for label, _, _ in _profile_overrides(config, "full")])
        with self.assertRaises(ConfigError):
            suite("medium", self.config)

    def test_full_profile_writes_every_table(self):
        plan = _profile_overrides(ExperimentConfig(), "full")
        labels = [label for label, _, _ in plan]
        self.assertEqual(len(labels), len(set(labels)))
        self.assertTrue(all(subcommand in SUBCOMMANDS for _, subcommand, _ in plan))
        self.assertEqual({subcommand for _, subcommand, _ in plan}, set(SUBCOMMANDS))
        overrides = {label: (subcommand, item) for label, subcommand, item in plan}
        for label in ("volume", "contraction_sweep", "contraction_sweep_pierrehumbert", "contraction_pierrehumbert",
                      "quadrature", "control_projective", "correlations", "lyapunov_4pi", "harris", "shears"):
            self.assertIn(label, overrides)
        self.assertEqual(overrides["volume"][1]["samples"], 10 ** 6)
        self.assertEqual(overrides["quadrature"][1]["samples"], 10 ** 7)
        self.assertEqual(overrides["control_projective"][1]["mode"], "projective")
        self.assertAlmostEqual(overrides["lyapunov_4pi"][1]["K"], 4 * math.pi)
        self.assertEqual(overrides["contraction_sweep_pierrehumbert"][1]["model"], "pierrehumbert")
        self.assertEqual(overrides["dissipate"][1]["nu"], 1e-4)
        self.assertEqual(overrides["dissipate"][1]["nu_sweep"], [1e-5])

    def test_label_prefixes_outputs(self):
        manifest = run("rates", self.config.replace(K=10.), label="rates_alt")
        self.assertEqual(manifest.status, "pass")
        self._check_manifest(manifest, "rates_alt")
        self.assertTrue(os.path.exists(os.path.join(self.directory, "rates_alt_table.csv")))

    def test_volume(self):
        manifest = run("volume", self.config.replace(samples=2000))
        self._check_manifest(manifest, "volume")
        self.assertEqual(manifest.status, "pass", manifest.checks)
        table = read_csv(os.path.join(self.directory, "volume_table.csv"))
        self.assertEqual(len(table), 2)
        self.assertTrue((table["max_det_error"] <= 1e-12).all())

    def test_quadrature(self):
        manifest = run("quadrature", self.config.replace(samples=10 ** 5, trials=3))
        self._check_manifest(manifest, "quadrature")
        self.assertEqual(manifest.status, "pass", manifest.checks)
        table = read_csv(os.path.join(self.directory, "quadrature_oracle.csv"))
        self.assertEqual(list(table["trial"]), [0, 1, 2])
        self.assertTrue((table["gap"] <= table["error_bound"]).all())

    def test_harris(self):
        manifest = run("harris", self.config.replace(samples=200))
        self._check_manifest(manifest, "harris")
        self.assertEqual(manifest.status, "pass", manifest.checks)
        for suffix in ("example", "sweep", "nested"):
            self.assertTrue(os.path.exists(os.path.join(self.directory, "harris_{0}.csv".format(suffix))))
        example = read_csv(os.path.join(self.directory, "harris_example.csv"))
        self.assertAlmostEqual(example["beta"][0], 0.25)
        self.assertAlmostEqual(example["alpha_bar"][0], 0.9)

    def test_shears(self):
        manifest = run("shears", self.config)
        self._check_manifest(manifest, "shears")
        self.assertEqual(manifest.status, "pass", manifest.checks)
        self.assertIn("strang_ratio", manifest.checks)
        self.assertIn("jacobi_anger", manifest.checks)


class TestCommandLine(TestCase):
    def test_unknown_subcommand(self):
        from experiments.run import main
        with self.assertRaises(SystemExit) as context:
            main("unknown")
        self.assertEqual(context.exception.code, 2)
