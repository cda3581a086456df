import json
import tempfile
from pathlib import Path
from unittest import mock

from django.test import SimpleTestCase, override_settings

from rate_lab.utils import ERROR_COLUMNS, write_csv
from splitflow.exceptions import NumericalFailure
from . import selftest
from .constants import EXPERIMENT_MS
from .serializers import ExperimentConfigSerializer
from .services import RUNNERS, merge_overrides, run

SMALL_PATH_CONFIG = {
    "model": {"K": 16},
    "grid": {"n": [2, 4, 8], "m": 16},
    "norm": {"gamma": 0.1},
    "mc": {"M": 8},
}


class CliTestCase(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def write_config(self, data, name="config.json"):
        path = self.tmp / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)

    def summary(self, out, stem):
        return json.loads((Path(out) / f"{stem}.json").read_text(encoding="utf-8"))


class RunTests(CliTestCase):
    def test_selftest_exits_zero(self):
        self.assertEqual(run(["selftest", "--out", str(self.tmp)]), 0)
        data = self.summary(self.tmp, "selftest")
        self.assertTrue(data["pass"])
        self.assertEqual(data["failed"], [])

    def test_failed_selftest_exits_one(self):
        with mock.patch.object(selftest, "CHECKS", [("siempre falla", lambda: False)]):
            self.assertEqual(run(["selftest", "--out", str(self.tmp)]), 1)

    def test_ms_sweep_default_heat_config(self):
        self.assertEqual(run(["ms-sweep", "--out", str(self.tmp)]), 0)
        data = self.summary(self.tmp, "ms-sweep")
        self.assertGreaterEqual(data["slope"], 0.45)
        self.assertLessEqual(data["slope"], 0.55)
        self.assertAlmostEqual(data["theta_max"], 0.5)
        self.assertTrue(data["pass"])
        self.assertLessEqual({"experiment", "theta_max", "slope", "r2", "pass", "runtime_s"}, set(data))

    def test_emitted_csv_round_trips_through_fit(self):
        out = self.tmp / "ms"
        run(["ms-sweep", "--out", str(out)])
        fit_out = self.tmp / "fit"
        self.assertEqual(run(["fit", "--input", str(out / "ms-sweep.csv"), "--out", str(fit_out)]), 0)
        self.assertAlmostEqual(self.summary(fit_out, "fit")["slope"], self.summary(out, "ms-sweep")["slope"], places=12)

    def test_fit_exact_power_law(self):
        source = write_csv(
            self.tmp / "power.csv",
            ERROR_COLUMNS,
            ([n, 2.5 * n ** -0.375, 0.0, 0.0, 0.0, 0.0] for n in (4, 8, 16, 32, 64, 128)),
        )
        self.assertEqual(run(["fit", "--input", str(source), "--out", str(self.tmp)]), 0)
        data = self.summary(self.tmp, "fit")
        self.assertAlmostEqual(data["slope"], 0.375, delta=1e-12)
        self.assertTrue(data["pass"])

    def test_fit_requires_input(self):
        self.assertEqual(run(["fit", "--out", str(self.tmp)]), 2)

    def test_infeasible_exponents_exit_two(self):
        config = self.write_config({"norm": {"alpha": 0.6}})
        self.assertEqual(run(["path-sweep", "--config", config, "--out", str(self.tmp)]), 2)
        config = self.write_config({"counterexample": {"r": 0.6}})
        self.assertEqual(run(["counterexample", "--config", config, "--out", str(self.tmp)]), 2)
        config = self.write_config({"model": {"sigma_E": -0.2}})
        self.assertEqual(run(["heat-demo", "--config", config, "--out", str(self.tmp)]), 2)

    def test_malformed_input_exit_two(self):
        bad = self.tmp / "bad.json"
        bad.write_text("{model: ", encoding="utf-8")
        self.assertEqual(run(["ms-sweep", "--config", str(bad), "--out", str(self.tmp)]), 2)
        self.assertEqual(run(["ms-sweep", "--config", str(self.tmp / "missing.json")]), 2)
        self.assertEqual(run(["ms-sweep", "--unknown-flag"]), 2)
        self.assertEqual(run(["no-such-experiment"]), 2)

    def test_numerical_failure_exit_three(self):
        def boom(data):
            raise NumericalFailure("la cuadratura no convergió")

        with mock.patch.dict(RUNNERS, {EXPERIMENT_MS: boom}):
            self.assertEqual(run(["ms-sweep", "--out", str(self.tmp)]), 3)

    def test_path_sweep_csv_is_byte_identical(self):
        config = self.write_config(SMALL_PATH_CONFIG)
        outputs = []
        for name, threads in (("a", "1"), ("b", "1"), ("c", "3")):
            out = self.tmp / name
            self.assertEqual(run(["path-sweep", "--config", config, "--seed", "42",
                                  "--threads", threads, "--out", str(out)]), 0)
            outputs.append((out / "path-sweep.csv").read_bytes())
        self.assertEqual(outputs[0], outputs[1])
        self.assertEqual(outputs[0], outputs[2])
        self.assertTrue(outputs[0].startswith(b"# splitflow-v1\n"))

    def test_seed_changes_output(self):
        config = self.write_config(SMALL_PATH_CONFIG)
        run(["path-sweep", "--config", config, "--seed", "1", "--out", str(self.tmp / "a")])
        run(["path-sweep", "--config", config, "--seed", "2", "--out", str(self.tmp / "b")])
        self.assertNotEqual(
            (self.tmp / "a" / "path-sweep.csv").read_bytes(),
            (self.tmp / "b" / "path-sweep.csv").read_bytes(),
        )
        self.assertEqual(self.summary(self.tmp / "b", "path-sweep")["seed"], 2)


class PrecedenceTests(SimpleTestCase):
    @override_settings(SPLITFLOW_SEED=None)
    def test_file_value_without_overrides(self):
        merged = merge_overrides({"mc": {"seed": 5}}, experiment="path-sweep")
        self.assertEqual(merged["mc"]["seed"], 5)
        self.assertEqual(merged["experiment"], "path-sweep")

    @override_settings(SPLITFLOW_SEED="11")
    def test_environment_beats_file(self):
        merged = merge_overrides({"mc": {"seed": 5}}, experiment="path-sweep")
        self.assertEqual(merged["mc"]["seed"], 11)

    @override_settings(SPLITFLOW_SEED="11")
    def test_flag_beats_environment(self):
        merged = merge_overrides({"mc": {"seed": 5}}, experiment="path-sweep", seed=3, threads=2, out="/tmp/x")
        self.assertEqual(merged["mc"]["seed"], 3)
        self.assertEqual(merged["mc"]["threads"], 2)
        self.assertEqual(merged["output"]["dir"], "/tmp/x")

    def test_file_is_not_mutated(self):
        data = {"mc": {"seed": 5}}
        merge_overrides(data, experiment="ms-sweep", seed=9)
        self.assertEqual(data, {"mc": {"seed": 5}})

    @override_settings(SPLITFLOW_SEED=None, SPLITFLOW_DEFAULT_SEED=777)
    def test_default_seed(self):
        serializer = ExperimentConfigSerializer(data=merge_overrides({}, experiment="ms-sweep"))
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data["mc"]["seed"], 777)


class SerializerTests(SimpleTestCase):
    def test_defaults_fill_missing_blocks(self):
        serializer = ExperimentConfigSerializer(data={"experiment": "ms-sweep"})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        data = serializer.validated_data
        self.assertEqual(data["model"]["K"], 4096)
        self.assertEqual(data["model"]["sigma_E"], -0.3)
        self.assertEqual(data["grid"]["n"], [4, 8, 16, 32, 64, 128, 256, 512, 1024])
        self.assertEqual(data["counterexample"]["n"], [4, 5, 6, 7, 8])

    def test_heat_constraint_is_named(self):
        serializer = ExperimentConfigSerializer(
            data={"experiment": "heat-demo", "norm": {"gamma": 0.2, "delta_space": 0.1}})
        self.assertFalse(serializer.is_valid())
        self.assertIn("γ+δ+θ<1/4", serializer.errors)

    def test_divisibility_is_named(self):
        serializer = ExperimentConfigSerializer(
            data={"experiment": "path-sweep", "grid": {"n": [4, 8], "m": 12}})
        self.assertFalse(serializer.is_valid())
        self.assertIn("n|m", serializer.errors)

    def test_profile_constraint_is_named(self):
        serializer = ExperimentConfigSerializer(
            data={"experiment": "counterexample", "counterexample": {"u": 1.5}})
        self.assertFalse(serializer.is_valid())
        self.assertIn("u>2/p", serializer.errors)

    def test_custom_spectrum_needs_eigenvalues(self):
        serializer = ExperimentConfigSerializer(
            data={"experiment": "ms-sweep", "model": {"spectrum": "custom"}})
        self.assertFalse(serializer.is_valid())
        self.assertIn("model", serializer.errors)

    def test_custom_spectrum_accepted(self):
        serializer = ExperimentConfigSerializer(data={
            "experiment": "ms-sweep",
            "model": {"spectrum": "custom", "eigenvalues": [-1.0, -2.0], "sigma_E": 0.0},
            "grid": {"n": [1, 2, 4]},
        })
        self.assertTrue(serializer.is_valid(), serializer.errors)


class SelftestTests(SimpleTestCase):
    def test_every_check_passes(self):
        for name, ok in selftest.run_selftest():
            with self.subTest(check=name):
                self.assertTrue(ok)
