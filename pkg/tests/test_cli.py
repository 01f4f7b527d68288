# -*- coding: utf-8 -*-

from .context import CONFIG_DIR, cavitytally

import contextlib
import csv
import io
import json
import os
import tempfile
import unittest

from cavitytally import cli
from cavitytally.emitters import Emitter, checksum
from cavitytally.moments import MomentEstimate

N1 = os.path.join(CONFIG_DIR, "n1.toml")
N100 = os.path.join(CONFIG_DIR, "n100_moments.toml")


def _main(*argv):
    """Exit code of the command line, with stdout and stderr captured."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli.main(list(argv))
    return code, out.getvalue(), err.getvalue()


def _read_json(dirname, filename):
    with open(os.path.join(dirname, filename), "rt", encoding="utf-8") as f:
        return json.load(f)


def _read_bytes(dirname, filename):
    with open(os.path.join(dirname, filename), "rb") as f:
        return f.read()


class CommandLineTestSuite(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.out = self.tmpdir.name

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_commands_needing_config(self):
        for command in ("spectrum", "moments", "count"):
            self.assertEqual(2, _main(command, "--out", self.out)[0], command)
        self.assertEqual(2, _main("spectrum", "--config", os.path.join(self.out, "absent.toml"), "--out", self.out)[0])

    def test_spectrum_outputs_and_manifest(self):
        code, stdout, _ = _main("spectrum", "--config", N1, "--out", self.out)
        self.assertEqual(0, code)
        self.assertIn("sticks.csv", stdout)
        manifest = _read_json(self.out, "manifest.json")
        self.assertEqual("spectrum", manifest["command"])
        self.assertEqual(cavitytally.__version__, manifest["tool_version"])
        self.assertEqual(["sticks.csv", "sidebands.json"], [o["file"] for o in manifest["outputs"]])
        for output in manifest["outputs"]:
            self.assertEqual(checksum(self.out, output["file"]), output["sha256"])
        sidebands = _read_json(self.out, "sidebands.json")
        self.assertAlmostEqual(-1.0, sidebands["red_mean"], delta=1e-2)
        self.assertAlmostEqual(1.0, sidebands["blue_mean"], delta=1e-2)
        with open(os.path.join(self.out, "sticks.csv"), "rt", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        self.assertEqual(["omega", "weight"], rows[0])

    def test_manifest_replays_to_identical_output(self):
        self.assertEqual(0, _main("spectrum", "--config", N1, "--out", self.out)[0])
        again = os.path.join(self.out, "again")
        self.assertEqual(0, _main("spectrum", "--config", os.path.join(self.out, "manifest.json"), "--out", again)[0])
        self.assertEqual(_read_bytes(self.out, "sticks.csv"), _read_bytes(again, "sticks.csv"))

    def test_moments_manifest_replays_seed_and_sampling_options(self):
        code, _, _ = _main("moments", "--config", N100, "--seed", "7", "--samples", "2000", "--batches", "10", "--out", self.out)
        self.assertEqual(0, code)
        manifest = os.path.join(self.out, "manifest.json")
        again = os.path.join(self.out, "again")
        self.assertEqual(0, _main("moments", "--config", manifest, "--out", again)[0])
        for filename in ("moment_estimates.csv", "predictions.csv"):
            self.assertEqual(_read_bytes(self.out, filename), _read_bytes(again, filename), filename)
        self.assertEqual(7, _read_json(again, "manifest.json")["seed"])
        reseeded = os.path.join(self.out, "reseeded")
        self.assertEqual(0, _main("moments", "--config", manifest, "--seed", "8", "--out", reseeded)[0])
        self.assertEqual(8, _read_json(reseeded, "manifest.json")["seed"])
        self.assertNotEqual(_read_bytes(self.out, "moment_estimates.csv"), _read_bytes(reseeded, "moment_estimates.csv"))

    def test_degenerate_omega_range_is_a_configuration_error(self):
        code, _, stderr = _main("spectrum", "--config", N1, "--kappa", "0.05", "--omega-range", "0", "1", "0", "--out", self.out)
        self.assertEqual(2, code)
        self.assertIn("omega_range", stderr)

    def test_resolved_parameters_are_logged(self):
        with self.assertLogs("cavitytally.cli", level="INFO") as cm:
            self.assertEqual(0, _main("spectrum", "--config", N1, "--out", self.out)[0])
        self.assertTrue(any("n_atoms=1" in line for line in cm.output))

    def test_grid_halfwidth_flag(self):
        code, _, _ = _main("spectrum", "--config", N1, "--backend", "grid", "--eta", "0.5", "--grid-halfwidth", "6", "--out", self.out)
        self.assertEqual(0, code)
        self.assertEqual(6.0, _read_json(self.out, "manifest.json")["params"]["grid_halfwidth"])

    def test_kappa_flag_adds_broadened_spectrum(self):
        self.assertEqual(0, _main("spectrum", "--config", N1, "--kappa", "0.05", "--out", self.out)[0])
        self.assertTrue(os.path.exists(os.path.join(self.out, "broadened.csv")))
        self.assertEqual(0.05, _read_json(self.out, "manifest.json")["params"]["kappa_ext"])

    def test_flag_overrides_reach_manifest(self):
        self.assertEqual(0, _main("spectrum", "--config", N1, "--n-atoms", "2", "--out", self.out)[0])
        self.assertEqual(2, _read_json(self.out, "manifest.json")["params"]["n_atoms"])

    def test_budget_exceeded_is_a_computation_error(self):
        code, _, stderr = _main("spectrum", "--config", N1, "--max-nonzeros", "10", "--out", self.out)
        self.assertEqual(1, code)
        self.assertIn("BudgetExceededError", stderr)

    def test_moments_predictions(self):
        code, _, _ = _main("moments", "--config", N100, "--samples", "5000", "--batches", "10", "--format", "json", "--out", self.out)
        self.assertEqual(0, code)
        predictions = _read_json(self.out, "predictions.json")
        self.assertEqual(8, len(predictions["rows"]))
        self.assertIn("perturbative_mc", [row[1] for row in predictions["rows"]])
        estimates = _read_json(self.out, "moment_estimates.json")
        self.assertEqual(5000, estimates["n_samples"])

    def test_count(self):
        code, _, _ = _main("count", "--config", N100, "--n", "8", "--out", self.out)
        self.assertEqual(0, code)
        report = _read_json(self.out, "counting_report.json")
        self.assertEqual(8, report["n_atoms"])
        self.assertEqual("series", report["method"])
        self.assertIn(report["n_max_regime"], ("extrinsic", "intrinsic", "balanced"))

    def test_figure_sweeps(self):
        self.assertEqual(0, _main("fig3", "--eps-points", "20", "--out", self.out)[0])
        with open(os.path.join(self.out, "figure3.csv"), "rt", encoding="utf-8") as f:
            self.assertEqual(21, len(list(csv.reader(f))))
        self.assertIsNotNone(_read_json(self.out, "figure3_crossover.json")["crossover_epsilon"])
        self.assertEqual(0, _main("fig4", "--eps-points", "10", "--out", self.out)[0])
        with open(os.path.join(self.out, "figure4.csv"), "rt", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        self.assertEqual(["epsilon", "n_max_kappa_0", "n_max_kappa_0.05", "n_max_kappa_0.1", "n_max_kappa_0.2"], rows[0])
        self.assertEqual("inf", rows[-1][1])

    def test_validate_subset(self):
        code, stdout, _ = _main("validate", "--only", "counting_endpoints", "figure4_n_max", "--out", self.out)
        self.assertEqual(0, code)
        self.assertIn("2/2 checks passed", stdout)


class EmitterTestSuite(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_non_finite_values(self):
        emitter = Emitter(self.tmpdir.name, "csv")
        emitter.write_table("table", ("x", "y"), [(float("inf"), None)])
        emitter.write_summary("summary", [("n_max", float("inf")), ("estimate", MomentEstimate(1.5, 0.25))], as_json=True)
        with open(os.path.join(self.tmpdir.name, "table.csv"), "rt", encoding="utf-8") as f:
            self.assertEqual(["inf", ""], list(csv.reader(f))[1])
        summary = _read_json(self.tmpdir.name, "summary.json")
        self.assertIsNone(summary["n_max"])
        self.assertEqual({"estimate": 1.5, "std_error": 0.25}, summary["estimate"])

    def test_floats_survive_text(self):
        emitter = Emitter(self.tmpdir.name, "csv")
        value = 0.1 + 0.2
        emitter.write_table("table", ("x",), [(value,)])
        with open(os.path.join(self.tmpdir.name, "table.csv"), "rt", encoding="utf-8") as f:
            self.assertEqual(value, float(list(csv.reader(f))[1][0]))

    def test_rejects_unknown_format(self):
        with self.assertRaises(ValueError):
            Emitter(self.tmpdir.name, "xml")


if __name__ == "__main__":
    unittest.main()
