import json
import os
import sys
import tempfile
import unittest
from unittest import mock

from freezegun import freeze_time

from cli import EXIT_BUDGET_EXHAUSTED, EXIT_CONVERGED, EXIT_ERROR, main, parse_config, read_config_file
from configuration import Command
from exceptions import UsageError


class TestParseConfig(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write_config(self, text: str) -> str:
        path = os.path.join(self.tmp.name, "run.conf")
        with open(path, "w") as f:
            f.write(text)
        return path

    def test_flags(self):
        sys.stderr.write("🚀 Starting test: test_flags\n")
        sys.stderr.flush()
        config = parse_config(
            ["sensitivity", "--preset", "additive", "--eps-abs", "0.02", "--max-samples", "4096", "--workers", "2"]
        )
        self.assertEqual(config.command, Command.SENSITIVITY)
        self.assertEqual(config.preset, "additive")
        self.assertEqual(config.eps_abs, 0.02)
        self.assertEqual(config.max_samples, 4096)
        self.assertEqual(config.m1, 10)

    def test_invalid_tolerance_is_rejected(self):
        with self.assertRaises(UsageError) as ctx:
            parse_config(["integrate", "--eps-rel", "1.5"])
        self.assertIn("eps_rel", str(ctx.exception))

    def test_unknown_command_and_flag(self):
        with self.assertRaises(UsageError):
            parse_config(["differentiate"])
        with self.assertRaises(UsageError):
            parse_config(["integrate", "--colour", "red"])

    def test_flags_override_the_config_file(self):
        path = self.write_config("# tolerances\neps-abs = 0.02\nm1 = 6  # start small\n\npreset = linear\n")
        config = parse_config(["integrate", "--config", path, "--m1", "8", "--workers", "1"])
        self.assertEqual(config.eps_abs, 0.02)
        self.assertEqual(config.m1, 8)
        self.assertEqual(config.preset, "linear")

    def test_config_file_errors(self):
        with self.assertRaises(UsageError):
            parse_config(["integrate", "--config", self.write_config("colour = red\n")])
        with self.assertRaises(UsageError):
            read_config_file(self.write_config("m1 6\n"))
        with self.assertRaises(UsageError):
            read_config_file(os.path.join(self.tmp.name, "missing.conf"))

    def test_read_config_file(self):
        path = self.write_config("max-samples = 2048\nsubsets = 1;2,3\n")
        self.assertEqual(read_config_file(path), {"max_samples": "2048", "subsets": "1;2,3"})


class TestMain(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.output = os.path.join(self.tmp.name, "report")

    def test_converged_run(self):
        sys.stderr.write("🚀 Starting test: test_converged_run\n")
        sys.stderr.flush()
        argv = ["integrate", "--preset", "constant", "--m1", "6", "--workers", "1", "--output", self.output]
        self.assertEqual(main(argv), EXIT_CONVERGED)
        with open(self.output) as f:
            document = json.load(f)
        self.assertEqual(document["status"], "converged")
        self.assertEqual(document["s_hat"], 3.0)
        self.assertEqual(document["reference"], 3.0)
        self.assertEqual(document["iterations"], 1)

    def test_budget_exhausted(self):
        argv = ["integrate", "--eps-abs", "1e-9", "--m1", "4", "--max-samples", "64", "--output", self.output]
        self.assertEqual(main(argv + ["--workers", "1"]), EXIT_BUDGET_EXHAUSTED)
        with open(self.output) as f:
            document = json.load(f)
        self.assertEqual(document["status"], "budget-exhausted")
        self.assertEqual(document["n_total"], 64)

    def test_errors(self):
        self.assertEqual(main(["integrate", "--eps-rel", "1.5"]), EXIT_ERROR)
        unwritable = os.path.join(self.tmp.name, "missing-dir", "report.json")
        argv = ["integrate", "--preset", "constant", "--m1", "4", "--workers", "1", "--output", unwritable]
        self.assertEqual(main(argv), EXIT_ERROR)
        self.assertFalse(os.path.exists(unwritable))

    @mock.patch("cli.execute", side_effect=RuntimeError("boom"))
    def test_unexpected_errors(self, execute):
        self.assertEqual(main(["integrate", "--workers", "1"]), EXIT_ERROR)
        execute.assert_called_once()

    def test_csv_has_one_row_per_qoi(self):
        argv = ["sensitivity", "--output-format", "csv", "--m1", "6", "--max-samples", "128", "--workers", "2"]
        self.assertEqual(main(argv + ["--output", self.output]), EXIT_BUDGET_EXHAUSTED)
        with open(self.output) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "index,s_hat,s_lo,s_hi,converged")
        self.assertEqual(len(lines), 1 + 2 * 7)
        self.assertTrue(lines[1].startswith("0:0,"))

    @freeze_time("2026-01-01")
    def test_reports_are_reproducible(self):
        outputs = []
        for workers in ("1", "4"):
            path = f"{self.output}-{workers}.json"
            argv = ["posterior-mean", "--m1", "8", "--eps-abs", "0.02", "--seed", "3", "--workers", workers]
            main(argv + ["--output", path])
            with open(path, "rb") as f:
                outputs.append(f.read())
        self.assertEqual(outputs[0], outputs[1])
        self.assertEqual(json.loads(outputs[0])["wall_time"], 0.0)

    def test_convergence_study(self):
        argv = ["convergence", "--preset", "linear", "--dimension", "1", "--study-seeds", "4"]
        argv += ["--study-m-min", "4", "--study-m-max", "6", "--output-format", "csv", "--output", self.output]
        self.assertEqual(main(argv + ["--workers", "1"]), EXIT_CONVERGED)
        with open(self.output) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "kind,n,median_abs_error")
        self.assertEqual(len(lines), 1 + 3 * 3)


if __name__ == "__main__":
    unittest.main()
