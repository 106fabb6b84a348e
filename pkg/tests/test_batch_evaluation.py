"""
Unit tests of the Monte-Carlo studies and their reports
"""

import json
import math
import os
import shutil
import tempfile
import unittest
from unittest import mock

import numpy as np
import pytest

from n2sid.data_structure.configuration import N2SIDConfiguration
from n2sid.data_structure.errors import ConfigurationError
from n2sid.data_structure.report import TrialResult, BenchReport
from n2sid.data_structure.type import TypeStudy
import n2sid.utility.batch_evaluation as utils_batch
import n2sid.utility.logger as util_logger


def _smoke_config() -> N2SIDConfiguration:
    current_dir = os.path.dirname(__file__)
    config = N2SIDConfiguration.load(
        os.path.join(current_dir, "../config_files", "smoke.yaml"), "smoke"
    )
    util_logger.initialize_logger(config)
    return config


class TestEigenvalueDispersion(unittest.TestCase):
    def test_matching(self):
        self.assertAlmostEqual(
            utils_batch.eigenvalue_dispersion([0.5, 0.1], [0.1, 0.5]), 0.0
        )
        self.assertAlmostEqual(
            utils_batch.eigenvalue_dispersion([0.5 + 0.1j, 0.5 - 0.1j], [0.5, 0.5]), 0.1
        )

    def test_different_counts(self):
        self.assertAlmostEqual(
            utils_batch.eigenvalue_dispersion([0.0, 0.7, 0.3], [0.0, 0.7]), 0.0
        )
        self.assertTrue(math.isnan(utils_batch.eigenvalue_dispersion([], [0.5])))


class TestReport(unittest.TestCase):
    def _trial(self, trial, n2sid_fit, n4sid_fit, failure=None):
        return TrialResult(
            trial=trial,
            master_seed=0,
            n2sid_fit=n2sid_fit,
            n4sid_fit=n4sid_fit,
            n2sid_input_digest="a",
            n4sid_input_digest="a",
            failure=failure,
        )

    def test_summary_rates(self):
        report = BenchReport(
            study="open_loop",
            master_seed=0,
            trials=[
                self._trial(0, 80.0, 70.0),
                self._trial(1, 60.0, 70.0),
                self._trial(2, 50.0, 50.0),
                self._trial(3, -5.0, 20.0),
                self._trial(4, math.nan, math.nan, failure="GenerationError: budget"),
            ],
        )
        summary = report.summary()
        self.assertEqual(summary["succeeded"], 4)
        self.assertEqual(summary["failed"], 1)
        self.assertEqual((summary["wins"], summary["losses"], summary["ties"]), (1, 2, 1))
        self.assertAlmostEqual(
            summary["win_rate"] + summary["loss_rate"] + summary["tie_rate"], 1.0
        )
        self.assertEqual(summary["negative_fits"], 1)
        self.assertAlmostEqual(summary["n2sid_mean_fit"], 46.25)
        low, high = summary["fit_gap_ci90"]
        self.assertLessEqual(low, high)
        self.assertTrue(summary["all_fair"])

    def test_json_excludes_timings(self):
        trial = self._trial(0, 90.0, 80.0)
        trial.timings["n2sid"] = 1.5
        report = BenchReport(study="open_loop", master_seed=3, trials=[trial])
        data = json.loads(report.to_json())
        self.assertNotIn("timings", data["trials"][0])
        self.assertEqual(data["master_seed"], 3)
        self.assertTrue(report.to_json().endswith("\n"))

    def test_unfair_trial(self):
        trial = self._trial(0, 90.0, 80.0)
        trial.n4sid_input_digest = "b"
        self.assertFalse(trial.fair)
        self.assertFalse(BenchReport("open_loop", 0, [trial]).summary()["all_fair"])


class TestStudies(unittest.TestCase):
    def setUp(self) -> None:
        super().setUp()
        self.config = _smoke_config()
        self.path_output = tempfile.mkdtemp()

    def tearDown(self) -> None:
        shutil.rmtree(self.path_output, ignore_errors=True)
        super().tearDown()

    def test_open_loop_study_is_deterministic(self):
        first = utils_batch.run_open_loop_study(self.config)
        second = utils_batch.run_open_loop_study(self.config)
        self.assertEqual(len(first.trials), 2)
        self.assertEqual(first.digest(), second.digest())
        for trial in first.trials:
            self.assertIsNone(trial.failure)
            self.assertTrue(trial.fair)
            self.assertIn("n2sid", trial.timings)
        self.assertNotEqual(
            first.trials[0].identification_digest, first.trials[1].identification_digest
        )

    def test_noise_free_study_is_exact(self):
        config = N2SIDConfiguration()
        util_logger.initialize_logger(config)
        config.open_loop.noise_std = 0.0
        config.bench.num_worker = 1
        report = utils_batch.run_open_loop_study(config, trials=2)
        for trial in report.trials:
            self.assertIsNone(trial.failure)
            self.assertGreaterEqual(trial.n2sid_fit, 99.0, trial.trial)
            self.assertGreaterEqual(trial.n4sid_fit, 99.0, trial.trial)

    def test_closed_loop_fixes_order(self):
        report = utils_batch.run_closed_loop_study(self.config, trials=1)
        trial = report.trials[0]
        self.assertIsNone(trial.failure)
        self.assertEqual((trial.n2sid_order, trial.n4sid_order), (2, 2))
        np.testing.assert_allclose(sorted(np.real(trial.true_eigs)), [0.0, 0.7], atol=1e-12)
        self.assertIsNone(self.config.identification.order)

    def test_failures_are_recorded(self):
        self.config.open_loop.max_draws = 0
        report = utils_batch.run_study(self.config, TypeStudy.OPEN_LOOP)
        summary = report.summary()
        self.assertEqual(summary["failed"], 2)
        self.assertTrue(math.isnan(summary["win_rate"]))
        self.assertTrue(report.trials[0].failure.startswith("GenerationError"))

    def test_invalid_trial_count(self):
        with pytest.raises(ConfigurationError):
            utils_batch.run_study(self.config, TypeStudy.OPEN_LOOP, trials=0)

    def test_save_study(self):
        report = utils_batch.run_open_loop_study(self.config, trials=1)
        paths = utils_batch.save_study(report, self.path_output, save_svg=True)
        for name in ("report", "scatter", "eigenvalues", "timings", "fit_scatter"):
            self.assertTrue(os.path.exists(paths[name]), name)
        with open(paths["scatter"]) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0].split(",")[:3], ["trial", "n2sid_fit", "n4sid_fit"])
        self.assertEqual(len(lines), 2)
        with open(paths["report"]) as f:
            self.assertEqual(json.load(f)["study"], "open_loop")


class TestWorkers(unittest.TestCase):
    def test_resolve_num_worker(self):
        config = N2SIDConfiguration()
        config.bench.num_worker = 8
        with mock.patch.dict(os.environ, {utils_batch.ENV_THREADS: "3"}):
            self.assertEqual(utils_batch.resolve_num_worker(config, 100), 3)
        with mock.patch.dict(os.environ, {utils_batch.ENV_THREADS: ""}):
            self.assertEqual(utils_batch.resolve_num_worker(config, 5), 5)
        with mock.patch.dict(os.environ, {utils_batch.ENV_THREADS: "many"}):
            with pytest.raises(ConfigurationError):
                utils_batch.resolve_num_worker(config, 5)
