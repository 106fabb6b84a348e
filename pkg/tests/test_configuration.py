"""
Unit tests of the configuration
"""

import os
import tempfile
import unittest

import pytest

from n2sid.data_structure.configuration import N2SIDConfiguration
from n2sid.data_structure.errors import ConfigurationError


class TestConfiguration(unittest.TestCase):
    def setUp(self) -> None:
        super().setUp()
        self.current_dir = os.path.dirname(__file__)

    def test_defaults(self):
        config = N2SIDConfiguration()
        config.validate()
        self.assertEqual(config.identification.s, 15)
        self.assertEqual(config.identification.lambda_count, 20)
        self.assertEqual(config.identification.sketch_width, 22)
        self.assertEqual(config.bench.trials, 100)

    def test_load(self):
        for name in ("open_loop_study", "closed_loop_study", "smoke"):
            config = N2SIDConfiguration.load(
                os.path.join(self.current_dir, "../config_files", f"{name}.yaml")
            )
            config.validate()
            self.assertEqual(config.general.name_run, name)
            self.assertTrue(config.general.path_output.endswith(name))
        smoke = N2SIDConfiguration.load(
            os.path.join(self.current_dir, "../config_files", "smoke.yaml"), "run"
        )
        self.assertEqual(smoke.identification.s, 5)
        self.assertEqual(smoke.solver.max_iters, 500)
        self.assertEqual(smoke.general.name_run, "run")

    def test_unsupported_files(self):
        with pytest.raises(ConfigurationError):
            N2SIDConfiguration.load("config.json")
        with pytest.raises(ConfigurationError):
            N2SIDConfiguration.load("does_not_exist.yaml")

    def test_invalid_yaml_content(self):
        with tempfile.NamedTemporaryFile("w", suffix=".yaml", delete=False) as f:
            f.write("identification:\n  s: many\n")
        try:
            with pytest.raises(ConfigurationError):
                N2SIDConfiguration.load(f.name)
        finally:
            os.remove(f.name)

    def test_item_access(self):
        config = N2SIDConfiguration()
        config.identification["s"] = 7
        self.assertEqual(config["identification"]["s"], 7)
        with pytest.raises(KeyError):
            config.identification["block_rows"]
        with pytest.raises(KeyError):
            config.identification["block_rows"] = 3

    def test_validation(self):
        cases = [
            ("identification", "s", 0),
            ("identification", "rank_floor", 0.0),
            ("identification", "lambda_count", 1),
            ("identification", "lambda_lo", 1e5),
            ("identification", "fit_mode", "smoothing"),
            ("identification", "sketch_width", 0),
            ("solver", "max_iters", 0),
            ("solver", "penalty", -1.0),
            ("baseline", "order", 15),
            ("bench", "trials", 0),
        ]
        for section, key, value in cases:
            config = N2SIDConfiguration()
            config[section][key] = value
            with pytest.raises(ConfigurationError):
                config.validate()

    def test_invalid_plant(self):
        config = N2SIDConfiguration()
        config.closed_loop.B = [[1.0]]
        with pytest.raises(ConfigurationError):
            config.validate()
