import json
import os
import shutil
import tempfile
import unittest

import numpy as np
import pytest

from n2sid.data_structure.base import IdentificationBase
from n2sid.data_structure.configuration import N2SIDConfiguration
from n2sid.data_structure.errors import ConfigurationError
from n2sid.data_structure.n2sid_interface import N2SIDInterface
from n2sid.identification import N2SID, N4SID
import n2sid.utility.general as utils_gen
import n2sid.utility.logger as util_logger


class TestBase(unittest.TestCase):
    def setUp(self) -> None:
        super().setUp()
        current_dir = os.path.dirname(__file__)
        self.config = N2SIDConfiguration.load(
            os.path.join(current_dir, "../config_files", "smoke.yaml"), "smoke"
        )
        util_logger.initialize_logger(self.config)
        self.config.print_configuration_summary()
        self.io = utils_gen.read_io_csv(
            os.path.join(current_dir, "../example_data", "second_order_noise_free.csv")
        )
        self.path_output = tempfile.mkdtemp()

    def tearDown(self) -> None:
        shutil.rmtree(self.path_output, ignore_errors=True)
        super().tearDown()

    def test_construction(self):
        """
        Test the construction of the identification classes.
        """
        base = IdentificationBase(self.config)
        self.assertIsInstance(base, IdentificationBase)
        with pytest.raises(ConfigurationError):
            N2SID({"s": 5})

    def test_output_before_identification(self):
        with pytest.raises(ConfigurationError):
            N4SID(self.config).output(self.io)

    def test_methods_in_sets(self):
        methods = {N2SID(self.config), N2SID(self.config), N4SID(self.config)}
        self.assertEqual(len(methods), 2)

    def test_interface(self):
        """
        Test identification with both methods, validation and the written files.
        """
        self.config.identification.order = 2
        self.config.baseline.order = 2
        interface = N2SIDInterface(self.config)
        result = interface.identify(self.io, [N2SID, N4SID], verbose=False)
        self.assertEqual(set(result), {"N2SID", "N4SID"})
        self.assertEqual(result["N2SID"]["order"], 2)
        self.assertEqual(len(result["N2SID"]["sweep"]), 3)
        self.assertIn("order_fits", result["N4SID"])

        fits = interface.validate(self.io, verbose=False)
        self.assertGreater(fits["N4SID"], 99.0)
        self.assertEqual(result["N4SID"]["validation_fit"], fits["N4SID"])

        paths = interface.save_to_file(self.path_output)
        model = utils_gen.load_model(paths["N2SID"])
        self.assertEqual(model.dims, (2, 1, 1))
        with open(paths["report"]) as f:
            report = json.load(f)
        self.assertEqual(report["N2SID"]["data_digest"], self.io.digest())
        np.testing.assert_allclose(
            utils_gen.load_model(paths["N4SID"]).D, interface.methods[1].model.D
        )
