"""
Unit tests of the N2SID identification pipeline
"""

import math
import os
import unittest

import numpy as np
import pytest

from n2sid.data_structure.configuration import N2SIDConfiguration
from n2sid.data_structure.errors import DimensionError, NumericalError
from n2sid.data_structure.model import IoBatch
from n2sid.data_structure.type import TypeLambdaSelection
from n2sid.identification.n2sid import N2SID, SweepPoint, select_lambda
from n2sid.identification.n4sid import N4SID
import n2sid.utility.general as utils_gen
import n2sid.utility.logger as util_logger
from n2sid.utility.simulation import generate_open_loop_trial

from tests.test_extraction import _model


class TestSelectLambda(unittest.TestCase):
    def test_largest_fit_wins(self):
        points = [
            SweepPoint(lambda_over_N=1.0, model=_model(), fit=50.0),
            SweepPoint(lambda_over_N=10.0, model=_model(), fit=80.0),
            SweepPoint(lambda_over_N=100.0, model=_model(), fit=70.0),
        ]
        self.assertEqual(select_lambda(points)[0], 10.0)

    def test_tie_goes_to_larger_lambda(self):
        points = [
            SweepPoint(lambda_over_N=100.0, model=_model(), fit=80.0),
            SweepPoint(lambda_over_N=1.0, model=_model(), fit=80.0),
            SweepPoint(lambda_over_N=10.0, model=_model(), fit=80.0),
        ]
        self.assertEqual(select_lambda(points)[0], 100.0)

    def test_failed_points_are_skipped(self):
        points = [
            SweepPoint(lambda_over_N=1.0, model=_model(), fit=20.0),
            SweepPoint(lambda_over_N=10.0, fit=90.0, failure="DegenerateSpectrumError"),
            SweepPoint(lambda_over_N=100.0, model=_model(), fit=math.nan),
        ]
        self.assertEqual(select_lambda(points)[0], 1.0)

    def test_no_model(self):
        with pytest.raises(NumericalError):
            select_lambda([SweepPoint(lambda_over_N=1.0)])


class TestN2SID(unittest.TestCase):
    def setUp(self) -> None:
        super().setUp()
        current_dir = os.path.dirname(__file__)
        self.config = N2SIDConfiguration()
        util_logger.initialize_logger(self.config)
        self.config.identification.lambda_lo = 1.0
        self.config.identification.lambda_hi = 1e3
        self.config.identification.lambda_count = 4
        self.io = utils_gen.read_io_csv(
            os.path.join(current_dir, "../example_data", "second_order_noise_free.csv")
        )

    def test_noise_free_example(self):
        config = N2SIDConfiguration()
        method = N2SID(config)
        model = method.identify(self.io, verbose=False)
        self.assertEqual(len(method.sweep), config.identification.lambda_count)
        self.assertIn(method.lambda_selected, [p.lambda_over_N for p in method.sweep])
        self.assertEqual(model.dims, (2, 1, 1))
        self.assertEqual(method.order, 2)
        self.assertGreaterEqual(method.identification_fit(), 99.9)
        self.assertIn("solve", method.timings)
        self.assertIn("total", method.timings)

    def test_fixed_lambda_and_order(self):
        self.config.identification.lambda_value = 20.0
        self.config.identification.order = 2
        method = N2SID(self.config)
        model = method.identify(self.io, verbose=False)
        self.assertEqual(len(method.sweep), 1)
        self.assertEqual(method.lambda_selected, 20.0)
        self.assertEqual(model.n, 2)

    def test_short_data(self):
        method = N2SID(self.config)
        with pytest.raises(DimensionError):
            method.identify(IoBatch(u=self.io.u[:20], y=self.io.y[:20]), verbose=False)

    def test_validation_selection_needs_data(self):
        self.config.identification.lambda_selection = TypeLambdaSelection.VALIDATION.value
        with pytest.raises(DimensionError):
            N2SID(self.config).identify(self.io, verbose=False)

    def test_validation_selection(self):
        self.config.identification.lambda_selection = TypeLambdaSelection.VALIDATION.value
        self.config.identification.s = 8
        _, identification, validation = generate_open_loop_trial(self.config.open_loop, 0)
        method = N2SID(self.config)
        method.identify(identification, validation, verbose=False)
        chosen = [p for p in method.sweep if p.lambda_over_N == method.lambda_selected][0]
        fits = [p.fit for p in method.sweep if p.model is not None]
        self.assertEqual(chosen.fit, max(fits))

    def test_output_only(self):
        self.config.identification.s = 8
        _, identification, _ = generate_open_loop_trial(self.config.open_loop, 3)
        io = IoBatch(u=np.zeros((identification.N, 0)), y=identification.y)
        model = N2SID(self.config).identify(io, verbose=False)
        self.assertEqual(model.m, 0)

    def test_noise_free_random_systems(self):
        """
        Second-order systems without noise give order 2, a gap after the second singular value and an exact fit.
        """
        config = N2SIDConfiguration()
        config.open_loop.noise_std = 0.0
        for seed in range(20):
            _, identification, validation = generate_open_loop_trial(config.open_loop, seed)
            method = N2SID(config)
            method.identify(identification, verbose=False)
            sv = method.solution.singular_values
            self.assertEqual(method.order, 2, seed)
            self.assertLess(sv[2] / sv[1], 1e-3, seed)
            self.assertGreaterEqual(method.validate(validation), 99.5, seed)

    def test_methods_compare_by_name(self):
        self.assertEqual(N2SID(self.config), N2SID(self.config))
        self.assertNotEqual(N2SID(self.config), N4SID(self.config))
        self.assertEqual(N2SID(self.config).short_name, "N2SID")
