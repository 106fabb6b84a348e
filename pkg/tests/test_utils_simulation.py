"""
Unit tests of the utility functions for simulation
"""

import unittest

import numpy as np
import pytest

from n2sid.data_structure.configuration import (
    N2SIDConfiguration,
    OpenLoopConfiguration,
    ClosedLoopConfiguration,
)
from n2sid.data_structure.errors import ConfigurationError, GenerationError, DimensionError
from n2sid.data_structure.model import StateSpaceModel
from n2sid.utility.general import trial_seed
import n2sid.utility.logger as util_logger
from n2sid.utility.simulation import (
    random_stable_system,
    sign_input,
    simulate_states,
    simulate_innovation,
    feedforward_gain,
    closed_loop_matrix,
    simulate_closed_loop,
    generate_open_loop_trial,
    generate_closed_loop_trial,
)


class TestSimulation(unittest.TestCase):
    def setUp(self) -> None:
        super().setUp()
        self.config = N2SIDConfiguration()
        util_logger.initialize_logger(self.config)
        self.config.print_configuration_summary()

    def test_random_stable_system(self):
        for seed in range(1000):
            model = random_stable_system(self.config.open_loop, seed)
            self.assertEqual(model.dims, (2, 1, 1))
            self.assertLessEqual(model.spectral_radius(), 0.99 + 1e-12)
            self.assertGreaterEqual(model.spectral_radius(), 0.1 - 1e-12)

    def test_sign_input_is_balanced(self):
        N = 100000
        u = sign_input(N, 7)
        self.assertLessEqual(abs(float(np.mean(u))), 3.0 / np.sqrt(N))

    def test_random_system_reproducible(self):
        first = random_stable_system(self.config.open_loop, 3)
        second = random_stable_system(self.config.open_loop, 3)
        np.testing.assert_array_equal(first.A, second.A)
        np.testing.assert_array_equal(first.K, second.K)

    def test_generation_budget(self):
        config = OpenLoopConfiguration(max_draws=0)
        with pytest.raises(GenerationError):
            random_stable_system(config, 0)

    def test_sign_input(self):
        u = sign_input(200, 0, m=2)
        self.assertEqual(u.shape, (200, 2))
        self.assertTrue(set(np.unique(u)) <= {-1.0, 1.0})
        np.testing.assert_array_equal(u, sign_input(200, 0, m=2))
        with pytest.raises(DimensionError):
            sign_input(-1, 0)

    def test_innovation_simulation(self):
        model = StateSpaceModel(A=[[0.5]], B=[[1.0]], C=[[1.0]], D=[[0.0]], K=[[0.5]])
        u = np.array([1.0, 0.0, 0.0])
        e = np.array([0.0, 1.0, 0.0])
        states, y = simulate_states(model, u, e, [0.0])
        np.testing.assert_allclose(states.ravel(), [0.0, 1.0, 1.0, 0.5])
        np.testing.assert_allclose(y.ravel(), [0.0, 2.0, 1.0])
        batch = simulate_innovation(model, u, e)
        self.assertEqual((batch.N, batch.m, batch.p), (3, 1, 1))
        with pytest.raises(DimensionError):
            simulate_states(model, u, e, [0.0, 0.0])

    def test_innovation_superposition(self):
        model = random_stable_system(OpenLoopConfiguration(n=3, m=2, p=2), 11)
        rng = np.random.default_rng(11)
        u1, u2 = rng.standard_normal((2, 60, 2))
        e1, e2 = rng.standard_normal((2, 60, 2))
        x1, x2 = rng.standard_normal((2, 3))
        combined = simulate_innovation(model, 2.0 * u1 - u2, 2.0 * e1 - e2, 2.0 * x1 - x2)
        first = simulate_innovation(model, u1, e1, x1)
        second = simulate_innovation(model, u2, e2, x2)
        expected = 2.0 * first.y - second.y
        self.assertLessEqual(
            np.max(np.abs(combined.y - expected)), 1e-12 * max(np.max(np.abs(expected)), 1.0)
        )

    def test_closed_loop_plant(self):
        plant = self.config.closed_loop.plant()
        np.testing.assert_allclose(plant.eigenvalues(), [0.0, 0.7], atol=1e-12)
        L = self.config.closed_loop.feedback()
        eigs = np.linalg.eigvals(closed_loop_matrix(plant, L))
        self.assertLess(np.max(np.abs(eigs)), 1.0)
        np.testing.assert_allclose(
            np.sort(np.abs(np.linalg.eigvals(plant.A - plant.B @ L))), [0.5, 0.5], atol=1e-6
        )

    def test_unit_steady_state_gain(self):
        config = ClosedLoopConfiguration(noise_std=0.0, x0_std=0.0)
        r = np.ones((300, 1))
        batch = simulate_closed_loop(config, r, 0)
        self.assertAlmostEqual(batch.y[-1, 0], 1.0, places=8)

    def test_closed_loop_input_depends_on_past_innovations(self):
        config = ClosedLoopConfiguration()
        plant, L = config.plant(), config.feedback()
        N, j = 20, 5
        impulse = np.zeros((N, 1))
        impulse[j] = 1.0
        batch = simulate_closed_loop(config, np.zeros((N, 1)), 0, e=impulse, x0=[0.0, 0.0])
        np.testing.assert_array_equal(batch.u[: j + 1], 0.0)
        np.testing.assert_allclose(batch.u[j + 1], -L @ plant.K[:, 0], atol=1e-15)
        self.assertGreater(abs(batch.u[j + 1, 0]), 0.05)

    def test_closed_loop_input_correlates_with_past_noise(self):
        config = ClosedLoopConfiguration()
        N = 5000
        rng = np.random.default_rng(3)
        r = sign_input(N, rng)
        e = config.noise_std * rng.standard_normal((N, 1))
        noisy = simulate_closed_loop(config, r, 0, e=e, x0=[0.0, 0.0])
        clean = simulate_closed_loop(config, r, 0, e=np.zeros((N, 1)), x0=[0.0, 0.0])
        # part of the input driven by the innovations
        driven = (noisy.u - clean.u).ravel()
        past = np.corrcoef(driven[1:], e[:-1, 0])[0, 1]
        current = np.corrcoef(driven, e[:, 0])[0, 1]
        self.assertGreater(past, 10.0 / np.sqrt(N))
        self.assertLess(abs(current), 4.0 / np.sqrt(N))

    def test_singular_feedforward(self):
        plant = StateSpaceModel(A=[[0.5]], B=[[0.0]], C=[[1.0]], D=[[0.0]], K=[[0.0]])
        with pytest.raises(ConfigurationError):
            feedforward_gain(plant, [[0.1]])
        with pytest.raises(ConfigurationError):
            feedforward_gain(plant, [[0.1, 0.2]])

    def test_explicit_noise_and_state(self):
        config = ClosedLoopConfiguration()
        r = sign_input(40, 1)
        e = 0.1 * np.random.default_rng(2).standard_normal((40, 1))
        first = simulate_closed_loop(config, r, 0, e=e, x0=[1.0, 0.0])
        second = simulate_closed_loop(config, r, 99, e=e, x0=[1.0, 0.0])
        np.testing.assert_array_equal(first.y, second.y)
        np.testing.assert_array_equal(first.u, second.u)

    def test_trials_are_reproducible(self):
        seed = trial_seed(5, 3)
        first = generate_open_loop_trial(self.config.open_loop, seed)
        second = generate_open_loop_trial(self.config.open_loop, trial_seed(5, 3))
        self.assertEqual(first[1].digest(), second[1].digest())
        self.assertEqual(first[2].digest(), second[2].digest())
        self.assertNotEqual(first[1].digest(), first[2].digest())
        self.assertEqual((first[1].N, first[2].N), (50, 50))

        plant, identification, validation = generate_closed_loop_trial(self.config.closed_loop, 4)
        self.assertEqual(identification.N, 50)
        self.assertNotEqual(identification.digest(), validation.digest())
        np.testing.assert_allclose(plant.eigenvalues(), [0.0, 0.7], atol=1e-12)
