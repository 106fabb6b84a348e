"""
Unit tests of the nuclear norm program and its ADMM solver
"""

import unittest

import numpy as np
import pytest

from n2sid.data_structure.configuration import N2SIDConfiguration, SolverConfiguration
from n2sid.data_structure.errors import (
    ConfigurationError,
    DimensionError,
    SolverConvergenceError,
)
from n2sid.data_structure.model import IoBatch
import n2sid.utility.logger as util_logger
from n2sid.utility.optimization import N2SIDOptimizer
from n2sid.utility.solver import (
    N2sidProblem,
    StructuredOperator,
    prox_nuclear,
    sketch_matrix,
    apply_sketch,
    lambda_grid,
    solve_n2sid,
    optimality_residuals,
)
from n2sid.utility.structured_ops import build_hankel, structured_residual


def _random_batch(N: int, m: int = 1, p: int = 1, seed: int = 0) -> IoBatch:
    rng = np.random.default_rng(seed)
    return IoBatch(u=rng.standard_normal((N, m)), y=rng.standard_normal((N, p)))


def _tight() -> SolverConfiguration:
    return SolverConfiguration(
        max_iters=20000, primal_tol=1e-10, dual_tol=1e-10, abs_tol=1e-12
    )


def _solve(problem: N2sidProblem, opts: SolverConfiguration, **kwargs):
    try:
        return solve_n2sid(problem, opts, **kwargs)
    except SolverConvergenceError as e:
        return e.solution


class TestProx(unittest.TestCase):
    def test_soft_thresholding(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            M = rng.standard_normal(tuple(rng.integers(1, 7, size=2)))
            tau = float(rng.uniform(0.01, 2.0))
            U, sv, Vt = np.linalg.svd(M, full_matrices=False)
            expected = (U * np.maximum(sv - tau, 0.0)) @ Vt
            np.testing.assert_allclose(prox_nuclear(M, tau), expected, atol=1e-10)

    def test_definitional_minimum(self):
        rng = np.random.default_rng(1)

        def value(X, M, tau):
            return tau * np.sum(np.linalg.svd(X, compute_uv=False)) + 0.5 * np.sum((X - M) ** 2)

        for _ in range(5):
            M = rng.standard_normal((4, 6))
            tau = 0.8
            P = prox_nuclear(M, tau)
            best = value(P, M, tau)
            for _ in range(200):
                perturbed = P + 1e-3 * rng.standard_normal(P.shape)
                self.assertGreaterEqual(value(perturbed, M, tau), best - 1e-12)

    def test_threshold_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            prox_nuclear(np.eye(2), 0.0)

    def test_large_threshold_gives_zero(self):
        M = np.diag([3.0, 1.0])
        np.testing.assert_array_equal(prox_nuclear(M, 5.0), np.zeros((2, 2)))


class TestSketchAndGrid(unittest.TestCase):
    def test_sketch_reproducible(self):
        np.testing.assert_array_equal(sketch_matrix(10, 3, 7), sketch_matrix(10, 3, 7))
        self.assertFalse(np.array_equal(sketch_matrix(10, 3, 7), sketch_matrix(10, 3, 8)))
        self.assertEqual(apply_sketch(np.ones((4, 10)), 3, 0).shape, (4, 3))

    def test_identity_sketch(self):
        M = np.arange(12.0).reshape(3, 4)
        np.testing.assert_array_equal(apply_sketch(M, 4, 0, G=np.eye(4)), M)
        with pytest.raises(DimensionError):
            apply_sketch(M, 4, 0, G=np.eye(5))
        with pytest.raises(ConfigurationError):
            sketch_matrix(4, 0, 0)

    def test_lambda_grid(self):
        grid = lambda_grid()
        self.assertEqual(grid.size, 20)
        self.assertAlmostEqual(grid[0], 10**-0.5)
        self.assertAlmostEqual(grid[-1], 1e4)
        ratios = grid[1:] / grid[:-1]
        np.testing.assert_allclose(ratios, ratios[0])
        with pytest.raises(ConfigurationError):
            lambda_grid(1)
        with pytest.raises(ConfigurationError):
            lambda_grid(5, 10.0, 1.0)


class TestProblem(unittest.TestCase):
    def setUp(self) -> None:
        super().setUp()
        self.config = N2SIDConfiguration()
        util_logger.initialize_logger(self.config)

    def test_lambda_convention(self):
        batch = _random_batch(30)
        problem = N2sidProblem.from_batch(batch, 4, 2.0)
        self.assertAlmostEqual(problem.lam, 60.0)
        self.assertAlmostEqual(problem.weight, 2.0)
        with pytest.raises(ConfigurationError):
            N2sidProblem(Y=problem.Y, y=batch.y, lam=-1.0)

    def test_output_only(self):
        batch = _random_batch(20, m=2)
        problem = N2sidProblem.from_batch(batch, 3, 1.0, output_only=True)
        self.assertTrue(problem.output_only)
        self.assertEqual(problem.m, 0)
        self.assertEqual(StructuredOperator(problem).n_tu, 0)

    def test_operator_matches_structured_residual(self):
        batch = _random_batch(15, m=2, p=2, seed=3)
        problem = N2sidProblem.from_batch(batch, 3, 1.0)
        operator = StructuredOperator(problem)
        theta = np.random.default_rng(4).standard_normal(operator.n_theta)
        yhat, Tu, Ty = operator.unpack(theta)
        expected = structured_residual(build_hankel(yhat, 3), problem.Y, Ty, problem.U, Tu)
        np.testing.assert_allclose(operator.apply(theta), expected, atol=1e-12)

    def test_operator_adjoint(self):
        batch = _random_batch(15, seed=5)
        problem = N2sidProblem.from_batch(batch, 4, 1.0, sketch_width=5, sketch_seed=1)
        operator = StructuredOperator(problem)
        rng = np.random.default_rng(6)
        theta = rng.standard_normal(operator.n_theta)
        M = rng.standard_normal((4, 5))
        self.assertAlmostEqual(
            float(np.sum(operator.apply(theta) * M)),
            float(theta @ operator.adjoint(M)),
            places=10,
        )


class TestSolver(unittest.TestCase):
    def setUp(self) -> None:
        super().setUp()
        self.config = N2SIDConfiguration()
        util_logger.initialize_logger(self.config)

    def test_reference_solver_agreement(self):
        """
        The ADMM objective matches an independent conic solution on tiny instances.
        """
        for seed in range(5):
            batch = _random_batch(6, seed=seed)
            problem = N2sidProblem.from_batch(batch, 2, 0.5 + seed)
            solution = _solve(problem, _tight())
            reference = N2SIDOptimizer(self.config, problem).optimize()
            self.assertLessEqual(
                abs(solution.objective - reference["objective"]),
                1e-4 * max(abs(reference["objective"]), 1e-12),
            )

    def test_zero_lambda(self):
        problem = N2sidProblem.from_batch(_random_batch(12), 3, 0.0)
        solution = solve_n2sid(problem)
        np.testing.assert_array_equal(solution.theta, 0.0)
        self.assertEqual(solution.objective, 0.0)
        self.assertTrue(solution.diagnostics.converged)

    def test_pareto_monotonicity(self):
        grid = lambda_grid()
        for seed in range(5):
            batch = _random_batch(20, seed=10 + seed)
            operator, previous = None, None
            errors, norms = [], []
            for lam in grid:
                problem = N2sidProblem.from_batch(batch, 3, float(lam))
                operator = operator or StructuredOperator(problem)
                previous = _solve(problem, _tight(), operator=operator, warm_start=previous)
                errors.append(previous.prediction_error)
                norms.append(previous.nuclear_norm)
            errors, norms = np.array(errors), np.array(norms)
            slack_error = 1e-6 * max(errors.max(), 1e-12)
            slack_norm = 1e-6 * max(norms.max(), 1e-12)
            self.assertTrue(np.all(np.diff(errors) <= slack_error), errors)
            self.assertTrue(np.all(np.diff(norms) >= -slack_norm), norms)

    def test_returns_iterate_of_lowest_objective(self):
        """
        The raw ADMM objective may rise between iterations, the returned solution is the best iterate seen.
        """
        problem = N2sidProblem.from_batch(_random_batch(20, seed=2), 4, 1.0)
        solution = _solve(problem, _tight())
        history = np.array(solution.diagnostics.objective_history)
        best = np.array(solution.diagnostics.best_objective_history)
        self.assertEqual(history.size, solution.diagnostics.iterations)
        np.testing.assert_array_equal(best, np.minimum.accumulate(history))
        self.assertAlmostEqual(
            solution.objective, float(history.min()), delta=1e-10 * abs(history.min())
        )
        reference = N2SIDOptimizer(self.config, problem).optimize()
        self.assertLessEqual(
            abs(solution.objective - reference["objective"]),
            1e-4 * max(abs(reference["objective"]), 1e-12),
        )

    def test_non_convergence_carries_best_iterate(self):
        problem = N2sidProblem.from_batch(_random_batch(20, seed=3), 4, 1.0)
        with pytest.raises(SolverConvergenceError) as info:
            solve_n2sid(problem, SolverConfiguration(max_iters=12))
        self.assertEqual(info.value.iterations, 12)
        self.assertIsNotNone(info.value.solution)
        self.assertIn("primal", info.value.residuals)
        history = info.value.solution.diagnostics.objective_history
        self.assertAlmostEqual(
            info.value.solution.objective, min(history), delta=1e-10 * abs(min(history))
        )

    def test_warm_start_saves_iterations(self):
        problem = N2sidProblem.from_batch(_random_batch(20, seed=4), 4, 1.0)
        opts = SolverConfiguration(primal_tol=1e-6, dual_tol=1e-6)
        cold = _solve(problem, opts)
        warm = _solve(problem, opts, warm_start=cold)
        self.assertLess(warm.diagnostics.iterations, cold.diagnostics.iterations)

    def test_optimality_certificate(self):
        problem = N2sidProblem.from_batch(_random_batch(12, seed=6), 3, 1.0)
        solution = _solve(problem, _tight())
        residuals = optimality_residuals(problem, solution)
        self.assertLessEqual(residuals["spectral_norm"], 1.0 + 1e-4)
        self.assertLessEqual(residuals["stationarity"], 1e-4)
        self.assertLessEqual(residuals["range_alignment"], 1e-3)
        self.assertLessEqual(residuals["primal"], 1e-4)

    def test_sketched_solution(self):
        batch = _random_batch(40, seed=7)
        problem = N2sidProblem.from_batch(batch, 5, 1.0, sketch_width=6, sketch_seed=0)
        solution = _solve(problem, SolverConfiguration(max_iters=2000))
        self.assertEqual(solution.M_sketched.shape, (5, 6))
        self.assertEqual(solution.M_star.shape, (5, 36))
        self.assertLessEqual(solution.singular_values.size, 5)
        np.testing.assert_allclose(
            solution.M_sketched, solution.M_star @ problem.sketch(), atol=1e-10
        )
