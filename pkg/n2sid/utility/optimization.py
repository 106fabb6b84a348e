__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

import logging
from abc import abstractmethod
from typing import Optional, Dict, Any

import cvxpy as cp
import numpy as np

import n2sid.utility.logger as utils_log
from n2sid.data_structure.configuration import N2SIDConfiguration
from n2sid.data_structure.errors import SolverConvergenceError
from n2sid.utility.solver import N2sidProblem

logger = logging.getLogger(__name__)


class OptimizerBase:
    def __init__(self, config: N2SIDConfiguration):
        self.config = config

    @abstractmethod
    def decision_variables(self, *args, **kwargs):
        pass

    @abstractmethod
    def cost_function(self, *args, **kwargs):
        pass

    @abstractmethod
    def constraints(self, *args, **kwargs):
        pass

    @abstractmethod
    def optimize(self, *args, **kwargs):
        pass


class N2SIDOptimizer(OptimizerBase):
    """
    The nuclear norm program written out with cvxpy expressions and handed to a conic solver. It shares no code with
    the ADMM solver and serves as a reference on small instances.
    """

    def __init__(self, config: N2SIDConfiguration, problem: N2sidProblem):
        super(N2SIDOptimizer, self).__init__(config)
        self.problem = problem
        self.yhat, self.tu, self.ty = self.decision_variables()

    def decision_variables(self):
        s, N, p, m = self.problem.s, self.problem.N, self.problem.p, self.problem.m
        yhat = cp.Variable((N, p))
        tu = [cp.Variable((p, m)) for _ in range(s)] if m else []
        # the leading block of T_y is pinned to zero and has no variable
        ty = [None] + [cp.Variable((p, p)) for _ in range(s - 1)]
        return yhat, tu, ty

    def residual_expression(self):
        problem = self.problem
        s, p, m = problem.s, problem.p, problem.m
        cols = problem.Y.spec.cols
        Y = problem.Y.values
        U = None if problem.U is None else problem.U.values
        block_rows = []
        for i in range(s):
            row = self.yhat[i : i + cols, :].T
            for k in range(1, i + 1):
                row = row - self.ty[k] @ Y[(i - k) * p : (i - k + 1) * p]
            if U is not None:
                for k in range(i + 1):
                    row = row - self.tu[k] @ U[(i - k) * m : (i - k + 1) * m]
            block_rows.append(row)
        M = cp.vstack(block_rows)
        G = problem.sketch()
        return M if G is None else M @ G

    def cost_function(self):
        nuclear = cp.normNuc(self.residual_expression())
        fit = cp.sum_squares(self.yhat - self.problem.y)
        return nuclear + self.problem.weight * fit

    def constraints(self):
        # structure is carried by the parametrization
        return []

    def optimize(self, solver: Optional[str] = None, verbose: bool = False) -> Dict[str, Any]:
        program = cp.Problem(cp.Minimize(self.cost_function()), self.constraints())
        if solver is None:
            solver = cp.CLARABEL if cp.CLARABEL in cp.installed_solvers() else cp.SCS
        kwargs = {"eps_abs": 1e-9, "eps_rel": 1e-9, "max_iters": 100000} if solver == cp.SCS else {}
        program.solve(solver=solver, verbose=verbose, **kwargs)
        if program.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
            utils_log.print_and_log_error(
                logger, f"* reference solver ended with status {program.status}", verbose
            )
            raise SolverConvergenceError(
                f"reference solver ended with status {program.status}",
                iterations=0,
                residuals={},
            )
        tu = np.stack([block.value for block in self.tu]) if self.tu else None
        ty = np.zeros((self.problem.s, self.problem.p, self.problem.p))
        for k in range(1, self.problem.s):
            ty[k] = self.ty[k].value
        utils_log.print_and_log_debug(
            logger, f"* reference objective {program.value:.8g} ({solver})", verbose
        )
        return {
            "objective": float(program.value),
            "yhat": np.array(self.yhat.value),
            "Tu": tu,
            "Ty": ty,
            "status": program.status,
        }
