__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

"""
Convex program of the nuclear norm subspace identification

    min  || (Yhat_s - T_u U_s - T_y Y_s) G ||_*  +  (lambda / N) sum_k || y(k) - yhat(k) ||^2

over the predicted outputs yhat (entering the block-Hankel matrix Yhat_s), the Markov blocks of T_u and the strictly
causal Markov blocks of T_y. G is an optional random right sketch. The structure of Yhat_s, T_u and T_y is imposed by
the parametrization, the program is solved with a scaled-form ADMM whose Z-step is singular value thresholding.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, List, Dict

import numpy as np
from scipy import linalg

import n2sid.utility.logger as utils_log
from n2sid.data_structure.configuration import SolverConfiguration
from n2sid.data_structure.errors import (
    DimensionError,
    ConfigurationError,
    SolverConvergenceError,
)
from n2sid.data_structure.model import IoBatch
from n2sid.utility.structured_ops import (
    BlockHankel,
    ToeplitzBlocks,
    build_hankel,
    structured_residual,
)

logger = logging.getLogger(__name__)


def prox_nuclear(M: np.ndarray, tau: float) -> np.ndarray:
    """
    Proximal operator of tau ||.||_*, i.e. singular value soft thresholding.

    :param M: matrix
    :param tau: threshold, positive
    """
    if not tau > 0:
        raise ConfigurationError(f"threshold must be positive, got {tau}")
    return _svt(np.asarray(M, dtype=float), tau)[0]


def _svt(M: np.ndarray, tau: float):
    U, sv, Vt = np.linalg.svd(M, full_matrices=False)
    shrunk = np.maximum(0.0, sv - tau)
    return (U * shrunk) @ Vt, shrunk


def sketch_matrix(cols: int, q: int, seed: int) -> np.ndarray:
    """Standard normal cols x q matrix, reproducible from the seed."""
    if q < 1:
        raise ConfigurationError(f"sketch width must be >= 1, got {q}")
    return np.random.default_rng(seed).standard_normal((cols, q))


def apply_sketch(
    M: np.ndarray, q: int, seed: int, G: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    Right multiplication M G with a random q-column sketch.

    :param G: explicit sketch replacing the random one (e.g. the identity)
    """
    M = np.asarray(M, dtype=float)
    if G is None:
        G = sketch_matrix(M.shape[1], q, seed)
    if G.shape[0] != M.shape[1]:
        raise DimensionError(f"sketch with {G.shape[0]} rows cannot multiply {M.shape}")
    return M @ G


def lambda_grid(
    count: int = 20, lo: float = 10**-0.5, hi: float = 1e4
) -> np.ndarray:
    """Logarithmically spaced lambda/N values from lo to hi, both included."""
    if count < 2:
        raise ConfigurationError(f"a lambda grid needs at least two points, got {count}")
    if not 0 < lo < hi:
        raise ConfigurationError(f"lambda grid requires 0 < lo < hi, got [{lo}, {hi}]")
    return np.geomspace(lo, hi, count)


@dataclass(frozen=True, eq=False)
class N2sidProblem:
    """
    One instance of the convex program. lam is lambda itself, the weight of the squared prediction errors is
    lam / N. U is None for output-only problems.
    """

    Y: BlockHankel
    y: np.ndarray
    lam: float
    U: Optional[BlockHankel] = None
    sketch_width: Optional[int] = None
    sketch_seed: int = 0
    # explicit sketch, replaces the random one when given
    sketch_override: Optional[np.ndarray] = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        object.__setattr__(self, "y", y)
        if self.lam < 0 or not math.isfinite(self.lam):
            raise ConfigurationError(f"lambda must be finite and nonnegative, got {self.lam}")
        if y.shape != (self.Y.spec.N, self.Y.spec.block_dim):
            raise DimensionError(
                f"output series {y.shape} does not match the Hankel matrix of "
                f"{self.Y.spec.N} samples with {self.Y.spec.block_dim} channels"
            )
        if self.U is not None and (
            self.U.spec.s != self.Y.spec.s or self.U.spec.N != self.Y.spec.N
        ):
            raise DimensionError("input and output Hankel matrices must share s and N")
        if self.sketch_width is not None and self.sketch_width < 1:
            raise ConfigurationError(f"sketch width must be >= 1, got {self.sketch_width}")

    @classmethod
    def from_batch(
        cls,
        batch: IoBatch,
        s: int,
        lam_over_N: float,
        sketch_width: Optional[int] = None,
        sketch_seed: int = 0,
        output_only: bool = False,
    ) -> "N2sidProblem":
        """Problem on a batch with lambda given as lambda / N."""
        if batch.N < s:
            raise DimensionError(f"{batch.N} samples are too few for s={s}")
        U = None if (output_only or batch.output_only) else build_hankel(batch.u, s)
        return cls(
            Y=build_hankel(batch.y, s),
            y=np.array(batch.y),
            lam=lam_over_N * batch.N,
            U=U,
            sketch_width=sketch_width,
            sketch_seed=sketch_seed,
        )

    @property
    def s(self) -> int:
        return self.Y.spec.s

    @property
    def N(self) -> int:
        return self.Y.spec.N

    @property
    def p(self) -> int:
        return self.Y.spec.block_dim

    @property
    def m(self) -> int:
        return 0 if self.U is None else self.U.spec.block_dim

    @property
    def output_only(self) -> bool:
        return self.U is None

    @property
    def weight(self) -> float:
        return self.lam / self.N

    def sketch(self) -> Optional[np.ndarray]:
        if self.sketch_override is not None:
            return np.asarray(self.sketch_override, dtype=float)
        if self.sketch_width is None:
            return None
        return sketch_matrix(self.Y.spec.cols, self.sketch_width, self.sketch_seed)


class StructuredOperator:
    """
    Linear map from the free parameters theta = [yhat (sample-major), T_u blocks, free T_y blocks] to the
    (sketched) residual matrix, stored as a dense matrix acting on the row-major vectorization.

    The operator only depends on the data and the sketch, so it is shared by all lambdas of a sweep.
    """

    def __init__(self, problem: N2sidProblem):
        self.s, self.N, self.p, self.m = problem.s, problem.N, problem.p, problem.m
        self.G = problem.sketch()
        cols = problem.Y.spec.cols
        if self.G is not None and self.G.shape[0] != cols:
            raise DimensionError(
                f"sketch with {self.G.shape[0]} rows does not match {cols} Hankel columns"
            )
        self.width = cols if self.G is None else self.G.shape[1]
        self.n_yhat = self.N * self.p
        self.n_tu = self.s * self.p * self.m
        self.n_ty = (self.s - 1) * self.p * self.p
        self.n_theta = self.n_yhat + self.n_tu + self.n_ty
        self.matrix = self._assemble(problem)
        self.gram = self.matrix.T @ self.matrix
        self._key = self._data_key(problem)

    @staticmethod
    def _data_key(problem: N2sidProblem):
        G = problem.sketch()
        return (
            problem.Y.values.tobytes(),
            None if problem.U is None else problem.U.values.tobytes(),
            None if G is None else G.tobytes(),
        )

    def matches(self, problem: N2sidProblem) -> bool:
        return self._key == self._data_key(problem)

    def _assemble(self, problem: N2sidProblem) -> np.ndarray:
        s, p, m, N, width = self.s, self.p, self.m, self.N, self.width
        cols = problem.Y.spec.cols
        G = np.eye(cols) if self.G is None else self.G
        YG = problem.Y.values @ G
        UG = None if problem.U is None else problem.U.values @ G
        op = np.zeros((s, p, width, self.n_theta))
        index = 0
        # Hankel structure of yhat: sample k sits in block (i, k - i)
        for k in range(N):
            for c in range(p):
                for i in range(max(0, k - cols + 1), min(s, k + 1)):
                    op[i, c, :, index] += G[k - i]
                index += 1
        # block k of T_u multiplies block row i - k of U_s in block row i
        for k in range(s):
            for a in range(p):
                for b in range(m):
                    for i in range(k, s):
                        op[i, a, :, index] -= UG[(i - k) * m + b]
                    index += 1
        for k in range(1, s):
            for a in range(p):
                for b in range(p):
                    for i in range(k, s):
                        op[i, a, :, index] -= YG[(i - k) * p + b]
                    index += 1
        return op.reshape(s * p * width, self.n_theta)

    def apply(self, theta: np.ndarray) -> np.ndarray:
        return (self.matrix @ theta).reshape(self.s * self.p, self.width)

    def adjoint(self, M: np.ndarray) -> np.ndarray:
        return self.matrix.T @ np.ravel(M)

    def unpack(self, theta: np.ndarray):
        yhat = theta[: self.n_yhat].reshape(self.N, self.p)
        tu = theta[self.n_yhat : self.n_yhat + self.n_tu].reshape(self.s, self.p, self.m)
        ty = np.zeros((self.s, self.p, self.p))
        ty[1:] = theta[self.n_yhat + self.n_tu :].reshape(self.s - 1, self.p, self.p)
        return yhat, ToeplitzBlocks(tu), ToeplitzBlocks(ty, strictly_causal=True)

    def selection(self) -> np.ndarray:
        """Diagonal of S^T S, S picking yhat out of theta."""
        diag = np.zeros(self.n_theta)
        diag[: self.n_yhat] = 1.0
        return diag


@dataclass
class SolverDiagnostics:
    iterations: int = 0
    converged: bool = False
    primal_residual: float = math.inf
    dual_residual: float = math.inf
    primal_threshold: float = 0.0
    dual_threshold: float = 0.0
    penalty: float = 1.0
    # raw objective of every iterate and the best value seen so far
    objective_history: List[float] = field(default_factory=list)
    best_objective_history: List[float] = field(default_factory=list)
    # iterations after which the penalty was adapted
    penalty_updates: List[int] = field(default_factory=list)

    def residuals(self) -> Dict[str, float]:
        return {
            "primal": self.primal_residual,
            "dual": self.dual_residual,
            "primal_threshold": self.primal_threshold,
            "dual_threshold": self.dual_threshold,
            "penalty": self.penalty,
        }


@dataclass(eq=False)
class N2sidSolution:
    yhat: np.ndarray
    Tu_blocks: ToeplitzBlocks
    Ty_blocks: ToeplitzBlocks
    # unsketched residual Yhat_s - T_u U_s - T_y Y_s
    M_star: np.ndarray
    # singular values of the minimized matrix (sketched when a sketch is used)
    singular_values: np.ndarray
    objective: float
    nuclear_norm: float
    prediction_error: float
    lam: float
    diagnostics: SolverDiagnostics
    # minimized matrix, equal to M_star without sketch
    M_sketched: np.ndarray = None
    theta: np.ndarray = None
    consensus: np.ndarray = None
    # unscaled dual variable, a subgradient of the nuclear norm at the consensus variable
    dual: np.ndarray = None

    @property
    def minimized_matrix(self) -> np.ndarray:
        return self.M_star if self.M_sketched is None else self.M_sketched


class N2sidADMM:
    """
    Scaled-form ADMM for min ||A theta||_* + w ||y - S theta||^2 with the splitting Z = A theta.

    x-step: (2w S^T S + rho A^T A) theta = 2w S^T y + rho A^T (Z - W), Cholesky factorized once per penalty.
    z-step: Z = prox_{||.||_*/rho}(A theta + W).
    u-step: W = W + A theta - Z.
    The penalty is adapted by residual balancing.
    """

    def __init__(
        self,
        problem: N2sidProblem,
        opts: SolverConfiguration,
        operator: StructuredOperator,
        warm_start: Optional[N2sidSolution] = None,
    ):
        self.problem = problem
        self.opts = opts
        self.op = operator
        self.w = problem.weight
        self.target = np.zeros(operator.n_theta)
        self.target[: operator.n_yhat] = problem.y.ravel()
        self.sel = operator.selection()
        rows = operator.matrix.shape[0]
        self.rho = opts.penalty
        if warm_start is not None and warm_start.theta is not None:
            self.theta = warm_start.theta.copy()
            self.Z = warm_start.consensus.copy()
            self.rho = warm_start.diagnostics.penalty
            self.W = warm_start.dual / self.rho
        else:
            self.theta = np.zeros(operator.n_theta)
            self.Z = np.zeros(rows)
            self.W = np.zeros(rows)
        self.diagnostics = SolverDiagnostics(penalty=self.rho)
        self._factorize()

    def _factorize(self):
        system = self.rho * self.op.gram + np.diag(2.0 * self.w * self.sel)
        ridge = 1e-10 * max(float(np.max(np.diag(system))), 1.0)
        system[np.diag_indices_from(system)] += ridge
        self._cho = linalg.cho_factor(system)

    def xstep(self):
        rhs = 2.0 * self.w * self.sel * self.target + self.rho * self.op.matrix.T @ (
            self.Z - self.W
        )
        self.theta = linalg.cho_solve(self._cho, rhs)
        self.Atheta = self.op.matrix @ self.theta

    def zstep(self):
        self.Z_prev = self.Z
        shape = (self.op.s * self.op.p, self.op.width)
        Z, _ = _svt((self.Atheta + self.W).reshape(shape), 1.0 / self.rho)
        self.Z = Z.ravel()

    def ustep(self):
        self.W = self.W + self.Atheta - self.Z

    def objective(self) -> float:
        M = self.Atheta.reshape(self.op.s * self.op.p, self.op.width)
        nuclear = float(np.sum(np.linalg.svd(M, compute_uv=False)))
        error = self.theta[: self.op.n_yhat] - self.target[: self.op.n_yhat]
        return nuclear + self.w * float(error @ error)

    def residuals(self):
        opts = self.opts
        primal = float(np.linalg.norm(self.Atheta - self.Z))
        dual = float(self.rho * np.linalg.norm(self.op.matrix.T @ (self.Z - self.Z_prev)))
        eps_pri = math.sqrt(self.Z.size) * opts.abs_tol + opts.primal_tol * max(
            np.linalg.norm(self.Atheta), np.linalg.norm(self.Z)
        )
        eps_dual = math.sqrt(self.theta.size) * opts.abs_tol + opts.dual_tol * float(
            np.linalg.norm(self.rho * self.op.matrix.T @ self.W)
        )
        return primal, dual, eps_pri, eps_dual

    def update_penalty(self, iteration: int, primal: float, dual: float):
        opts = self.opts
        if not opts.adaptive_penalty or (iteration + 1) % opts.adaptation_interval:
            return
        if primal > opts.penalty_ratio * dual:
            scale = opts.penalty_scaling
        elif dual > opts.penalty_ratio * primal:
            scale = 1.0 / opts.penalty_scaling
        else:
            return
        self.rho *= scale
        self.W /= scale
        self._factorize()
        self.diagnostics.penalty_updates.append(iteration)

    def solve(self):
        """Runs the iterations; best_theta holds the iterate of lowest objective."""
        diag = self.diagnostics
        best = math.inf
        self.best_theta = self.theta.copy()
        for iteration in range(self.opts.max_iters):
            self.xstep()
            self.zstep()
            self.ustep()
            value = self.objective()
            if value < best:
                best = value
                self.best_theta = self.theta.copy()
            diag.objective_history.append(value)
            diag.best_objective_history.append(best)
            primal, dual, eps_pri, eps_dual = self.residuals()
            diag.iterations = iteration + 1
            diag.primal_residual, diag.dual_residual = primal, dual
            diag.primal_threshold, diag.dual_threshold = eps_pri, eps_dual
            if primal <= eps_pri and dual <= eps_dual:
                diag.converged = True
                break
            self.update_penalty(iteration, primal, dual)
        diag.penalty = self.rho
        return diag


def _make_solution(
    problem: N2sidProblem,
    operator: StructuredOperator,
    theta: np.ndarray,
    diagnostics: SolverDiagnostics,
    consensus: Optional[np.ndarray] = None,
    dual: Optional[np.ndarray] = None,
) -> N2sidSolution:
    yhat, Tu, Ty = operator.unpack(theta)
    M_star = structured_residual(
        build_hankel(yhat, problem.s), problem.Y, Ty, problem.U, Tu
    )
    M_sketched = operator.apply(theta) if operator.G is not None else None
    minimized = M_star if M_sketched is None else M_sketched
    sv = np.linalg.svd(minimized, compute_uv=False)
    nuclear = float(np.sum(sv))
    error = float(np.sum((problem.y - yhat) ** 2))
    return N2sidSolution(
        yhat=yhat,
        Tu_blocks=Tu,
        Ty_blocks=Ty,
        M_star=M_star,
        singular_values=sv,
        objective=nuclear + problem.weight * error,
        nuclear_norm=nuclear,
        prediction_error=error,
        lam=problem.lam,
        diagnostics=diagnostics,
        M_sketched=M_sketched,
        theta=theta,
        consensus=np.zeros(operator.matrix.shape[0]) if consensus is None else consensus,
        dual=np.zeros(operator.matrix.shape[0]) if dual is None else dual,
    )


def solve_n2sid(
    problem: N2sidProblem,
    opts: Optional[SolverConfiguration] = None,
    operator: Optional[StructuredOperator] = None,
    warm_start: Optional[N2sidSolution] = None,
    verbose: bool = False,
) -> N2sidSolution:
    """
    Solves the convex program.

    :param problem: problem instance
    :param opts: solver settings, defaults of SolverConfiguration when None
    :param operator: structured operator of the same data and sketch, assembled when None
    :param warm_start: solution of a neighbouring problem (e.g. the previous lambda of a sweep)
    :param verbose: print progress
    :raises SolverConvergenceError: when the tolerances are not met within max_iters; the best iterate is attached
    """
    opts = SolverConfiguration() if opts is None else opts
    if operator is None or not operator.matches(problem):
        operator = StructuredOperator(problem)
    if problem.lam == 0.0:
        # without the fit term, theta = 0 gives M = 0 and is optimal
        diagnostics = SolverDiagnostics(
            iterations=0,
            converged=True,
            primal_residual=0.0,
            dual_residual=0.0,
            penalty=opts.penalty,
            objective_history=[0.0],
            best_objective_history=[0.0],
        )
        return _make_solution(problem, operator, np.zeros(operator.n_theta), diagnostics)

    admm = N2sidADMM(problem, opts, operator, warm_start=warm_start)
    diagnostics = admm.solve()
    solution = _make_solution(
        problem, operator, admm.best_theta, diagnostics, admm.Z, admm.rho * admm.W
    )
    message = (
        f"* lambda/N={problem.weight:.4g}: {diagnostics.iterations} iterations, "
        f"objective {solution.objective:.6g}, primal {diagnostics.primal_residual:.2e}, "
        f"dual {diagnostics.dual_residual:.2e}"
    )
    if not diagnostics.converged:
        utils_log.print_and_log_warning(
            logger, f"* solver did not converge: {message}", verbose
        )
        raise SolverConvergenceError(
            f"no convergence within {opts.max_iters} iterations ({message})",
            iterations=diagnostics.iterations,
            residuals=diagnostics.residuals(),
            solution=solution,
        )
    utils_log.print_and_log_debug(logger, message, verbose)
    return solution


def optimality_residuals(
    problem: N2sidProblem,
    solution: N2sidSolution,
    operator: Optional[StructuredOperator] = None,
    rank_tol: float = 1e-6,
) -> Dict[str, float]:
    """
    First-order optimality of a solution, certified with the dual variable G:

    - spectral_norm: ||G||_2, at most one for a subgradient of the nuclear norm
    - range_alignment: || U_r^T G V_r - I ||_2 on the range of the minimized matrix
    - stationarity: || A^T G + 2 w S^T (yhat - y) || relative to the gradient of the fit term
    - primal: || A theta - Z || relative to || A theta ||
    """
    if operator is None or not operator.matches(problem):
        operator = StructuredOperator(problem)
    shape = (operator.s * operator.p, operator.width)
    G = solution.dual.reshape(shape)
    Z = solution.consensus.reshape(shape)
    spectral = float(np.linalg.norm(G, 2)) if G.size else 0.0
    U, sv, Vt = np.linalg.svd(Z, full_matrices=False)
    rank = int(np.sum(sv > rank_tol * max(sv[0] if sv.size else 0.0, 1e-300)))
    if rank:
        aligned = U[:, :rank].T @ G @ Vt[:rank].T
        alignment = float(np.linalg.norm(aligned - np.eye(rank), 2))
    else:
        alignment = 0.0
    gradient = np.zeros(operator.n_theta)
    gradient[: operator.n_yhat] = 2.0 * problem.weight * (solution.yhat - problem.y).ravel()
    mismatch = operator.adjoint(G) + gradient
    scale = max(float(np.linalg.norm(gradient)), float(np.linalg.norm(operator.adjoint(G))), 1.0)
    Atheta = operator.apply(solution.theta)
    primal = float(np.linalg.norm(Atheta - Z)) / max(float(np.linalg.norm(Atheta)), 1e-300)
    return {
        "spectral_norm": spectral,
        "range_alignment": alignment,
        "stationarity": float(np.linalg.norm(mismatch)) / scale,
        "primal": primal,
        "rank": rank,
    }
