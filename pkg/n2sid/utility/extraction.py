__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

"""
From a low-rank residual matrix to a state-space model: order selection with the log-mean rule, (A, C) of the observer
form by shift invariance of the observability matrix, and (B, D, K, x0) by linear least squares on the observer
recursion. Also the one-step predictor, the free-run simulation and the fit criterion.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy import linalg

import n2sid.utility.logger as utils_log
from n2sid.data_structure.errors import (
    DimensionError,
    DegenerateSpectrumError,
    IllConditionedExtractionError,
    UndefinedFitError,
)
from n2sid.data_structure.model import StateSpaceModel, IoBatch
from n2sid.data_structure.type import TypeFitMode

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12
TIKHONOV_WEIGHT = 1e-8


@dataclass(frozen=True)
class OrderSelection:
    singular_values: Tuple[float, ...]
    chosen_order: int
    cap: int = 10


@dataclass(frozen=True, eq=False)
class ObserverEstimate:
    """Parameters of the observer recursion together with the equivalent innovation model."""

    B: np.ndarray
    D: np.ndarray
    K: np.ndarray
    x0: np.ndarray
    model: StateSpaceModel
    regularized: bool = False


def select_order(
    singular_values, cap: int = 10, floor: Optional[float] = None
) -> OrderSelection:
    """
    Index (1-based) of the singular value closest to the logarithmic mean of the largest and the smallest one,
    clipped at cap. Ties go to the lower index.

    :param singular_values: nonincreasing singular values
    :param cap: largest order returned
    :param floor: optional relative floor, values below floor * sigma_1 are raised to it
    :raises DegenerateSpectrumError: fewer than two strictly positive values
    """
    sv = np.asarray(singular_values, dtype=float).ravel()
    if np.sum(sv > 0) < 2:
        raise DegenerateSpectrumError(
            f"order selection needs at least two positive singular values, got {sv.tolist()}"
        )
    if floor is None:
        considered = sv[sv > 0]
    else:
        considered = np.maximum(sv, floor * sv[0])
    logs = np.log(considered)
    target = 0.5 * (logs[0] + np.min(logs))
    order = int(np.argmin(np.abs(logs - target))) + 1
    return OrderSelection(
        singular_values=tuple(sv.tolist()), chosen_order=min(order, cap), cap=cap
    )


def extract_AC(M: np.ndarray, n: int, s: int, p: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Observer-form (A, C) from the column space of the residual matrix.

    :param M: residual matrix with s block rows of p rows, possibly right-sketched
    :param n: model order, 1 <= n < s
    :raises IllConditionedExtractionError: the upper s-1 block rows of the observability matrix are rank deficient
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != s * p:
        raise DimensionError(f"residual matrix {M.shape} does not have {s} blocks of {p} rows")
    if not 1 <= n < s or n > min(M.shape):
        raise DimensionError(f"order {n} is not admissible for s={s} and a {M.shape} matrix")
    U, sv, _ = np.linalg.svd(M, full_matrices=False)
    O = U[:, :n] * np.sqrt(sv[:n])
    upper, lower = O[:-p], O[p:]
    upper_sv = np.linalg.svd(upper, compute_uv=False)
    condition = np.inf if upper_sv[-1] == 0.0 else float(upper_sv[0] / upper_sv[-1])
    if upper.shape[0] < n or condition > CONDITION_LIMIT:
        utils_log.print_and_log_error(
            logger, f"* shift-invariance problem is ill conditioned ({condition:.3g})", False
        )
        raise IllConditionedExtractionError(
            f"observability matrix of order {n} is rank deficient (condition {condition:.3g})",
            condition_number=condition,
        )
    A_obs = linalg.lstsq(upper, lower)[0]
    C = O[:p].copy()
    return A_obs, C


def _observer_least_squares(
    A: np.ndarray,
    C: np.ndarray,
    u: np.ndarray,
    w: np.ndarray,
    y: np.ndarray,
    estimate_direct_term: bool = True,
):
    """
    Least squares in (x0, B, K, D) for x(k+1) = A x(k) + B u(k) + K w(k), yhat(k) = C x(k) + D u(k), (A, C) fixed.

    The regressors of x0, vec(B) and vec(K) follow from the state sensitivities
    X_x0(k+1) = A X_x0(k), X_b(k+1) = A X_b(k) + u(k)^T kron I, X_k(k+1) = A X_k(k) + w(k)^T kron I.
    Vectorization is column-major.
    """
    n, p = A.shape[0], C.shape[0]
    N, m, r = y.shape[0], u.shape[1], w.shape[1]
    n_d = p * m if estimate_direct_term else 0
    n_params = n + n * m + n * r + n_d
    Phi = np.zeros((N, p, n_params))
    X_x0 = np.eye(n)
    X_b = np.zeros((n, n * m))
    X_k = np.zeros((n, n * r))
    I_n, I_p = np.eye(n), np.eye(p)
    for k in range(N):
        Phi[k, :, :n] = C @ X_x0
        Phi[k, :, n : n + n * m] = C @ X_b
        Phi[k, :, n + n * m : n + n * m + n * r] = C @ X_k
        if n_d:
            Phi[k, :, n + n * m + n * r :] = np.kron(u[k][None, :], I_p)
        X_x0 = A @ X_x0
        X_b = A @ X_b + np.kron(u[k][None, :], I_n)
        X_k = A @ X_k + np.kron(w[k][None, :], I_n)
    Phi = Phi.reshape(N * p, n_params)
    target = y.reshape(N * p)

    regularized = False
    if n_params and np.linalg.matrix_rank(Phi) < n_params:
        normal = Phi.T @ Phi
        weight = TIKHONOV_WEIGHT * max(float(np.max(np.linalg.eigvalsh(normal))), 1e-300)
        params = linalg.solve(
            normal + weight * np.eye(n_params), Phi.T @ target, assume_a="pos"
        )
        regularized = True
        utils_log.print_and_log_warning(
            logger,
            f"* observer least squares is rank deficient, Tikhonov weight {weight:.3g} applied",
            False,
        )
    elif n_params:
        params = linalg.lstsq(Phi, target)[0]
    else:
        params = np.zeros(0)

    x0 = params[:n]
    B = params[n : n + n * m].reshape((n, m), order="F")
    K = params[n + n * m : n + n * m + n * r].reshape((n, r), order="F")
    D = (
        params[n + n * m + n * r :].reshape((p, m), order="F")
        if n_d
        else np.zeros((p, m))
    )
    return x0, B, K, D, regularized


def estimate_BDK(
    A_obs: np.ndarray,
    C: np.ndarray,
    io: IoBatch,
    estimate_direct_term: bool = True,
) -> ObserverEstimate:
    """
    (B, D, K, x0) of the observer x(k+1) = A_obs x(k) + Bo u(k) + K y(k), yhat(k) = C x(k) + D u(k) by linear least
    squares on the prediction errors, returned with the innovation model A = A_obs + K C, B = Bo + K D.
    """
    A_obs = np.atleast_2d(np.asarray(A_obs, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if C.shape[1] != A_obs.shape[0] or C.shape[0] != io.p:
        raise DimensionError(
            f"A_obs {A_obs.shape} and C {C.shape} do not match {io.p} outputs"
        )
    if io.N == 0:
        raise DimensionError("observer least squares needs at least one sample")
    x0, B_obs, K, D, regularized = _observer_least_squares(
        A_obs, C, io.u, io.y, io.y, estimate_direct_term
    )
    model = StateSpaceModel(A=A_obs + K @ C, B=B_obs + K @ D, C=C, D=D, K=K)
    return ObserverEstimate(
        B=model.B, D=D, K=K, x0=x0, model=model, regularized=regularized
    )


def estimate_innovation_inputs(
    A: np.ndarray,
    C: np.ndarray,
    io: IoBatch,
    e: Optional[np.ndarray] = None,
    estimate_direct_term: bool = True,
) -> ObserverEstimate:
    """
    (B, D, K, x0) of x(k+1) = A x(k) + B u(k) + K e(k), y(k) = C x(k) + D u(k) + e(k) with (A, C) and the
    innovations e fixed, a pseudo-linear regression step. Without innovations, K = 0 (output error).
    """
    if e is None:
        x0, B, _, D, regularized = _observer_least_squares(
            A, C, io.u, np.zeros((io.N, 0)), io.y, estimate_direct_term
        )
        K = np.zeros((A.shape[0], io.p))
    else:
        e = np.asarray(e, dtype=float).reshape(io.N, io.p)
        x0, B, K, D, regularized = _observer_least_squares(
            A, C, io.u, e, io.y - e, estimate_direct_term
        )
    model = StateSpaceModel(A=A, B=B, C=C, D=D, K=K)
    return ObserverEstimate(B=B, D=D, K=K, x0=x0, model=model, regularized=regularized)


def _check(model: StateSpaceModel, u: np.ndarray, y: Optional[np.ndarray] = None):
    if u.ndim != 2 or u.shape[1] != model.m:
        raise DimensionError(f"input of shape {u.shape} does not match m={model.m}")
    if y is not None and (y.shape != (u.shape[0], model.p)):
        raise DimensionError(f"output of shape {y.shape} does not match p={model.p}")


def _initial(model: StateSpaceModel, x0) -> np.ndarray:
    if x0 is None:
        return np.zeros(model.n)
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.shape != (model.n,):
        raise DimensionError(f"initial state of shape {x0.shape} does not match n={model.n}")
    return x0


def predict(model: StateSpaceModel, io: IoBatch, x0=None) -> np.ndarray:
    """
    One-step-ahead predictions of the observer
    xhat(k+1) = A xhat(k) + B u(k) + K (y(k) - C xhat(k) - D u(k)), yhat(k) = C xhat(k) + D u(k).
    """
    _check(model, io.u, io.y)
    x = _initial(model, x0)
    yhat = np.zeros((io.N, model.p))
    for k in range(io.N):
        yhat[k] = model.C @ x + model.D @ io.u[k]
        x = model.A @ x + model.B @ io.u[k] + model.K @ (io.y[k] - yhat[k])
    return yhat


def simulate(model: StateSpaceModel, u: np.ndarray, x0=None) -> np.ndarray:
    """Free run x(k+1) = A x(k) + B u(k), y(k) = C x(k) + D u(k); K is not used."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None] if model.m else u.reshape(-1, 0)
    _check(model, u)
    x = _initial(model, x0)
    y = np.zeros((u.shape[0], model.p))
    for k in range(u.shape[0]):
        y[k] = model.C @ x + model.D @ u[k]
        x = model.A @ x + model.B @ u[k]
    return y


def estimate_initial_state(
    model: StateSpaceModel,
    io: IoBatch,
    fit_mode: Union[TypeFitMode, str] = TypeFitMode.PREDICTION,
) -> np.ndarray:
    """Least-squares initial state with the model fixed, for the predictor or for the free-run simulation."""
    fit_mode = TypeFitMode(fit_mode)
    if model.n == 0:
        return np.zeros(0)
    if fit_mode == TypeFitMode.PREDICTION:
        A = model.A - model.K @ model.C
        free = predict(model, io)
    else:
        A = model.A
        free = simulate(model, io.u)
    Phi = np.zeros((io.N, model.p, model.n))
    power = model.C.copy()
    for k in range(io.N):
        Phi[k] = power
        power = power @ A
    Phi = Phi.reshape(io.N * model.p, model.n)
    if not np.all(np.isfinite(Phi)):
        # divergent free response, the transient is left out
        return np.zeros(model.n)
    return linalg.lstsq(Phi, (io.y - free).ravel())[0]


def model_output(
    model: StateSpaceModel,
    io: IoBatch,
    fit_mode: Union[TypeFitMode, str] = TypeFitMode.PREDICTION,
    x0=None,
) -> np.ndarray:
    """Predicted or simulated output; the initial state is estimated on io when not given."""
    fit_mode = TypeFitMode(fit_mode)
    if x0 is None:
        x0 = estimate_initial_state(model, io, fit_mode)
    if fit_mode == TypeFitMode.PREDICTION:
        return predict(model, io, x0)
    return simulate(model, io.u, x0)


def fit(y, yhat) -> float:
    """
    100 (1 - ||y - yhat|| / ||y - mean(y)||), evaluated per channel and averaged.

    :raises UndefinedFitError: a channel of y is constant
    """
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if yhat.ndim == 1:
        yhat = yhat[:, None]
    if y.shape != yhat.shape:
        raise DimensionError(f"fit of series with shapes {y.shape} and {yhat.shape}")
    spread = np.linalg.norm(y - y.mean(axis=0), axis=0)
    if y.shape[0] == 0 or np.any(spread == 0.0):
        raise UndefinedFitError("fit is undefined for a constant output channel")
    error = np.linalg.norm(y - yhat, axis=0)
    return float(np.mean(100.0 * (1.0 - error / spread)))


def markov_parameters(model: StateSpaceModel, count: int) -> np.ndarray:
    """Open-loop impulse response blocks [D, C B, C A B, ...], shape (count, p, m)."""
    blocks = np.zeros((count, model.p, model.m))
    if count == 0:
        return blocks
    blocks[0] = model.D
    power = model.C.copy()
    for k in range(1, count):
        blocks[k] = power @ model.B
        power = power @ model.A
    return blocks
