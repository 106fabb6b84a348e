__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

"""
Data generation for the identification studies: random stable models, sign-of-Gaussian inputs, simulation of the
innovation form and of the observer-based state feedback loop.
"""

import logging
from typing import Optional, Tuple

import numpy as np

import n2sid.utility.logger as utils_log
from n2sid.data_structure.configuration import (
    OpenLoopConfiguration,
    ClosedLoopConfiguration,
)
from n2sid.data_structure.errors import (
    DimensionError,
    ConfigurationError,
    GenerationError,
)
from n2sid.data_structure.model import StateSpaceModel, IoBatch
from n2sid.utility.general import SeedLike, make_rng

logger = logging.getLogger(__name__)


def random_stable_system(
    config: OpenLoopConfiguration, seed: SeedLike = None
) -> StateSpaceModel:
    """
    Random model of order n: A has standard normal entries rescaled to a spectral radius drawn uniformly from
    [radius_min, stability_cap]; B, C, D and K are standard normal. Draws whose spectral radius exceeds the cap are
    discarded.

    :param config: dimensions and stability cap
    :param seed: seed or generator, config.seed when None
    :raises GenerationError: no admissible draw within config.max_draws
    """
    rng = make_rng(config.seed if seed is None else seed)
    n, m, p = config.n, config.m, config.p
    for _ in range(config.max_draws):
        A = rng.standard_normal((n, n))
        radius = np.max(np.abs(np.linalg.eigvals(A)))
        if radius == 0.0 or not np.isfinite(radius):
            continue
        A *= rng.uniform(config.radius_min, config.stability_cap) / radius
        if np.max(np.abs(np.linalg.eigvals(A))) > config.stability_cap:
            continue
        return StateSpaceModel(
            A=A,
            B=rng.standard_normal((n, m)),
            C=rng.standard_normal((p, n)),
            D=rng.standard_normal((p, m)),
            K=rng.standard_normal((n, p)),
        )
    utils_log.print_and_log_error(
        logger, f"* no stable model of order {n} within {config.max_draws} draws"
    )
    raise GenerationError(f"no admissible model within {config.max_draws} draws")


def sign_input(N: int, seed: SeedLike = None, m: int = 1) -> np.ndarray:
    """N x m input with entries sign(randn), zeros mapped to +1."""
    if N < 0 or m < 0:
        raise DimensionError(f"invalid input size {N} x {m}")
    rng = make_rng(seed)
    return np.where(rng.standard_normal((N, m)) >= 0.0, 1.0, -1.0)


def _as_samples(signal, N: Optional[int], width: int, name: str) -> np.ndarray:
    signal = np.asarray(signal, dtype=float)
    if signal.size == 0 and width == 0:
        return np.zeros((N or 0, 0))
    if signal.ndim == 1:
        signal = signal[:, None]
    if signal.ndim != 2 or signal.shape[1] != width or (N is not None and signal.shape[0] != N):
        raise DimensionError(
            f"{name} of shape {signal.shape} does not match {N} samples of width {width}"
        )
    return signal


def simulate_states(
    model: StateSpaceModel, u, e, x0=None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Innovation-form recursion x(k+1) = A x(k) + B u(k) + K e(k), y(k) = C x(k) + D u(k) + e(k).

    :return: states x(0..N) as rows (N+1 x n) and outputs (N x p)
    """
    e = _as_samples(e, None, model.p, "innovation")
    N = e.shape[0]
    u = _as_samples(u, N, model.m, "input")
    x = np.zeros(model.n) if x0 is None else np.asarray(x0, dtype=float).ravel()
    if x.shape != (model.n,):
        raise DimensionError(f"initial state of shape {x.shape} does not match n={model.n}")
    states = np.zeros((N + 1, model.n))
    y = np.zeros((N, model.p))
    states[0] = x
    for k in range(N):
        y[k] = model.C @ x + model.D @ u[k] + e[k]
        x = model.A @ x + model.B @ u[k] + model.K @ e[k]
        states[k + 1] = x
    return states, y


def simulate_innovation(model: StateSpaceModel, u, e, x0=None) -> IoBatch:
    """Input/output batch of the innovation-form model."""
    states, y = simulate_states(model, u, e, x0)
    u = _as_samples(u, y.shape[0], model.m, "input")
    return IoBatch(u=u, y=y)


def feedforward_gain(plant: StateSpaceModel, L: np.ndarray) -> np.ndarray:
    """
    Gain g making the steady-state gain from the reference to y equal to one under u = -L xhat + g r:
    g = ((C - D L)(I - A + B L)^-1 B + D)^-1.

    :raises ConfigurationError: the closed-loop steady-state gain is singular
    """
    L = np.atleast_2d(np.asarray(L, dtype=float))
    if L.shape != (plant.m, plant.n):
        raise ConfigurationError(f"feedback gain {L.shape} does not match m={plant.m}, n={plant.n}")
    try:
        dc = (plant.C - plant.D @ L) @ np.linalg.solve(
            np.eye(plant.n) - plant.A + plant.B @ L, plant.B
        ) + plant.D
        if dc.shape[0] != dc.shape[1]:
            raise np.linalg.LinAlgError("non-square steady-state gain")
        return np.linalg.inv(dc)
    except np.linalg.LinAlgError as e:
        utils_log.print_and_log_error(logger, f"* steady-state gain is singular: {e}")
        raise ConfigurationError(f"closed-loop steady-state gain is singular: {e}") from e


def closed_loop_matrix(plant: StateSpaceModel, L: np.ndarray) -> np.ndarray:
    """State matrix of (plant state, observer state) under u = -L xhat."""
    L = np.atleast_2d(np.asarray(L, dtype=float))
    A, B, C, K = plant.A, plant.B, plant.C, plant.K
    return np.block([[A, -B @ L], [K @ C, A - B @ L - K @ C]])


def simulate_closed_loop(
    config: ClosedLoopConfiguration,
    r,
    seed: SeedLike = None,
    e=None,
    x0=None,
) -> IoBatch:
    """
    Plant in innovation form with observer-based state feedback u(k) = -L xhat(k) + g r(k), observer
    xhat(k+1) = A xhat(k) + B u(k) + K (y(k) - C xhat(k) - D u(k)) started at zero.

    :param config: plant, feedback gain and noise level
    :param r: reference signal, N x m
    :param seed: seed or generator for the innovations and the initial state, config.seed when None
    :param e: explicit innovations replacing the random ones
    :param x0: explicit initial plant state replacing the random one
    :return: identification data (u, y)
    """
    plant = config.plant()
    L = config.feedback()
    g = feedforward_gain(plant, L)
    r = _as_samples(r, None, plant.m, "reference")
    N = r.shape[0]
    rng = make_rng(config.seed if seed is None else seed)
    if e is None:
        e = config.noise_std * rng.standard_normal((N, plant.p))
    e = _as_samples(e, N, plant.p, "innovation")
    if x0 is None:
        x0 = config.x0_std * rng.standard_normal(plant.n)
    x = np.asarray(x0, dtype=float).ravel()
    xhat = np.zeros(plant.n)
    u = np.zeros((N, plant.m))
    y = np.zeros((N, plant.p))
    A, B, C, D, K = plant.A, plant.B, plant.C, plant.D, plant.K
    for k in range(N):
        u[k] = -L @ xhat + g @ r[k]
        y[k] = C @ x + D @ u[k] + e[k]
        x = A @ x + B @ u[k] + K @ e[k]
        xhat = A @ xhat + B @ u[k] + K @ (y[k] - C @ xhat - D @ u[k])
    return IoBatch(u=u, y=y)


def generate_open_loop_trial(
    config: OpenLoopConfiguration, seed: SeedLike = None
) -> Tuple[StateSpaceModel, IoBatch, IoBatch]:
    """Random model with an identification and an independent validation batch."""
    rng = make_rng(config.seed if seed is None else seed)
    model = random_stable_system(config, rng)

    def batch(length: int, x0_std: float) -> IoBatch:
        u = sign_input(length, rng, config.m)
        e = config.noise_std * rng.standard_normal((length, config.p))
        x0 = x0_std * rng.standard_normal(config.n)
        return simulate_innovation(model, u, e, x0)

    identification = batch(config.N, config.x0_std)
    validation = batch(config.N_val, config.x0_std_val)
    return model, identification, validation


def generate_closed_loop_trial(
    config: ClosedLoopConfiguration, seed: SeedLike = None
) -> Tuple[StateSpaceModel, IoBatch, IoBatch]:
    """Fixed plant with an identification and a validation batch from fresh reference and noise realizations."""
    rng = make_rng(config.seed if seed is None else seed)
    plant = config.plant()
    identification = simulate_closed_loop(
        config, sign_input(config.N, rng, plant.m), rng
    )
    validation = simulate_closed_loop(
        config, sign_input(config.N_val, rng, plant.m), rng
    )
    return plant, identification, validation
