__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

"""
Structured matrices of the data equation

    Y_s = O_s X + T_u U_s + T_y Y_s + E_s

block-Hankel data matrices, lower-triangular block-Toeplitz operators given by their Markov blocks, the extended
observability matrix of the observer form and the state sequence.
"""

from dataclasses import dataclass
from typing import Tuple, Union, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from n2sid.data_structure.errors import DimensionError
from n2sid.data_structure.model import StateSpaceModel


def _frozen(array) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.flags.writeable = False
    return array


def _as_series(signal) -> np.ndarray:
    signal = np.asarray(signal, dtype=float)
    if signal.ndim == 1:
        signal = signal[:, None]
    if signal.ndim != 2:
        raise DimensionError(f"a signal must be N x d, got shape {signal.shape}")
    return signal


@dataclass(frozen=True)
class HankelSpec:
    s: int
    N: int
    block_dim: int

    def __post_init__(self):
        if self.s < 1:
            raise DimensionError(f"s must be >= 1, got {self.s}")
        if self.N < self.s:
            raise DimensionError(
                f"signal length N={self.N} is shorter than s={self.s}"
            )
        if self.block_dim < 0:
            raise DimensionError(f"invalid block dimension {self.block_dim}")

    @property
    def cols(self) -> int:
        return self.N - self.s + 1

    @property
    def shape(self) -> Tuple[int, int]:
        return self.s * self.block_dim, self.cols


@dataclass(frozen=True, eq=False)
class BlockHankel:
    spec: HankelSpec
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        if values.shape != self.spec.shape:
            raise DimensionError(
                f"Hankel values of shape {values.shape} do not match {self.spec.shape}"
            )
        object.__setattr__(self, "values", values)

    def block(self, i: int, j: int) -> np.ndarray:
        d = self.spec.block_dim
        return self.values[i * d : (i + 1) * d, j]


@dataclass(frozen=True, eq=False)
class ToeplitzBlocks:
    """
    Lower-triangular block-Toeplitz matrix given by its first block column. markov has shape (s, rows, cols); block
    (i, j) of the full matrix is markov[i - j] for i >= j. When strictly_causal is set, markov[0] is zero.
    """

    markov: np.ndarray
    strictly_causal: bool = False

    def __post_init__(self):
        markov = _frozen(self.markov)
        if markov.ndim != 3 or markov.shape[0] < 1:
            raise DimensionError(
                f"Markov blocks must be stacked as (s, rows, cols), got {markov.shape}"
            )
        if self.strictly_causal and np.any(markov[0] != 0.0):
            raise DimensionError("the leading block of a strictly causal operator must be zero")
        object.__setattr__(self, "markov", markov)

    @property
    def s(self) -> int:
        return self.markov.shape[0]

    @property
    def block_shape(self) -> Tuple[int, int]:
        return self.markov.shape[1], self.markov.shape[2]

    @property
    def free_blocks(self) -> np.ndarray:
        """Blocks that are free parameters, the pinned zero block excluded."""
        return self.markov[1:] if self.strictly_causal else self.markov


@dataclass(frozen=True, eq=False)
class ObservabilityMatrix:
    values: np.ndarray
    p: int

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))

    @property
    def s(self) -> int:
        return self.values.shape[0] // self.p

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def block(self, k: int) -> np.ndarray:
        return self.values[k * self.p : (k + 1) * self.p]


@dataclass(frozen=True, eq=False)
class StateSequence:
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))


def build_hankel(signal, s: int) -> BlockHankel:
    """
    Block-Hankel matrix of a signal: block (i, j) holds sample i + j (0-based), size (s d) x (N - s + 1).

    :param signal: samples as rows, N x d (a flat array is a single channel)
    :param s: number of block rows
    """
    signal = _as_series(signal)
    spec = HankelSpec(s=s, N=signal.shape[0], block_dim=signal.shape[1])
    # windows[j, c, i] = signal[j + i, c]
    windows = sliding_window_view(signal, s, axis=0)
    values = windows.transpose(2, 1, 0).reshape(spec.shape)
    return BlockHankel(spec=spec, values=values)


def hankel_adjoint(
    M: Union[np.ndarray, BlockHankel], s: int, block_dim: int = 1
) -> np.ndarray:
    """
    Adjoint of build_hankel: sample k collects every entry of M whose Hankel position refers to k.

    :return: series of shape N x block_dim, N = columns + s - 1
    """
    if isinstance(M, BlockHankel):
        s, block_dim, M = M.spec.s, M.spec.block_dim, M.values
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or s < 1 or M.shape[0] != s * block_dim:
        raise DimensionError(
            f"matrix of shape {M.shape} is not compatible with s={s}, block_dim={block_dim}"
        )
    cols = M.shape[1]
    out = np.zeros((cols + s - 1, block_dim))
    blocks = M.reshape(s, block_dim, cols)
    for i in range(s):
        out[i : i + cols] += blocks[i].T
    return out


def _hankel_values(H: Union[np.ndarray, BlockHankel]) -> np.ndarray:
    return H.values if isinstance(H, BlockHankel) else np.asarray(H, dtype=float)


def toeplitz_apply(T: ToeplitzBlocks, H: Union[np.ndarray, BlockHankel]) -> np.ndarray:
    """
    Product of the block-Toeplitz operator with a matrix of s block rows, computed block row by block row.
    """
    rows, cols = T.block_shape
    if isinstance(H, BlockHankel) and (
        H.spec.s != T.s or H.spec.block_dim != cols
    ):
        raise DimensionError(
            f"Toeplitz operator (s={T.s}, blocks {rows}x{cols}) does not match Hankel "
            f"matrix (s={H.spec.s}, block_dim={H.spec.block_dim})"
        )
    values = _hankel_values(H)
    if values.ndim != 2 or values.shape[0] != T.s * cols:
        raise DimensionError(
            f"matrix with {values.shape[0]} rows is not compatible with s={T.s} blocks of {cols} columns"
        )
    width = values.shape[1]
    stacked = values.reshape(T.s, cols, width)
    out = np.zeros((T.s, rows, width))
    first = 1 if T.strictly_causal else 0
    for i in range(T.s):
        for j in range(0, i + 1 - first):
            out[i] += T.markov[i - j] @ stacked[j]
    return out.reshape(T.s * rows, width)


def toeplitz_dense(T: ToeplitzBlocks) -> np.ndarray:
    """Explicit (s rows) x (s cols) lower-triangular block-Toeplitz matrix."""
    rows, cols = T.block_shape
    dense = np.zeros((T.s * rows, T.s * cols))
    for i in range(T.s):
        for j in range(i + 1):
            dense[i * rows : (i + 1) * rows, j * cols : (j + 1) * cols] = T.markov[
                i - j
            ]
    return dense


def build_observability(A_obs: np.ndarray, C: np.ndarray, s: int) -> ObservabilityMatrix:
    """Extended observability matrix with blocks C A_obs^k, k = 0..s-1."""
    A_obs = np.atleast_2d(np.asarray(A_obs, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if A_obs.shape[0] != A_obs.shape[1] or C.shape[1] != A_obs.shape[0]:
        raise DimensionError(
            f"A_obs {A_obs.shape} and C {C.shape} are not compatible"
        )
    if s < 1:
        raise DimensionError(f"s must be >= 1, got {s}")
    blocks = [C]
    for _ in range(s - 1):
        blocks.append(blocks[-1] @ A_obs)
    return ObservabilityMatrix(values=np.vstack(blocks), p=C.shape[0])


def markov_blocks_from_model(
    model: StateSpaceModel, s: int
) -> Tuple[ToeplitzBlocks, ToeplitzBlocks]:
    """
    Toeplitz operators of the observer form: T_u with blocks [D, C Bo, C Ao Bo, ...] and the strictly causal T_y
    with blocks [0, C K, C Ao K, ...], where Ao = A - K C and Bo = B - K D.
    """
    if s < 1:
        raise DimensionError(f"s must be >= 1, got {s}")
    A_o, B_o = model.observer_matrices
    n, m, p = model.dims
    tu = np.zeros((s, p, m))
    ty = np.zeros((s, p, p))
    tu[0] = model.D
    power = model.C.copy()
    for k in range(1, s):
        tu[k] = power @ B_o
        ty[k] = power @ model.K
        power = power @ A_o
    return ToeplitzBlocks(tu), ToeplitzBlocks(ty, strictly_causal=True)


def state_sequence(states: np.ndarray, s: int, N: Optional[int] = None) -> StateSequence:
    """
    State sequence [x(0), ..., x(N - s)] as columns.

    :param states: state trajectory with samples as rows (at least N - s + 1 of them)
    :param s: number of block rows of the matching Hankel matrices
    :param N: data length, defaults to the trajectory length
    """
    states = _as_series(states)
    N = states.shape[0] if N is None else N
    cols = N - s + 1
    if cols < 1 or states.shape[0] < cols:
        raise DimensionError(
            f"{states.shape[0]} states cannot fill {cols} columns (N={N}, s={s})"
        )
    return StateSequence(values=states[:cols].T)


def structured_residual(
    Yhat: Union[np.ndarray, BlockHankel],
    Y: BlockHankel,
    Ty: ToeplitzBlocks,
    U: Optional[BlockHankel] = None,
    Tu: Optional[ToeplitzBlocks] = None,
) -> np.ndarray:
    """
    Residual Yhat_s - T_u U_s - T_y Y_s; the input term is dropped when U or Tu is None.
    """
    residual = _hankel_values(Yhat) - toeplitz_apply(Ty, Y)
    if U is not None and Tu is not None:
        residual = residual - toeplitz_apply(Tu, U)
    return residual
