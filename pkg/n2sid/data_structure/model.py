__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

import hashlib
from dataclasses import dataclass
from typing import Tuple, Dict, Any, List

import numpy as np

from n2sid.data_structure.errors import DimensionError

MODEL_SCHEMA_VERSION = 1


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """
    Discrete-time linear model in innovation form

        x(k+1) = A x(k) + B u(k) + K e(k)
        y(k)   = C x(k) + D u(k) + e(k)

    The input dimension m may be zero (output-only models), in which case B is n x 0 and D is p x 0.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    K: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionError(f"A must be square, got shape {A.shape}")
        n = A.shape[0]
        C = np.asarray(self.C, dtype=float)
        if C.ndim != 2 or C.shape[1] != n:
            raise DimensionError(f"C must have {n} columns, got shape {C.shape}")
        p = C.shape[0]
        B = np.asarray(self.B, dtype=float)
        D = np.asarray(self.D, dtype=float)
        if B.ndim != 2 or B.shape[0] != n:
            raise DimensionError(f"B must have {n} rows, got shape {B.shape}")
        m = B.shape[1]
        if D.ndim != 2 or D.shape != (p, m):
            raise DimensionError(f"D must have shape {(p, m)}, got {D.shape}")
        K = np.asarray(self.K, dtype=float)
        if K.ndim != 2 or K.shape != (n, p):
            raise DimensionError(f"K must have shape {(n, p)}, got {K.shape}")
        for name, value in zip("ABCDK", (A, B, C, D, K)):
            value = value.copy()
            value.flags.writeable = False
            object.__setattr__(self, name, value)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.n, self.m, self.p

    @property
    def observer_matrices(self) -> Tuple[np.ndarray, np.ndarray]:
        """System and input matrices of the observer form, A - KC and B - KD."""
        return self.A - self.K @ self.C, self.B - self.K @ self.D

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of A sorted by real then imaginary part."""
        return np.sort_complex(np.linalg.eigvals(self.A)) if self.n else np.zeros(0, complex)

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues()))) if self.n else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": MODEL_SCHEMA_VERSION,
            "n": self.n,
            "m": self.m,
            "p": self.p,
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "D": self.D.tolist(),
            "K": self.K.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StateSpaceModel":
        if data.get("schema_version") != MODEL_SCHEMA_VERSION:
            raise DimensionError(
                f"unsupported model schema version {data.get('schema_version')}"
            )
        n, m, p = int(data["n"]), int(data["m"]), int(data["p"])
        return cls(
            A=np.array(data["A"], dtype=float).reshape(n, n),
            B=np.array(data["B"], dtype=float).reshape(n, m),
            C=np.array(data["C"], dtype=float).reshape(p, n),
            D=np.array(data["D"], dtype=float).reshape(p, m),
            K=np.array(data["K"], dtype=float).reshape(n, p),
        )


@dataclass(frozen=True, eq=False)
class IoBatch:
    """
    Paired input/output time series, stored sample-major: u is N x m and y is N x p.

    Output-only batches carry an N x 0 input.
    """

    u: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        if y.ndim != 2:
            raise DimensionError(f"y must be N x p, got shape {y.shape}")
        u = np.asarray(self.u, dtype=float)
        if u.size == 0:
            u = np.zeros((y.shape[0], 0))
        elif u.ndim == 1:
            u = u[:, None]
        if u.ndim != 2 or u.shape[0] != y.shape[0]:
            raise DimensionError(
                f"u and y must have the same number of samples, got {u.shape} and {y.shape}"
            )
        for name, value in (("u", u), ("y", y)):
            value = np.ascontiguousarray(value)
            value.flags.writeable = False
            object.__setattr__(self, name, value)

    @property
    def N(self) -> int:
        return self.y.shape[0]

    @property
    def m(self) -> int:
        return self.u.shape[1]

    @property
    def p(self) -> int:
        return self.y.shape[1]

    @property
    def output_only(self) -> bool:
        return self.m == 0

    def header(self) -> List[str]:
        return [f"u{i + 1}" for i in range(self.m)] + [f"y{i + 1}" for i in range(self.p)]

    def stacked(self) -> np.ndarray:
        """Samples as rows, inputs first: the layout of the CSV exchange format."""
        return np.hstack([self.u, self.y])

    def digest(self) -> str:
        """sha256 of the shapes and raw sample bytes, used to check that methods consume identical data."""
        h = hashlib.sha256()
        h.update(f"{self.N},{self.m},{self.p};".encode())
        h.update(self.u.tobytes())
        h.update(self.y.tobytes())
        return h.hexdigest()
