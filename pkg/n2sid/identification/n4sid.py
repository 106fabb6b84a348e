__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

import logging
import math
import time
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from n2sid.data_structure.base import IdentificationBase
from n2sid.data_structure.configuration import N2SIDConfiguration
from n2sid.data_structure.errors import DimensionError, N2SIDError, NumericalError
from n2sid.data_structure.model import StateSpaceModel, IoBatch
from n2sid.data_structure.type import TypeIdentification, TypeFitMode
import n2sid.utility.extraction as utils_ext
import n2sid.utility.logger as utils_log
import n2sid.utility.visualization as utils_vis
from n2sid.utility.structured_ops import build_hankel

logger = logging.getLogger(__name__)


def past_horizon(N: int, s: int, m: int, p: int) -> int:
    """
    Largest past horizon h <= s for which the stacked data matrix [U_p; Y_p; U_f] with j = N - s - h + 1 columns has
    fewer rows than columns.

    :raises DimensionError: no horizon >= 1 qualifies
    """
    for h in range(s, 0, -1):
        j = N - s - h + 1
        if (m + p) * h + m * s <= j - 1:
            return h
    raise DimensionError(f"{N} samples are too few for a projection with s={s}")


class N4SID(IdentificationBase):
    """
    Projection-based subspace identification. The future outputs are projected obliquely onto the past data along
    the future inputs, the order is truncated in the SVD of the projection and (A, C) follow from shift invariance.
    (B, D, K, x0) come from the same observer least squares as in N2SID, K from a pseudo-linear regression on the
    prediction errors.
    """

    method_name = TypeIdentification.N4SID

    def __init__(self, config: N2SIDConfiguration):
        super(N4SID, self).__init__(config)
        self.singular_values: Optional[np.ndarray] = None
        self.order_fits: dict = {}
        self._gamma: Optional[np.ndarray] = None

    def _projection(self, io: IoBatch, s: int, h: int) -> np.ndarray:
        m, p = io.m, io.p
        Yh = build_hankel(io.y, h + s).values
        Yp, Yf = Yh[: h * p], Yh[h * p :]
        if m:
            Uh = build_hankel(io.u, h + s).values
            Up, Uf = Uh[: h * m], Uh[h * m :]
            Wp = np.vstack([Up, Yp])
        else:
            Uf = np.zeros((0, Yf.shape[1]))
            Wp = Yp
        regressors = np.vstack([Wp, Uf])
        # Yf ~ Lw Wp + Lu Uf, the oblique projection keeps Lw Wp
        L = linalg.lstsq(regressors.T, Yf.T)[0].T
        Lw = L[:, : Wp.shape[0]]
        return Lw @ Wp

    def _realize(self, io: IoBatch, order: int) -> Tuple[StateSpaceModel, np.ndarray]:
        baseline = self.configuration.baseline
        p, m = io.p, io.m
        if order == 0:
            D = (
                linalg.lstsq(io.u, io.y)[0].T
                if (m and baseline.estimate_direct_term)
                else np.zeros((p, m))
            )
            model = StateSpaceModel(
                A=np.zeros((0, 0)),
                B=np.zeros((0, m)),
                C=np.zeros((p, 0)),
                D=D,
                K=np.zeros((0, p)),
            )
            return model, np.zeros(0)
        if order > self.singular_values.size or order > self._gamma.shape[0] - p:
            raise DimensionError(f"order {order} exceeds the rank of the projection")
        gamma = self._gamma[:, :order] * np.sqrt(self.singular_values[:order])
        C = gamma[:p]
        A = linalg.lstsq(gamma[:-p], gamma[p:])[0]
        if not np.all(np.isfinite(A)):
            raise NumericalError(f"shift invariance failed for order {order}")

        # output error first, then the prediction errors of the previous model drive K
        estimate = utils_ext.estimate_innovation_inputs(
            A, C, io, None, baseline.estimate_direct_term
        )
        model, x0 = estimate.model, estimate.x0
        scale = max(float(np.linalg.norm(io.y)), 1e-300)
        for _ in range(baseline.k_iterations):
            e = io.y - utils_ext.predict(model, io, x0)
            if not np.all(np.isfinite(e)) or np.linalg.norm(e) <= 1e-10 * scale:
                break
            estimate = utils_ext.estimate_innovation_inputs(
                A, C, io, e, baseline.estimate_direct_term
            )
            model, x0 = estimate.model, estimate.x0
        return model, x0

    def compute(
        self,
        io: IoBatch,
        validation: Optional[IoBatch] = None,
        verbose: bool = False,
    ):
        baseline = self.configuration.baseline
        s = self.configuration.identification.s
        if io.N < 2 * s:
            message = f"N4SID needs N >= 2s, got N={io.N} and s={s}"
            utils_log.print_and_log_error(logger, message, verbose)
            raise DimensionError(message)
        h = baseline.past_horizon or past_horizon(io.N, s, io.m, io.p)
        time_start = time.perf_counter()
        projection = self._projection(io, s, h)
        U, sv, _ = np.linalg.svd(projection, full_matrices=False)
        self._gamma, self.singular_values = U, sv
        self.timings["projection"] = time.perf_counter() - time_start

        if baseline.order is not None:
            orders = [baseline.order]
        else:
            orders = range(0, min(baseline.order_max, s - 1) + 1)
        best, best_fit = None, -math.inf
        self.order_fits = {}
        for order in orders:
            try:
                model, x0 = self._realize(io, order)
                value = utils_ext.fit(
                    io.y,
                    utils_ext.model_output(model, io, TypeFitMode.PREDICTION, x0),
                )
            except N2SIDError as e:
                utils_log.print_and_log_warning(
                    logger, f"* N4SID order {order} discarded: {e}", verbose
                )
                continue
            if not math.isfinite(value):
                continue
            self.order_fits[order] = value
            # strict improvement, equal fits keep the lower order
            if value > best_fit:
                best, best_fit = (order, model, x0), value
        if best is None:
            raise NumericalError("N4SID produced no model for any order")
        self.order, self.model, self.x0 = best
        self.timings["realization"] = time.perf_counter() - time_start - self.timings["projection"]
        utils_log.print_and_log_debug(
            logger,
            f"* N4SID past horizon {h}, order {self.order}, identification fit {best_fit:.3f}",
            verbose,
        )

    def visualize(self, path_output: Optional[str] = None):
        if self.singular_values is None:
            return
        utils_vis.plot_singular_values(
            self.singular_values,
            self.order,
            "N4SID_singular_values",
            path_output or self.configuration.general.path_output,
        )


def n4sid_baseline(io: IoBatch, config: N2SIDConfiguration) -> StateSpaceModel:
    """Baseline model of a batch with the settings of config.baseline and s of config.identification."""
    method = N4SID(config)
    return method.identify(io, verbose=False)
