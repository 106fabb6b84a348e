__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

import logging
import math
import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from n2sid.data_structure.base import IdentificationBase
from n2sid.data_structure.configuration import N2SIDConfiguration
from n2sid.data_structure.errors import (
    DimensionError,
    NumericalError,
    SolverConvergenceError,
    N2SIDError,
)
from n2sid.data_structure.model import StateSpaceModel, IoBatch
from n2sid.data_structure.type import (
    TypeIdentification,
    TypeLambdaSelection,
    TypeFitMode,
)
import n2sid.utility.extraction as utils_ext
import n2sid.utility.logger as utils_log
import n2sid.utility.solver as utils_sol
import n2sid.utility.visualization as utils_vis

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class SweepPoint:
    """Outcome of one lambda of a sweep; model is None when the extraction failed."""

    lambda_over_N: float
    solution: Optional[utils_sol.N2sidSolution] = None
    model: Optional[StateSpaceModel] = None
    x0: Optional[np.ndarray] = None
    order: Optional[int] = None
    fit: float = math.nan
    converged: bool = True
    failure: Optional[str] = None


def _selected_index(points: List[SweepPoint]) -> int:
    best, best_fit = None, -math.inf
    for index in sorted(range(len(points)), key=lambda i: points[i].lambda_over_N):
        point = points[index]
        if point.model is None or not math.isfinite(point.fit):
            continue
        # ascending lambda, so equal fits move the choice to the larger lambda
        if point.fit >= best_fit:
            best, best_fit = index, point.fit
    if best is None:
        raise NumericalError("no lambda of the sweep produced a model")
    return best


def select_lambda(points: List[SweepPoint]) -> Tuple[float, StateSpaceModel]:
    """
    Lambda/N whose extracted model has the largest fit on the selection data; ties go to the larger lambda.

    :raises NumericalError: no point of the sweep carries a model
    """
    point = points[_selected_index(points)]
    return point.lambda_over_N, point.model


class N2SID(IdentificationBase):
    """
    Nuclear norm subspace identification: a lambda sweep of the convex program, order selection on the singular
    values of the low-rank residual, observer-form extraction and selection of lambda by the fit criterion.
    """

    method_name = TypeIdentification.N2SID

    def __init__(self, config: N2SIDConfiguration):
        super(N2SID, self).__init__(config)
        self.sweep: List[SweepPoint] = []
        self.solution: Optional[utils_sol.N2sidSolution] = None
        self.lambda_selected: Optional[float] = None

    def lambdas(self) -> np.ndarray:
        ident = self.configuration.identification
        if ident.lambda_value is not None:
            return np.array([ident.lambda_value], dtype=float)
        return utils_sol.lambda_grid(ident.lambda_count, ident.lambda_lo, ident.lambda_hi)

    def _extract(
        self, point: SweepPoint, io: IoBatch, output_only: bool
    ) -> SweepPoint:
        ident = self.configuration.identification
        s, p = ident.s, io.p
        solution = point.solution
        if ident.order is not None:
            order = ident.order
        else:
            order = utils_ext.select_order(
                solution.singular_values,
                cap=min(ident.order_cap, s - 1),
                floor=ident.rank_floor,
            ).chosen_order
        A_obs, C = utils_ext.extract_AC(solution.minimized_matrix, order, s, p)
        data = IoBatch(u=np.zeros((io.N, 0)), y=io.y) if output_only else io
        estimate = utils_ext.estimate_BDK(
            A_obs, C, data, estimate_direct_term=not output_only
        )
        point.model, point.x0, point.order = estimate.model, estimate.x0, order
        return point

    def _selection_fit(
        self, point: SweepPoint, io: IoBatch, validation: Optional[IoBatch]
    ) -> float:
        ident = self.configuration.identification
        if ident.lambda_selection == TypeLambdaSelection.VALIDATION.value:
            data, x0 = validation, None
        else:
            data, x0 = io, point.x0 if ident.fit_mode == TypeFitMode.PREDICTION.value else None
        if point.model.m != data.m:
            data = IoBatch(u=np.zeros((data.N, 0)), y=data.y)
        return utils_ext.fit(
            data.y, utils_ext.model_output(point.model, data, ident.fit_mode, x0)
        )

    def compute(
        self,
        io: IoBatch,
        validation: Optional[IoBatch] = None,
        verbose: bool = False,
    ):
        ident = self.configuration.identification
        s = ident.s
        if io.N < 2 * s:
            message = f"N2SID needs N >= 2s, got N={io.N} and s={s}"
            utils_log.print_and_log_error(logger, message, verbose)
            raise DimensionError(message)
        if ident.lambda_selection == TypeLambdaSelection.VALIDATION.value and validation is None:
            raise DimensionError("lambda selection on validation data needs a validation batch")
        output_only = ident.output_only or io.output_only
        self.sweep = []
        operator, previous = None, None
        time_solve, time_extract = 0.0, 0.0
        for lambda_over_N in self.lambdas():
            problem = utils_sol.N2sidProblem.from_batch(
                io,
                s,
                float(lambda_over_N),
                sketch_width=ident.sketch_width,
                sketch_seed=ident.sketch_seed,
                output_only=output_only,
            )
            if operator is None:
                operator = utils_sol.StructuredOperator(problem)
            point = SweepPoint(lambda_over_N=float(lambda_over_N))
            time_start = time.perf_counter()
            try:
                point.solution = utils_sol.solve_n2sid(
                    problem,
                    self.configuration.solver,
                    operator=operator,
                    warm_start=previous if self.configuration.solver.warm_start else None,
                )
            except SolverConvergenceError as e:
                utils_log.print_and_log_warning(
                    logger,
                    f"* lambda/N={lambda_over_N:.4g}: {e}, continuing with the best iterate",
                    verbose,
                )
                point.solution, point.converged = e.solution, False
            time_solve += time.perf_counter() - time_start
            previous = point.solution

            time_start = time.perf_counter()
            try:
                self._extract(point, io, output_only)
                point.fit = self._selection_fit(point, io, validation)
            except N2SIDError as e:
                point.model, point.failure = None, f"{type(e).__name__}: {e}"
                utils_log.print_and_log_warning(
                    logger, f"* lambda/N={lambda_over_N:.4g} discarded: {e}", verbose
                )
            time_extract += time.perf_counter() - time_start
            utils_log.print_and_log_debug(
                logger,
                f"* lambda/N={lambda_over_N:.4g}: order {point.order}, fit {point.fit:.3f}",
                verbose,
            )
            self.sweep.append(point)

        index = _selected_index(self.sweep)
        chosen = self.sweep[index]
        self.lambda_selected = chosen.lambda_over_N
        self.solution = chosen.solution
        self.model, self.x0, self.order = chosen.model, chosen.x0, chosen.order
        self.timings.update({"solve": time_solve, "extract": time_extract})
        utils_log.print_and_log_info(
            logger,
            f"*\t\t lambda/N = {self.lambda_selected:.4g} selected, fit {chosen.fit:.3f}",
            verbose,
        )

    def visualize(self, path_output: Optional[str] = None):
        if self.solution is None:
            return
        path = path_output or self.configuration.general.path_output
        utils_vis.plot_singular_values(
            self.solution.singular_values, self.order, "N2SID_singular_values", path
        )
        if len(self.sweep) > 1:
            utils_vis.plot_lambda_sweep(
                [point.lambda_over_N for point in self.sweep],
                {"selection fit": [point.fit for point in self.sweep]},
                "N2SID_lambda_sweep",
                path,
            )
