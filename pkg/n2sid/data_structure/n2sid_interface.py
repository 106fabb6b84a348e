__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

import os
import logging
from typing import Any, Dict, List, Optional, Type

import numpy as np

from n2sid.data_structure.base import IdentificationBase
from n2sid.data_structure.configuration import N2SIDConfiguration
from n2sid.data_structure.model import IoBatch
import n2sid.utility.general as utils_gen
import n2sid.utility.logger as utils_log

logger = logging.getLogger(__name__)


class N2SIDInterface:
    """
    Interface for identifying models from one data set with several methods
    """

    def __init__(self, config: N2SIDConfiguration):
        self.config = config
        self.io: Optional[IoBatch] = None
        self.methods: List[IdentificationBase] = []
        self.result_dict: Dict[str, Dict[str, Any]] = dict()

    def identify(
        self,
        io: IoBatch,
        methods: List[Type[IdentificationBase]],
        validation: Optional[IoBatch] = None,
        verbose: bool = True,
    ) -> Dict[str, Dict[str, Any]]:
        """
        Identifies a model with each of the given methods and collects their reports.
        """
        utils_log.print_and_log_info(
            logger,
            f"* Given methods: {', '.join([method.method_name.value for method in methods])}...",
            verbose,
        )
        self.io = io
        for method in methods:
            evaluator = method(self.config)
            evaluator.identify(io, validation, verbose=verbose)
            self.methods.append(evaluator)
            self.result_dict[evaluator.short_name] = self._report(evaluator)
        # printing out the summary of the identifications
        utils_log.print_and_log_banner(logger, verbose)
        utils_log.print_and_log_info(logger, "\t Summary:", verbose)
        utils_log.print_and_log_info(
            logger,
            "\n".join(
                f"* {name}: order {report['order']}, fit {report['fit']:.3f}"
                for name, report in self.result_dict.items()
            ),
            verbose,
        )
        return self.result_dict

    def validate(self, validation: IoBatch, verbose: bool = True) -> Dict[str, float]:
        """Fit of every identified model on validation data."""
        fits = {}
        for evaluator in self.methods:
            fits[evaluator.short_name] = evaluator.validate(validation)
            self.result_dict[evaluator.short_name]["validation_fit"] = fits[
                evaluator.short_name
            ]
            utils_log.print_and_log_info(
                logger,
                f"* {evaluator.short_name}: validation fit {fits[evaluator.short_name]:.3f}",
                verbose,
            )
        return fits

    @property
    def converged(self) -> bool:
        return all(report.get("converged", True) for report in self.result_dict.values())

    def _report(self, evaluator: IdentificationBase) -> Dict[str, Any]:
        fit_mode = self.config.identification.fit_mode
        report = {
            "method": evaluator.method_name.value,
            "order": evaluator.order,
            "eigenvalues": evaluator.model.eigenvalues(),
            "x0": evaluator.x0,
            "fit": evaluator.identification_fit(),
            "fit_mode": fit_mode,
            "samples": self.io.N,
            "inputs": self.io.m,
            "outputs": self.io.p,
            "data_digest": self.io.digest(),
        }
        solution = getattr(evaluator, "solution", None)
        if solution is not None:
            report.update(
                {
                    "lambda_over_N": evaluator.lambda_selected,
                    "s": self.config.identification.s,
                    "singular_values": solution.singular_values,
                    "objective": solution.objective,
                    "nuclear_norm": solution.nuclear_norm,
                    "prediction_error": solution.prediction_error,
                    "converged": solution.diagnostics.converged,
                    "iterations": solution.diagnostics.iterations,
                    "residuals": solution.diagnostics.residuals(),
                    "sweep": [
                        {
                            "lambda_over_N": point.lambda_over_N,
                            "order": point.order,
                            "fit": point.fit,
                            "converged": point.converged,
                            "failure": point.failure,
                        }
                        for point in evaluator.sweep
                    ],
                }
            )
        elif getattr(evaluator, "singular_values", None) is not None:
            report["singular_values"] = np.asarray(evaluator.singular_values)
            report["order_fits"] = evaluator.order_fits
        return report

    def save_to_file(self, output_dir: str) -> Dict[str, str]:
        """
        Writes <method>_model.json for every identified model and report.json with all reports.
        """
        os.makedirs(output_dir, exist_ok=True)
        paths = {}
        for evaluator in self.methods:
            path = os.path.join(output_dir, f"{evaluator.short_name}_model.json")
            utils_gen.save_model(evaluator.model, path)
            paths[evaluator.short_name] = path
            if self.config.debug.save_plots:
                evaluator.visualize(output_dir)
        paths["report"] = os.path.join(output_dir, "report.json")
        utils_gen.dump_json(self.result_dict, paths["report"])
        utils_log.print_and_log_info(logger, f"* results written to {output_dir}")
        return paths
