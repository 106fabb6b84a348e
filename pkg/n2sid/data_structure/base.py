__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

import time
import logging
from enum import Enum
from abc import abstractmethod
from typing import Dict, Optional, Union

import numpy as np

from n2sid.data_structure.configuration import N2SIDConfiguration
from n2sid.data_structure.errors import ConfigurationError
from n2sid.data_structure.model import StateSpaceModel, IoBatch
from n2sid.data_structure.type import TypeIdentification, TypeFitMode
import n2sid.utility.extraction as utils_ext
import n2sid.utility.logger as utils_log

logger = logging.getLogger(__name__)


class IdentificationBase:
    """Base class for subspace identification methods"""

    method_name: Enum = TypeIdentification.NONE

    def __init__(self, config: N2SIDConfiguration):
        """
        :param config: predefined configuration
        """
        if not isinstance(config, N2SIDConfiguration):
            message = "Provided configuration is not valid"
            utils_log.print_and_log_error(logger, message)
            raise ConfigurationError(message)
        # ==========  configuration  =========
        self.configuration = config
        # ==========     results     =========
        self.model: Optional[StateSpaceModel] = None
        self.x0: Optional[np.ndarray] = None
        self.order: Optional[int] = None
        self.io: Optional[IoBatch] = None
        self.timings: Dict[str, float] = {}

    def __repr__(self):
        return f"{self.method_name}"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, IdentificationBase):
            return self.method_name == other.method_name
        else:
            return False

    def __key(self):
        return self.method_name

    def __hash__(self):
        return hash(self.__key())

    @property
    def short_name(self) -> str:
        return self.method_name.name

    @abstractmethod
    def compute(self, io: IoBatch, validation: Optional[IoBatch], verbose: bool):
        """
        Specific identification routine of each method, sets model, x0 and order
        """
        pass

    def identify(
        self,
        io: IoBatch,
        validation: Optional[IoBatch] = None,
        verbose: bool = True,
    ) -> StateSpaceModel:
        """
        Wrapper for identifying a model from the given data.

        :param io: identification data
        :param validation: validation data, only used by methods that select parameters on it
        """
        utils_log.print_and_log_banner(logger, verbose)
        utils_log.print_and_log_info(
            logger,
            f"* Identifying with {self.method_name.value} on {io.N} samples "
            f"(m={io.m}, p={io.p})",
            verbose,
        )
        self.io = io
        time_start = time.perf_counter()
        self.compute(io, validation, verbose)
        self.timings["total"] = time.perf_counter() - time_start
        utils_log.print_and_log_info(
            logger,
            f"*\t\t order {self.order}, eigenvalues {np.round(self.model.eigenvalues(), 4).tolist()}",
            verbose,
        )
        utils_log.print_and_log_info(
            logger, f"\tTook: \t{self.timings['total']:.3f}s", verbose
        )
        return self.model

    def output(
        self,
        io: IoBatch,
        fit_mode: Union[TypeFitMode, str, None] = None,
        reestimate_state: bool = True,
    ) -> np.ndarray:
        """Model output on io, with the initial state estimated on io or taken from the identification."""
        if self.model is None:
            raise ConfigurationError(f"{self.method_name.value}: no model identified yet")
        fit_mode = self.configuration.identification.fit_mode if fit_mode is None else fit_mode
        x0 = None if reestimate_state else self.x0
        if self.model.m == 0 and io.m > 0:
            io = IoBatch(u=np.zeros((io.N, 0)), y=io.y)
        return utils_ext.model_output(self.model, io, fit_mode, x0)

    def validate(
        self, io: IoBatch, fit_mode: Union[TypeFitMode, str, None] = None
    ) -> float:
        """Fit on (validation) data with the initial state re-estimated on that data."""
        return utils_ext.fit(io.y, self.output(io, fit_mode))

    def identification_fit(self, fit_mode: Union[TypeFitMode, str, None] = None) -> float:
        """Fit on the identification data; the identified initial state is the one of the predictor."""
        fit_mode = TypeFitMode(
            self.configuration.identification.fit_mode if fit_mode is None else fit_mode
        )
        return utils_ext.fit(
            self.io.y,
            self.output(
                self.io,
                fit_mode,
                reestimate_state=fit_mode == TypeFitMode.SIMULATION,
            ),
        )

    @abstractmethod
    def visualize(self, path_output: Optional[str] = None):
        """
        Visualize the result, which will be method-dependent. Figures go to path_output, by default the output
        folder of the run.
        """
        pass
