__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

import dataclasses
import inspect
from dataclasses import dataclass, field
from typing import Union, Any, Dict, List, Optional
import pathlib
import os
import logging

import numpy as np
from omegaconf import OmegaConf

from n2sid.data_structure.errors import ConfigurationError
from n2sid.data_structure.model import StateSpaceModel
from n2sid.data_structure.type import TypeFitMode, TypeLambdaSelection

logger = logging.getLogger(__name__)


def _dict_to_params(dict_params: Dict[str, Any], cls: Any) -> Any:
    """
    Converts dictionary to parameter class.

    :param dict_params: Dictionary containing parameters.
    :param cls: Parameter dataclass to which dictionary should be converted to.
    :return: Parameter class.
    """
    fields = dataclasses.fields(cls)
    cls_map = {f.name: f.type for f in fields}
    kwargs = {}
    for k, v in cls_map.items():
        if k not in dict_params:
            continue
        if inspect.isclass(v) and issubclass(v, BaseConfig):
            kwargs[k] = _dict_to_params(dict_params[k], cls_map[k])
        else:
            kwargs[k] = dict_params[k]
    return cls(**kwargs)


@dataclass
class BaseConfig:
    """Base N2SID parameters."""

    def __getitem__(self, item: str) -> Any:
        """
        Getter for base parameter value.

        :param: Item for which content should be returned.
        :return: Item value.
        """
        try:
            value = self.__getattribute__(item)
        except AttributeError as e:
            raise KeyError(
                f"{item} is not a parameter of {self.__class__.__name__}"
            ) from e
        return value

    def __setitem__(self, key: str, value: Any):
        """
        Setter for item.

        :param key: Name of item.
        :param value: Value of item.
        """
        if key not in {f.name for f in dataclasses.fields(self)}:
            raise KeyError(f"{key} is not a parameter of {self.__class__.__name__}")
        self.__setattr__(key, value)

    def to_dict(self) -> Dict[str, Any]:
        """Plain (json-serializable) dictionary of all parameters."""
        return dataclasses.asdict(self)

    @classmethod
    def load(
        cls,
        file_path: Union[pathlib.Path, str],
        run_name: Optional[str] = None,
    ) -> "N2SIDConfiguration":
        """
        Loads config file and creates parameter class.

        :param file_path: Path to yaml file containing config parameters.
        :param run_name: Name of the run, used for the output folder.
        :return: Base parameter class.
        """
        file_path = pathlib.Path(file_path)
        if file_path.suffix != ".yaml":
            raise ConfigurationError(
                f"File type {file_path.suffix} is unsupported! Please use .yaml!"
            )
        if not file_path.exists():
            raise ConfigurationError(f"Configuration file {file_path} does not exist")
        loaded_yaml = OmegaConf.load(file_path)
        try:
            merged = OmegaConf.merge(OmegaConf.structured(cls), loaded_yaml)
        except Exception as e:
            raise ConfigurationError(f"Invalid configuration {file_path}: {e}") from e
        params = _dict_to_params(OmegaConf.to_container(merged), cls)
        if run_name is None:
            run_name = file_path.stem
        params.general.set_run_name(run_name)
        return params


@dataclass
class GeneralConfiguration(BaseConfig):
    """General parameters for runs."""

    # paths are relative to the root directory
    path_root_abs = os.path.normpath(os.path.join(os.path.dirname(__file__), "../.."))
    path_output_abs: str = os.path.join(path_root_abs, "output")
    path_logs: str = os.path.join(path_root_abs, "output/logs")
    name_run: Optional[str] = None

    @property
    def path_output(self):
        return os.path.join(self.path_output_abs, self.name_run or "default")

    def set_run_name(self, run_name: str):
        """
        Setter for run name.
        :param run_name: Name of the identification run or study.
        """
        self.name_run = run_name


@dataclass
class IdentificationConfiguration(BaseConfig):
    """Parameters of the N2SID identification"""

    # number of block rows of the Hankel matrices
    s: int = 15
    # fixed model order; None selects the order with the log-mean rule
    order: Optional[int] = None
    order_cap: int = 10
    # singular values below rank_floor * sigma_1 count as numerical zeros
    rank_floor: float = 1e-5
    output_only: bool = False
    # fixed lambda/N; None sweeps the logarithmic grid
    lambda_value: Optional[float] = None
    lambda_lo: float = 10**-0.5
    lambda_hi: float = 1e4
    lambda_count: int = 20
    # data set on which lambda is selected: identification or validation
    lambda_selection: str = TypeLambdaSelection.IDENTIFICATION.value
    # prediction (one-step observer) or simulation (free run)
    fit_mode: str = TypeFitMode.PREDICTION.value
    # number of columns of the random right sketch; None disables sketching
    sketch_width: Optional[int] = 22
    sketch_seed: int = 0


@dataclass
class SolverConfiguration(BaseConfig):
    """Parameters of the operator-splitting solver"""

    max_iters: int = 5000
    primal_tol: float = 1e-6
    dual_tol: float = 1e-6
    abs_tol: float = 1e-9
    # ADMM penalty and its residual-balancing adaptation
    penalty: float = 1.0
    adaptive_penalty: bool = True
    penalty_ratio: float = 10.0
    penalty_scaling: float = 2.0
    adaptation_interval: int = 10
    # reuse the previous solution along a lambda sweep
    warm_start: bool = True


@dataclass
class OpenLoopConfiguration(BaseConfig):
    """Random open-loop systems and their data"""

    n: int = 2
    m: int = 1
    p: int = 1
    N: int = 50
    N_val: int = 50
    noise_std: float = 0.2
    x0_std: float = 5.0
    x0_std_val: float = 5.0
    # models whose largest eigenvalue modulus exceeds the cap are discarded
    stability_cap: float = 0.99
    radius_min: float = 0.1
    max_draws: int = 1000
    seed: int = 0


@dataclass
class ClosedLoopConfiguration(BaseConfig):
    """Plant in innovation form controlled by observer-based state feedback"""

    A: List[List[float]] = field(default_factory=lambda: [[0.0, 1.0], [0.0, 0.7]])
    B: List[List[float]] = field(default_factory=lambda: [[0.0], [1.0]])
    C: List[List[float]] = field(default_factory=lambda: [[1.0, 0.0]])
    D: List[List[float]] = field(default_factory=lambda: [[0.0]])
    K: List[List[float]] = field(default_factory=lambda: [[-0.3], [0.04]])
    # state feedback gain, places the closed-loop eigenvalues at 0.5
    L: List[List[float]] = field(default_factory=lambda: [[0.25, -0.3]])
    noise_std: float = 0.1
    N: int = 50
    N_val: int = 50
    x0_std: float = 0.0
    seed: int = 0

    def plant(self) -> StateSpaceModel:
        return StateSpaceModel(
            A=np.array(self.A, dtype=float),
            B=np.array(self.B, dtype=float),
            C=np.array(self.C, dtype=float),
            D=np.array(self.D, dtype=float),
            K=np.array(self.K, dtype=float),
        )

    def feedback(self) -> np.ndarray:
        return np.array(self.L, dtype=float)


@dataclass
class BaselineConfiguration(BaseConfig):
    """Parameters of the oblique projection subspace baseline"""

    # fixed order; None picks the best identification fit over 0..order_max
    order: Optional[int] = None
    order_max: int = 10
    # past horizon of the projection; None chooses the largest well-posed one <= s
    past_horizon: Optional[int] = None
    estimate_direct_term: bool = True
    # pseudo-linear iterations for the innovation gain
    k_iterations: int = 3


@dataclass
class BenchConfiguration(BaseConfig):
    """Monte-Carlo studies"""

    trials: int = 100
    master_seed: int = 0
    # None: number of cpus, capped by the N2SID_THREADS environment variable
    num_worker: Optional[int] = None
    save_svg: bool = True


@dataclass
class DebugConfiguration(BaseConfig):
    # figures of the identified models are written next to their files
    save_plots: bool = True


@dataclass
class N2SIDConfiguration(BaseConfig):
    """Class to hold identification-related configurations"""

    general: GeneralConfiguration = field(default_factory=GeneralConfiguration)
    identification: IdentificationConfiguration = field(
        default_factory=IdentificationConfiguration
    )
    solver: SolverConfiguration = field(default_factory=SolverConfiguration)
    open_loop: OpenLoopConfiguration = field(default_factory=OpenLoopConfiguration)
    closed_loop: ClosedLoopConfiguration = field(
        default_factory=ClosedLoopConfiguration
    )
    baseline: BaselineConfiguration = field(default_factory=BaselineConfiguration)
    bench: BenchConfiguration = field(default_factory=BenchConfiguration)
    debug: DebugConfiguration = field(default_factory=DebugConfiguration)

    def validate(self):
        """
        Checks the invariants of all parameters.

        :raises ConfigurationError: if a parameter is out of its domain
        """
        ident = self.identification
        solver = self.solver
        checks = [
            (ident.s >= 1, f"s must be >= 1, got {ident.s}"),
            (ident.order is None or ident.order >= 1, "order must be >= 1"),
            (ident.order_cap >= 1, "order_cap must be >= 1"),
            (ident.rank_floor > 0, "rank_floor must be positive"),
            (
                ident.lambda_value is None or ident.lambda_value >= 0,
                "lambda must be nonnegative",
            ),
            (ident.lambda_count >= 2, "lambda grid needs at least two points"),
            (
                0 < ident.lambda_lo < ident.lambda_hi,
                "lambda grid requires 0 < lo < hi",
            ),
            (
                ident.sketch_width is None or ident.sketch_width >= 1,
                "sketch width must be >= 1",
            ),
            (
                ident.lambda_selection in {t.value for t in TypeLambdaSelection},
                f"unknown lambda selection {ident.lambda_selection}",
            ),
            (
                ident.fit_mode in {t.value for t in TypeFitMode},
                f"unknown fit mode {ident.fit_mode}",
            ),
            (solver.max_iters >= 1, "max_iters must be >= 1"),
            (
                solver.primal_tol > 0 and solver.dual_tol > 0 and solver.abs_tol > 0,
                "tolerances must be positive",
            ),
            (solver.penalty > 0, "penalty must be positive"),
            (
                solver.penalty_ratio > 1 and solver.penalty_scaling > 1,
                "penalty adaptation factors must exceed one",
            ),
            (
                min(
                    self.open_loop.n,
                    self.open_loop.m,
                    self.open_loop.p,
                    self.open_loop.N,
                    self.open_loop.N_val,
                )
                >= 1,
                "open-loop dimensions must be positive",
            ),
            (
                self.open_loop.noise_std >= 0 and self.open_loop.x0_std >= 0,
                "standard deviations must be nonnegative",
            ),
            (
                0 < self.open_loop.radius_min <= self.open_loop.stability_cap < 1,
                "stability cap must satisfy 0 < radius_min <= cap < 1",
            ),
            (
                self.closed_loop.N >= 1 and self.closed_loop.noise_std >= 0,
                "invalid closed-loop horizon or noise",
            ),
            (
                self.baseline.order is None or self.baseline.order >= 0,
                "baseline order must be >= 0",
            ),
            (
                self.baseline.order is None or self.baseline.order < ident.s,
                "baseline order must be smaller than s",
            ),
            (self.bench.trials >= 1, "at least one trial is required"),
        ]
        for passed, message in checks:
            if not passed:
                logger.error(message)
                raise ConfigurationError(message)
        try:
            self.closed_loop.plant()
        except ValueError as e:
            raise ConfigurationError(f"invalid closed-loop plant: {e}") from e

    def print_configuration_summary(self):
        ident = self.identification
        if ident.lambda_value is None:
            lam = f"grid [{ident.lambda_lo:.4g}, {ident.lambda_hi:.4g}] x {ident.lambda_count}"
        else:
            lam = f"{ident.lambda_value:.4g}"
        string = "# ===== Configuration Summary ===== #\n"
        string += f"# Run: {self.general.name_run}\n"
        string += f"# s: {ident.s}, lambda/N: {lam}\n"
        string += f"# sketch width: {ident.sketch_width}, order: {ident.order or 'auto'}\n"
        string += "# ================================= #"

        print(string)
        for line in string.split("\n"):
            logger.info(line)
