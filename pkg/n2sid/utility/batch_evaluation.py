__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

from multiprocessing import Pool

import copy
import csv
import hashlib
import logging
import math
import os
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from scipy.optimize import linear_sum_assignment
from tqdm import tqdm

from n2sid.data_structure.base import IdentificationBase
from n2sid.data_structure.configuration import N2SIDConfiguration
from n2sid.data_structure.errors import ConfigurationError
from n2sid.data_structure.model import IoBatch
from n2sid.data_structure.report import TrialResult, BenchReport
from n2sid.data_structure.type import TypeStudy
from n2sid.identification.n2sid import N2SID
from n2sid.identification.n4sid import N4SID
import n2sid.utility.general as utils_gen
import n2sid.utility.logger as utils_log
import n2sid.utility.simulation as utils_sim
import n2sid.utility.visualization as utils_vis

logger = logging.getLogger(__name__)

ENV_THREADS = "N2SID_THREADS"
CLOSED_LOOP_ORDER = 2


def eigenvalue_dispersion(
    estimated: Sequence[complex], true: Sequence[complex]
) -> float:
    """
    Mean distance between estimated and true eigenvalues after an optimal one-to-one matching. With different
    counts only min(len(estimated), len(true)) pairs are matched.
    """
    estimated = np.asarray(estimated, dtype=complex)
    true = np.asarray(true, dtype=complex)
    if estimated.size == 0 or true.size == 0:
        return math.nan
    cost = np.abs(estimated[:, None] - true[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].mean())


def study_configuration(
    config: N2SIDConfiguration, study: Union[TypeStudy, str]
) -> N2SIDConfiguration:
    """Copy of config as used by the trials of a study; closed-loop studies fix the order of both methods."""
    study = TypeStudy(study)
    config = copy.deepcopy(config)
    if study == TypeStudy.CLOSED_LOOP:
        config.identification.order = CLOSED_LOOP_ORDER
        config.baseline.order = CLOSED_LOOP_ORDER
    return config


def resolve_num_worker(config: N2SIDConfiguration, trials: int) -> int:
    num_worker = config.bench.num_worker or os.cpu_count() or 1
    cap = os.environ.get(ENV_THREADS)
    if cap:
        try:
            num_worker = min(num_worker, int(cap))
        except ValueError:
            raise ConfigurationError(f"{ENV_THREADS} must be an integer, got {cap!r}")
    return max(1, min(num_worker, trials))


def _consumed_digest(method: IdentificationBase, validation: IoBatch) -> str:
    h = hashlib.sha256()
    h.update(method.io.digest().encode())
    h.update(validation.digest().encode())
    return h.hexdigest()


def _evaluate(
    method: IdentificationBase, identification: IoBatch, validation: IoBatch
) -> IdentificationBase:
    method.identify(identification, validation, verbose=False)
    return method


def run_trial(
    config: N2SIDConfiguration,
    study: Union[TypeStudy, str],
    trial: int,
    verbose: bool = False,
) -> TrialResult:
    """
    One Monte-Carlo trial: data generation, both identifications and their validation fits. Every exception is
    recorded in the result instead of being raised.

    :param config: configuration as returned by study_configuration
    :param study: open or closed loop
    :param trial: trial index, together with bench.master_seed it determines all random draws
    """
    study = TypeStudy(study)
    master_seed = config.bench.master_seed
    result = TrialResult(trial=trial, master_seed=master_seed)
    seed = utils_gen.trial_seed(master_seed, trial)
    try:
        if study == TypeStudy.OPEN_LOOP:
            model, identification, validation = utils_sim.generate_open_loop_trial(
                config.open_loop, seed
            )
        else:
            model, identification, validation = utils_sim.generate_closed_loop_trial(
                config.closed_loop, seed
            )
        result.true_eigs = model.eigenvalues().tolist()
        result.identification_digest = identification.digest()
        result.validation_digest = validation.digest()

        time_start = time.perf_counter()
        method_n2sid = _evaluate(N2SID(config), identification, validation)
        result.timings["n2sid"] = time.perf_counter() - time_start
        result.timings.update({f"n2sid_{k}": v for k, v in method_n2sid.timings.items()})
        result.n2sid_input_digest = _consumed_digest(method_n2sid, validation)
        result.n2sid_order = method_n2sid.order
        result.n2sid_eigs = method_n2sid.model.eigenvalues().tolist()
        result.lambda_selected = method_n2sid.lambda_selected
        result.n2sid_converged = all(point.converged for point in method_n2sid.sweep)
        result.n2sid_identification_fit = method_n2sid.identification_fit()
        result.n2sid_fit = method_n2sid.validate(validation)

        time_start = time.perf_counter()
        method_n4sid = _evaluate(N4SID(config), identification, validation)
        result.timings["n4sid"] = time.perf_counter() - time_start
        result.n4sid_input_digest = _consumed_digest(method_n4sid, validation)
        result.n4sid_order = method_n4sid.order
        result.n4sid_eigs = method_n4sid.model.eigenvalues().tolist()
        result.n4sid_identification_fit = method_n4sid.identification_fit()
        result.n4sid_fit = method_n4sid.validate(validation)

        result.n2sid_dispersion = eigenvalue_dispersion(result.n2sid_eigs, result.true_eigs)
        result.n4sid_dispersion = eigenvalue_dispersion(result.n4sid_eigs, result.true_eigs)
    except Exception as err:
        result.failure = f"{type(err).__name__}: {err}"
        utils_log.print_and_log_error(
            logger, f"Trial {trial} of the {study.value} study failed, see {err}", verbose
        )
    if result.negative_fit:
        utils_log.print_and_log_warning(
            logger, f"Trial {trial}: negative fit retained in the report", verbose
        )
    return result


def run_parallel(
    config: N2SIDConfiguration,
    study: TypeStudy,
    trials: int,
    num_worker: int,
    verbose: bool = False,
) -> List[TrialResult]:
    """
    Parallel evaluation of the trials in a process pool. Results are collected by trial index, so the outcome does
    not depend on the completion order.
    """
    results: Dict[int, TrialResult] = {}
    pool = Pool(num_worker)
    pbar = tqdm(desc="Trials Finished: ", total=trials, colour="green")

    def update(result: TrialResult):
        results[result.trial] = result
        pbar.update()

    for trial in range(trials):
        pool.apply_async(
            run_trial,
            args=(config, study, trial, verbose),
            callback=update,
        )
    pool.close()
    pool.join()
    pbar.close()
    utils_log.print_and_log_info(logger, "All Processes Done.", verbose)
    return [results[trial] for trial in sorted(results)]


def run_sequential(
    config: N2SIDConfiguration,
    study: TypeStudy,
    trials: int,
    verbose: bool = False,
) -> List[TrialResult]:
    """Sequential evaluation of the trials, convenient for debugging."""
    return [
        run_trial(config, study, trial, verbose)
        for trial in tqdm(range(trials), desc="Trials Finished: ", colour="red")
    ]


def _config_snapshot(config: N2SIDConfiguration) -> Dict:
    # machine-dependent paths and debug switches stay out of the report
    snapshot = config.to_dict()
    for section in ("general", "debug"):
        snapshot.pop(section, None)
    snapshot["bench"].pop("num_worker", None)
    return snapshot


def run_study(
    config: N2SIDConfiguration,
    study: Union[TypeStudy, str],
    trials: Optional[int] = None,
    verbose: bool = False,
) -> BenchReport:
    """
    Monte-Carlo comparison of N2SID and N4SID on independently seeded trials.

    :param trials: number of trials, defaults to bench.trials
    :raises ConfigurationError: invalid configuration or trials < 1
    """
    study = TypeStudy(study)
    trials = config.bench.trials if trials is None else trials
    if trials < 1:
        raise ConfigurationError(f"at least one trial is required, got {trials}")
    config = study_configuration(config, study)
    config.bench.trials = trials
    config.validate()
    num_worker = resolve_num_worker(config, trials)
    utils_log.print_and_log_info(
        logger,
        f"* {study.value} study: {trials} trial(s), master seed {config.bench.master_seed}, "
        f"{num_worker} worker(s)",
        verbose,
    )
    if num_worker > 1:
        results = run_parallel(config, study, trials, num_worker, verbose)
    else:
        results = run_sequential(config, study, trials, verbose)
    report = BenchReport(
        study=study.value,
        master_seed=config.bench.master_seed,
        trials=results,
        config=_config_snapshot(config),
        fit_mode=config.identification.fit_mode,
        lambda_selection=config.identification.lambda_selection,
    )
    summary = report.summary()
    utils_log.print_and_log_info(
        logger,
        f"* mean fit N2SID {summary['n2sid_mean_fit']:.2f}, N4SID {summary['n4sid_mean_fit']:.2f}, "
        f"win rate {summary['win_rate']:.2f}, failed {summary['failed']}",
        verbose,
    )
    return report


def run_open_loop_study(
    config: N2SIDConfiguration, trials: Optional[int] = None, verbose: bool = False
) -> BenchReport:
    return run_study(config, TypeStudy.OPEN_LOOP, trials, verbose)


def run_closed_loop_study(
    config: N2SIDConfiguration, trials: Optional[int] = None, verbose: bool = False
) -> BenchReport:
    return run_study(config, TypeStudy.CLOSED_LOOP, trials, verbose)


def _write_rows(path: str, header: List[str], rows: List[list]):
    with open(path, "w", newline="") as csv_file:
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def save_study(
    report: BenchReport, path_output: str, save_svg: bool = True
) -> Dict[str, str]:
    """
    Writes report.json, scatter.csv, eigenvalues.csv, timings.csv and, optionally, the SVG figures.

    :return: written file paths by name
    """
    Path(path_output).mkdir(parents=True, exist_ok=True)
    paths = {
        "report": os.path.join(path_output, "report.json"),
        "scatter": os.path.join(path_output, "scatter.csv"),
        "eigenvalues": os.path.join(path_output, "eigenvalues.csv"),
        "timings": os.path.join(path_output, "timings.csv"),
    }
    with open(paths["report"], "w") as f:
        f.write(report.to_json())

    _write_rows(
        paths["scatter"],
        ["trial", "n2sid_fit", "n4sid_fit", "n2sid_order", "n4sid_order", "negative_fit", "failure"],
        [
            [
                t.trial,
                repr(t.n2sid_fit),
                repr(t.n4sid_fit),
                t.n2sid_order,
                t.n4sid_order,
                int(t.negative_fit),
                t.failure or "",
            ]
            for t in report.trials
        ],
    )
    rows = []
    for t in report.trials:
        for method, eigs in (("true", t.true_eigs), ("N2SID", t.n2sid_eigs), ("N4SID", t.n4sid_eigs)):
            rows.extend([t.trial, method, repr(complex(e).real), repr(complex(e).imag)] for e in eigs)
    _write_rows(paths["eigenvalues"], ["trial", "method", "real", "imag"], rows)

    stages = sorted({stage for t in report.trials for stage in t.timings})
    _write_rows(
        paths["timings"],
        ["trial"] + stages,
        [[t.trial] + [t.timings.get(stage, math.nan) for stage in stages] for t in report.trials],
    )

    if save_svg:
        # negative fits are kept in the data and only left out of the plot
        paths["fit_scatter"] = utils_vis.plot_fit_scatter(
            [t.n2sid_fit for t in report.trials],
            [t.n4sid_fit for t in report.trials],
            "fit_scatter",
            path_output,
        )
        true = sorted({complex(e) for t in report.trials for e in t.true_eigs}, key=lambda z: (z.real, z.imag))
        for method in ("N2SID", "N4SID"):
            eigs = [e for t in report.trials for e in getattr(t, f"{method.lower()}_eigs")]
            paths[f"{method}_eigenvalues"] = utils_vis.plot_eigenvalue_cloud(
                eigs,
                true if report.study == TypeStudy.CLOSED_LOOP.value else [],
                f"{method}_eigenvalues",
                path_output,
                utils_vis.METHOD_COLORS[method],
            )
    utils_log.print_and_log_info(logger, f"* study written to {path_output}")
    return paths
