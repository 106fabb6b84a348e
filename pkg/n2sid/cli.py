__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

"""
Command-line front end: ``n2sid identify``, ``n2sid generate`` and ``n2sid bench``.

Exit codes: 0 success, 2 usage or data error, 3 numerical failure.
"""

import argparse
import logging
import os
from typing import List, Optional, Union

from n2sid.data_structure.configuration import N2SIDConfiguration
from n2sid.data_structure.errors import N2SIDError, NumericalError
from n2sid.data_structure.n2sid_interface import N2SIDInterface
from n2sid.data_structure.type import TypeStudy, TypeFitMode, TypeLambdaSelection
from n2sid.identification.n2sid import N2SID
from n2sid.identification.n4sid import N4SID
import n2sid.utility.batch_evaluation as utils_batch
import n2sid.utility.general as utils_gen
import n2sid.utility.logger as utils_log
import n2sid.utility.simulation as utils_sim

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

SKETCH_OFF = "off"


def _lambda_grid(text: str):
    try:
        lo, hi, count = text.split(":")
        return float(lo), float(hi), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:count, got {text!r}")


def _order(text: str) -> Union[str, int]:
    if text == "auto":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected auto or an integer, got {text!r}")


def _sketch(text: str) -> Union[str, int]:
    if text == SKETCH_OFF:
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected off or an integer, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="yaml file overriding the default configuration")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("-v", "--verbose", action="store_true")

    method = argparse.ArgumentParser(add_help=False)
    method.add_argument("--s", type=int, help="number of block rows")
    method.add_argument("--lambda", dest="lambda_value", type=float, help="fixed lambda/N")
    method.add_argument("--lambda-grid", type=_lambda_grid, help="lambda/N grid lo:hi:count")
    method.add_argument("--order", type=_order, help="auto or a fixed model order")
    method.add_argument("--sketch", type=_sketch, help="sketch width or off")
    method.add_argument("--output-only", action="store_true", help="identify without inputs")
    method.add_argument("--tol", type=float, help="relative solver tolerance")
    method.add_argument("--max-iters", type=int, help="solver iteration limit")
    method.add_argument("--fit-mode", choices=[t.value for t in TypeFitMode])
    method.add_argument(
        "--lambda-selection", choices=[t.value for t in TypeLambdaSelection]
    )

    parser = argparse.ArgumentParser(
        prog="n2sid", description="Nuclear norm subspace identification"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    identify = subparsers.add_parser(
        "identify", parents=[common, method], help="identify a model from a CSV file"
    )
    identify.add_argument("data", help="CSV with header u1,...,um,y1,...,yp")
    identify.add_argument("--out", help="output directory")
    identify.add_argument("--validation", help="CSV with validation data")
    identify.add_argument(
        "--baseline", action="store_true", help="also identify with the projection baseline"
    )

    generate = subparsers.add_parser(
        "generate", parents=[common], help="generate identification and validation data"
    )
    generate.add_argument("study", choices=[t.value for t in TypeStudy])
    generate.add_argument("--out", required=True, help="CSV file of the identification data")
    generate.add_argument("--N", type=int, help="number of samples")
    generate.add_argument("--noise-std", type=float, help="innovation standard deviation")

    bench = subparsers.add_parser(
        "bench", parents=[common, method], help="run a Monte-Carlo study"
    )
    bench.add_argument("study", choices=[t.value for t in TypeStudy])
    bench.add_argument("--out", help="output directory")
    bench.add_argument("--trials", type=int)
    bench.add_argument("--workers", type=int, help="size of the worker pool")
    bench.add_argument("--no-svg", action="store_true")
    return parser


def load_configuration(args: argparse.Namespace, run_name: str) -> N2SIDConfiguration:
    """Default or yaml configuration with the command-line flags applied on top, validated."""
    if args.config:
        config = N2SIDConfiguration.load(args.config, run_name)
    else:
        config = N2SIDConfiguration()
        config.general.set_run_name(run_name)
    ident, solver = config.identification, config.solver
    flags = vars(args)
    if flags.get("s") is not None:
        ident.s = args.s
    if flags.get("lambda_value") is not None:
        ident.lambda_value = args.lambda_value
    if flags.get("lambda_grid") is not None:
        ident.lambda_lo, ident.lambda_hi, ident.lambda_count = args.lambda_grid
        ident.lambda_value = None
    if flags.get("order") is not None:
        ident.order = None if args.order == "auto" else args.order
        config.baseline.order = ident.order
    if flags.get("sketch") is not None:
        ident.sketch_width = None if args.sketch == SKETCH_OFF else args.sketch
    if flags.get("output_only"):
        ident.output_only = True
    if flags.get("tol") is not None:
        solver.primal_tol = solver.dual_tol = args.tol
    if flags.get("max_iters") is not None:
        solver.max_iters = args.max_iters
    if flags.get("fit_mode") is not None:
        ident.fit_mode = args.fit_mode
    if flags.get("lambda_selection") is not None:
        ident.lambda_selection = args.lambda_selection
    if args.seed is not None:
        ident.sketch_seed = args.seed
        config.bench.master_seed = args.seed
        config.open_loop.seed = args.seed
        config.closed_loop.seed = args.seed
    config.validate()
    return config


def cmd_identify(args: argparse.Namespace) -> int:
    config = load_configuration(args, os.path.splitext(os.path.basename(args.data))[0])
    utils_log.initialize_logger(config)
    io = utils_gen.read_io_csv(args.data)
    validation = utils_gen.read_io_csv(args.validation) if args.validation else None
    if args.verbose:
        config.print_configuration_summary()

    interface = N2SIDInterface(config)
    methods = [N2SID, N4SID] if args.baseline else [N2SID]
    interface.identify(io, methods, validation, verbose=args.verbose)
    if validation is not None:
        interface.validate(validation, verbose=args.verbose)
    paths = interface.save_to_file(args.out or config.general.path_output)
    report = interface.result_dict[N2SID.method_name.name]
    print(
        f"order {report['order']}, fit {report['fit']:.3f}, "
        f"lambda/N {report['lambda_over_N']:.4g}, model {paths[N2SID.method_name.name]}"
    )
    if not interface.converged:
        utils_log.print_and_log_error(
            logger,
            f"solver did not converge within {config.solver.max_iters} iterations, "
            f"residuals {report['residuals']}",
        )
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    config = load_configuration(args, os.path.splitext(os.path.basename(args.out))[0])
    utils_log.initialize_logger(config)
    study = TypeStudy(args.study)
    section = config.open_loop if study == TypeStudy.OPEN_LOOP else config.closed_loop
    if args.N is not None:
        section.N = section.N_val = args.N
    if args.noise_std is not None:
        section.noise_std = args.noise_std
    config.validate()
    if study == TypeStudy.OPEN_LOOP:
        model, identification, validation = utils_sim.generate_open_loop_trial(section)
    else:
        model, identification, validation = utils_sim.generate_closed_loop_trial(section)
    stem = os.path.splitext(args.out)[0]
    utils_gen.write_io_csv(identification, args.out)
    utils_gen.write_io_csv(validation, f"{stem}_validation.csv")
    utils_gen.save_model(model, f"{stem}_model.json")
    print(f"{identification.N} samples written to {args.out}")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    config = load_configuration(args, f"{args.study}_study")
    if args.workers is not None:
        config.bench.num_worker = args.workers
    if args.no_svg:
        config.bench.save_svg = False
    utils_log.initialize_logger(config)
    report = utils_batch.run_study(config, args.study, args.trials, verbose=args.verbose)
    utils_batch.save_study(
        report, args.out or config.general.path_output, config.bench.save_svg
    )
    summary = report.summary()
    print(
        f"{summary['succeeded']}/{summary['trials']} trials, mean fit N2SID "
        f"{summary['n2sid_mean_fit']:.2f} vs N4SID {summary['n4sid_mean_fit']:.2f}, "
        f"win rate {summary['win_rate']:.2f}, report {report.digest()[:12]}"
    )
    return EXIT_OK


COMMANDS = {"identify": cmd_identify, "generate": cmd_generate, "bench": cmd_bench}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except NumericalError as e:
        utils_log.print_and_log_error(logger, f"numerical failure: {e}")
        return EXIT_NUMERICAL
    except (N2SIDError, ValueError, OSError) as e:
        utils_log.print_and_log_error(logger, f"error: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
