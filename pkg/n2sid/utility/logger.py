__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

import logging
import os
from datetime import datetime

from n2sid.data_structure.configuration import N2SIDConfiguration

LOG_FORMAT = "%(levelname)-8s [%(asctime)s] --- %(message)s (%(filename)s:%(lineno)s)"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
BANNER = "*********************************"


def initialize_logger(config: N2SIDConfiguration) -> logging.Logger:
    """
    Attaches a DEBUG file handler to the root logger, writing to ``<path_logs>/N2SID[_<run>]_<timestamp>.log``.
    Calling it again, e.g. once per test or per worker process, replaces the handler of the previous call.
    """
    os.makedirs(config.general.path_logs, exist_ok=True)
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "n2sid_run", None) is not None:
            root.removeHandler(handler)
            handler.close()

    run = config.general.name_run
    stamp = datetime.now().strftime("%Y_%m_%d_%H-%M-%S")
    file_name = f"N2SID_{run}_{stamp}.log" if run else f"N2SID_{stamp}.log"
    file_handler = logging.FileHandler(os.path.join(config.general.path_logs, file_name))
    file_handler.n2sid_run = run or ""
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(LOG_FORMAT, DATE_FORMAT))

    root.setLevel(logging.DEBUG)
    root.addHandler(file_handler)
    return root


def print_and_log_banner(logger: logging.Logger, verbose: bool = False):
    print_and_log_info(logger, BANNER, verbose)


def print_and_log_debug(logger: logging.Logger, message: str, verbose: bool = False):
    if verbose:
        print(message)
    logger.debug(message)


def print_and_log_info(logger: logging.Logger, message: str, verbose: bool = False):
    if verbose:
        print(message)
    logger.info(message)


def print_and_log_warning(logger: logging.Logger, message: str, verbose: bool = True):
    if verbose:
        print(message)
    logger.warning(message)


def print_and_log_error(logger: logging.Logger, message: str, verbose: bool = True):
    if verbose:
        print(message)
    logger.error(message)
