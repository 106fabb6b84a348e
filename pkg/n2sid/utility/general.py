__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

import csv
import json
import logging
import math
import os
import re
from typing import Union, List, Any, Dict

import numpy as np

from n2sid.data_structure.errors import DataFormatError
from n2sid.data_structure.model import IoBatch, StateSpaceModel
import n2sid.utility.logger as utils_log

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence, None]

_COLUMN = re.compile(r"^([uy])([1-9][0-9]*)$")


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Generator from an integer seed, a seed sequence, or an existing generator (returned unchanged)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def trial_seed(master_seed: int, trial: int) -> np.random.SeedSequence:
    """
    Child seed sequence of one trial. It only depends on (master_seed, trial), so trials can be evaluated in any order
    or in parallel.
    """
    return np.random.SeedSequence(master_seed, spawn_key=(trial,))


def read_io_csv(path: Union[str, os.PathLike]) -> IoBatch:
    """
    Reads an input/output batch from a CSV file with header ``u1,...,um,y1,...,yp`` and one sample per line.

    :param path: path to the CSV file
    :return: batch, output-only when the header has no ``u`` columns
    :raises DataFormatError: for malformed headers or values, carrying the offending line number
    """
    if not os.path.isfile(path):
        raise DataFormatError(f"data file {path} does not exist")
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError("empty data file", 1)
        header = [column.strip() for column in header]
        m, p = _parse_header(header)
        rows = []
        for row in reader:
            line_number = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != m + p:
                raise DataFormatError(
                    f"expected {m + p} values, found {len(row)}", line_number
                )
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise DataFormatError(f"non-numeric value in {row}", line_number)
            if not all(math.isfinite(value) for value in values):
                raise DataFormatError("non-finite value", line_number)
            rows.append(values)
    if not rows:
        raise DataFormatError("no samples after the header", 2)
    data = np.array(rows, dtype=float).reshape(len(rows), m + p)
    utils_log.print_and_log_debug(
        logger, f"* read {len(rows)} samples (m={m}, p={p}) from {path}"
    )
    return IoBatch(u=data[:, :m], y=data[:, m:])


def _parse_header(header: List[str]):
    kinds = []
    for column in header:
        match = _COLUMN.match(column)
        if match is None:
            raise DataFormatError(f"invalid column name '{column}'", 1)
        kinds.append((match.group(1), int(match.group(2))))
    m = sum(1 for kind, _ in kinds if kind == "u")
    p = len(kinds) - m
    expected = [("u", i + 1) for i in range(m)] + [("y", i + 1) for i in range(p)]
    if kinds != expected or p == 0:
        raise DataFormatError(
            "header must read u1,...,um,y1,...,yp with at least one output", 1
        )
    return m, p


def write_io_csv(batch: IoBatch, path: Union[str, os.PathLike]):
    """Writes a batch with 17 significant digits, so that reading it back is value-exact."""
    directory = os.path.dirname(os.fspath(path))
    if directory:
        os.makedirs(directory, exist_ok=True)
    np.savetxt(
        path,
        batch.stacked(),
        fmt="%.17g",
        delimiter=",",
        header=",".join(batch.header()),
        comments="",
    )


def to_jsonable(value: Any) -> Any:
    """Plain python structure of nested containers, numpy values and complex numbers; NaN becomes None."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [to_jsonable(float(value.real)), to_jsonable(float(value.imag))]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dump_json(data: Dict[str, Any], path: Union[str, os.PathLike]):
    directory = os.path.dirname(os.fspath(path))
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as f:
        json.dump(to_jsonable(data), f, indent=2, sort_keys=True)
        f.write("\n")


def save_model(model: StateSpaceModel, path: Union[str, os.PathLike]):
    dump_json(model.to_dict(), path)


def load_model(path: Union[str, os.PathLike]) -> StateSpaceModel:
    if not os.path.isfile(path):
        raise DataFormatError(f"model file {path} does not exist")
    try:
        with open(path) as f:
            data = json.load(f)
        return StateSpaceModel.from_dict(data)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise DataFormatError(f"invalid model file {path}: {e}") from e
