__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

import os
from enum import Enum
from pathlib import Path
from typing import Dict, Sequence, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "n2sid"


class PlotColor(tuple, Enum):
    blue = (0, 101 / 255, 189 / 255)
    red = (227 / 255, 27 / 255, 35 / 255)
    green = (162 / 255, 173 / 255, 0)
    gray = (156 / 255, 157 / 255, 159 / 255)
    orange = (227 / 255, 114 / 255, 34 / 255)
    black = (0, 0, 0)


METHOD_COLORS = {"N2SID": PlotColor.blue, "N4SID": PlotColor.orange}


def save_fig(name: str, path_output: str, suffix: str = "svg") -> str:
    # save as svg
    Path(path_output).mkdir(parents=True, exist_ok=True)
    path = os.path.join(path_output, f"{name}.{suffix}")
    # fixed metadata keeps repeated runs byte-identical
    plt.savefig(
        path,
        format=suffix,
        bbox_inches="tight",
        transparent=False,
        metadata={"Date": None} if suffix == "svg" else None,
    )
    plt.close()
    return path


def plot_singular_values(
    singular_values: Sequence[float],
    order: Optional[int],
    name: str,
    path_output: str,
) -> str:
    sv = np.asarray(singular_values, dtype=float)
    plt.figure(figsize=(5, 3.5))
    index = np.arange(1, sv.size + 1)
    plt.semilogy(index, np.maximum(sv, 1e-300), "o-", color=PlotColor.blue)
    if order:
        plt.axvline(order, color=PlotColor.red, linestyle="--", label=f"order {order}")
        plt.legend()
    plt.xlabel("index")
    plt.ylabel("singular value")
    return save_fig(name, path_output)


def plot_fit_scatter(
    n2sid_fits: Sequence[float],
    n4sid_fits: Sequence[float],
    name: str,
    path_output: str,
    lower: float = 0.0,
) -> str:
    """Fit of both methods per trial with the diagonal. Trials with a fit below lower are left out of the plot."""
    x = np.asarray(n4sid_fits, dtype=float)
    y = np.asarray(n2sid_fits, dtype=float)
    shown = np.isfinite(x) & np.isfinite(y) & (x >= lower) & (y >= lower)
    plt.figure(figsize=(4.5, 4.5))
    plt.scatter(x[shown], y[shown], s=12, color=PlotColor.blue)
    plt.plot([lower, 100], [lower, 100], color=PlotColor.black, linewidth=0.8)
    plt.xlim(lower, 100)
    plt.ylim(lower, 100)
    plt.xlabel("fit N4SID")
    plt.ylabel("fit N2SID")
    if np.any(~shown):
        plt.title(f"{int(np.sum(~shown))} trial(s) not shown")
    return save_fig(name, path_output)


def plot_eigenvalue_cloud(
    eigenvalues: Sequence[complex],
    true_eigenvalues: Sequence[complex],
    name: str,
    path_output: str,
    color: PlotColor = PlotColor.blue,
) -> str:
    eigs = np.asarray(eigenvalues, dtype=complex)
    true = np.asarray(true_eigenvalues, dtype=complex)
    plt.figure(figsize=(4.5, 4.5))
    circle = np.exp(1j * np.linspace(0, 2 * np.pi, 400))
    plt.plot(circle.real, circle.imag, color=PlotColor.gray, linewidth=0.8)
    plt.scatter(eigs.real, eigs.imag, s=8, color=color)
    plt.scatter(true.real, true.imag, s=60, marker="x", color=PlotColor.red)
    plt.gca().set_aspect("equal")
    plt.xlabel("real")
    plt.ylabel("imaginary")
    return save_fig(name, path_output)


def plot_lambda_sweep(
    lambdas: Sequence[float],
    fits: Dict[str, Sequence[float]],
    name: str,
    path_output: str,
) -> str:
    plt.figure(figsize=(5, 3.5))
    for label, values in fits.items():
        plt.semilogx(lambdas, values, "o-", label=label)
    plt.xlabel("lambda / N")
    plt.ylabel("fit")
    plt.legend()
    return save_fig(name, path_output)
