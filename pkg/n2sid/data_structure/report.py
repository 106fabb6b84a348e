__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

import hashlib
import json
import math
from dataclasses import dataclass, field, asdict
from typing import List, Dict, Any, Optional

import numpy as np

from n2sid.utility.general import to_jsonable

REPORT_SCHEMA_VERSION = 1


@dataclass
class TrialResult:
    """Outcome of one Monte-Carlo trial; fields of a failed trial stay NaN/None and failure holds the reason."""

    trial: int
    # the trial seed is the seed sequence (master_seed, spawn_key=(trial,))
    master_seed: int
    n2sid_fit: float = math.nan
    n4sid_fit: float = math.nan
    n2sid_order: Optional[int] = None
    n4sid_order: Optional[int] = None
    n2sid_eigs: List[complex] = field(default_factory=list)
    n4sid_eigs: List[complex] = field(default_factory=list)
    true_eigs: List[complex] = field(default_factory=list)
    lambda_selected: float = math.nan
    n2sid_converged: bool = True
    n2sid_identification_fit: float = math.nan
    n4sid_identification_fit: float = math.nan
    # mean distance of matched eigenvalues to the true ones
    n2sid_dispersion: float = math.nan
    n4sid_dispersion: float = math.nan
    identification_digest: str = ""
    validation_digest: str = ""
    # digests of the data each method actually consumed
    n2sid_input_digest: str = ""
    n4sid_input_digest: str = ""
    failure: Optional[str] = None
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def succeeded(self) -> bool:
        return (
            self.failure is None
            and math.isfinite(self.n2sid_fit)
            and math.isfinite(self.n4sid_fit)
        )

    @property
    def negative_fit(self) -> bool:
        return self.n2sid_fit < 0 or self.n4sid_fit < 0

    @property
    def fair(self) -> bool:
        return self.n2sid_input_digest == self.n4sid_input_digest != ""

    def to_dict(self, include_timings: bool = False) -> Dict[str, Any]:
        data = asdict(self)
        if not include_timings:
            data.pop("timings")
        data["negative_fit"] = bool(self.negative_fit)
        data["fair"] = bool(self.fair)
        return data


@dataclass
class BenchReport:
    study: str
    master_seed: int
    trials: List[TrialResult]
    config: Dict[str, Any] = field(default_factory=dict)
    fit_mode: str = "prediction"
    lambda_selection: str = "identification"

    def summary(self) -> Dict[str, Any]:
        succeeded = [t for t in self.trials if t.succeeded]
        total = len(succeeded)
        wins = sum(1 for t in succeeded if t.n2sid_fit > t.n4sid_fit)
        losses = sum(1 for t in succeeded if t.n2sid_fit < t.n4sid_fit)
        ties = total - wins - losses
        n2sid = np.array([t.n2sid_fit for t in succeeded], dtype=float)
        n4sid = np.array([t.n4sid_fit for t in succeeded], dtype=float)

        def stat(values, fn):
            values = np.asarray([v for v in values if v is not None], dtype=float)
            values = values[np.isfinite(values)]
            return float(fn(values)) if values.size else math.nan

        return {
            "trials": len(self.trials),
            "succeeded": total,
            "failed": len(self.trials) - total,
            "negative_fits": sum(1 for t in succeeded if t.negative_fit),
            "wins": wins,
            "losses": losses,
            "ties": ties,
            "win_rate": wins / total if total else math.nan,
            "loss_rate": losses / total if total else math.nan,
            "tie_rate": ties / total if total else math.nan,
            "n2sid_mean_fit": stat(n2sid, np.mean),
            "n4sid_mean_fit": stat(n4sid, np.mean),
            "n2sid_median_fit": stat(n2sid, np.median),
            "n4sid_median_fit": stat(n4sid, np.median),
            "n2sid_mean_order": stat([t.n2sid_order for t in succeeded], np.mean),
            "n4sid_mean_order": stat([t.n4sid_order for t in succeeded], np.mean),
            "n2sid_mean_dispersion": stat([t.n2sid_dispersion for t in succeeded], np.mean),
            "n4sid_mean_dispersion": stat([t.n4sid_dispersion for t in succeeded], np.mean),
            "fit_gap_ci90": self.bootstrap_fit_gap(n2sid - n4sid),
            "all_fair": all(t.fair for t in self.trials if t.failure is None),
        }

    def bootstrap_fit_gap(self, gap: np.ndarray, resamples: int = 2000) -> List[float]:
        """90 % percentile bootstrap interval of the mean fit advantage of N2SID."""
        if gap.size == 0:
            return [math.nan, math.nan]
        rng = np.random.default_rng(self.master_seed)
        means = rng.choice(gap, size=(resamples, gap.size), replace=True).mean(axis=1)
        return [float(np.percentile(means, 5)), float(np.percentile(means, 95))]

    def to_dict(self, include_timings: bool = False) -> Dict[str, Any]:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "study": self.study,
            "master_seed": self.master_seed,
            "fit_mode": self.fit_mode,
            "lambda_selection": self.lambda_selection,
            "config": self.config,
            "summary": self.summary(),
            "trials": [t.to_dict(include_timings) for t in self.trials],
        }

    def to_json(self) -> str:
        return json.dumps(to_jsonable(self.to_dict()), indent=2, sort_keys=True) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()
