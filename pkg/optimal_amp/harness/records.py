"""Result records and the CSV/JSON writers shared by all commands.

Outputs carry no timestamps, so identical inputs give identical bytes.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd

from ..constants import SOLVER_NAMES

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"

SWEEP_COLUMNS = [
    "alpha",
    "solver",
    "trial",
    "seed",
    "P",
    "N",
    "mse_normalized",
    "iterations",
    "converged",
    "stationarity_residual",
    "se_prediction",
]


@dataclass(frozen=True)
class SweepRecord:
    """One solver run on one instance.

    ``se_prediction`` is the state-evolution MSE (normalised by the prior variance) for solvers that
    state evolution describes and ``nan`` otherwise; ``stationarity_residual`` is ``nan`` for bAMP.
    """

    alpha: float
    solver: str
    trial: int
    seed: int
    P: int
    N: int
    mse_normalized: float
    iterations: int
    converged: bool
    stationarity_residual: float = float("nan")
    se_prediction: float = float("nan")

    def __post_init__(self):
        if self.mse_normalized < 0.0:
            raise ValueError(f"mse_normalized must be nonnegative, got {self.mse_normalized}")
        has_prediction = not math.isnan(self.se_prediction)
        if has_prediction != (self.solver in (SOLVER_NAMES.OPTIMAL, SOLVER_NAMES.BAMP)):
            raise ValueError(f"se_prediction must be given exactly for the optimal and bamp solvers, got {self}")

    def as_row(self) -> dict:
        return asdict(self)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def save_json(data, directory: str, filename: str) -> str:
    """Write ``data`` as sorted, indented JSON; non-finite floats become ``null``."""
    os.makedirs(directory, exist_ok=True)
    filepath = os.path.join(directory, filename)
    with open(filepath, "w", encoding="utf-8", newline="\n") as f:
        json.dump(_jsonable(data), f, sort_keys=True, indent=2)
        f.write("\n")
    logger.info(f"JSON saved to: {filepath}")
    return filepath


def save_csv(rows: list[dict] | pd.DataFrame, directory: str, filename: str, columns: list[str] | None = None) -> str:
    """Write rows with a header line and full-precision floats."""
    df = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(rows, columns=columns)
    os.makedirs(directory, exist_ok=True)
    filepath = os.path.join(directory, filename)
    df.to_csv(filepath, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"CSV saved to: {filepath} (shape {df.shape})")
    return filepath


def summarize_sweep(records: list[SweepRecord]) -> list[dict]:
    """Mean, standard deviation and standard error of the normalised MSE per ``(alpha, solver)``.

    Runs that stopped without converging are included; diverged runs (``nan`` MSE) are not, and
    both counts are reported alongside.
    """
    df = pd.DataFrame([r.as_row() for r in records], columns=SWEEP_COLUMNS)
    summary = []
    for (alpha, solver), group in df.groupby(["alpha", "solver"], sort=True):
        mse = group["mse_normalized"].to_numpy(dtype=float)
        mse = mse[np.isfinite(mse)]
        n = mse.size
        sd = float(np.std(mse, ddof=1)) if n > 1 else float("nan")
        summary.append(
            {
                "alpha": float(alpha),
                "solver": solver,
                "trials": int(len(group)),
                "finite": int(n),
                "converged": int(group["converged"].sum()),
                "mse_mean": float(np.mean(mse)) if n else float("nan"),
                "mse_sd": sd,
                "mse_se": sd / np.sqrt(n) if n > 1 else float("nan"),
                "se_prediction": float(group["se_prediction"].iloc[0]),
            }
        )
    return summary
