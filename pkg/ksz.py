"""
KSZ - Growth probes for coefficient exponents

For random sign forms the sup-norm is small compared with the number of
coefficients, so a coefficient exponent q below the critical one makes
lp_coeff_norm(T, q) / ||T|| grow with n, while at the critical exponent the
ratio stays bounded. growth_probe measures this and fit_loglog_slope turns
the per-n maxima into a growth rate.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from errors import DomainError, UsageError
from exponents import PLike, PVector, as_pvector
from norms import NormConfig, sup_norm
from parallel import map_ordered
from tensor import Distribution, Field, lp_coeff_norm, random_tensor

logger = logging.getLogger(__name__)

DEFAULT_N_LIST = (2, 4, 8, 16)
DEFAULT_TRIALS = 50
DEFAULT_PROBE_STARTS = 8
# Smallest n entering the mean-ratio fit; n = 2 sits at the extremal 2x2 value
DEFAULT_MIN_FIT_N = 4

CSV_COLUMNS = ["n", "trials", "best_ratio", "mean_ratio", "std_ratio", "certified_fraction"]


@dataclass(frozen=True)
class GrowthRow:
    n: int
    trials: int
    best: float
    mean: float
    std: float
    certified_fraction: float

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "best_ratio": self.best,
            "mean_ratio": self.mean,
            "std_ratio": self.std,
            "certified_fraction": self.certified_fraction,
        }


@dataclass(frozen=True)
class GrowthTable:
    """
    Per-n ratio statistics with two fitted log-log slopes

    slope fits the per-n maxima over every row. mean_slope fits the per-n
    means over rows with n >= min_fit_n, which tracks the typical growth
    rate without the small-n extremal forms.
    """

    p: PVector
    q: float
    rows: Tuple[GrowthRow, ...]
    slope: float
    slope_stderr: float
    seed: int = 0
    mean_slope: float = math.nan
    mean_slope_stderr: float = math.nan
    min_fit_n: int = DEFAULT_MIN_FIT_N

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.to_dict() for row in self.rows], columns=CSV_COLUMNS)

    def to_dict(self) -> Dict:
        return {
            "p": self.p.format(),
            "q": self.q,
            "seed": self.seed,
            "slope": self.slope,
            "slope_stderr": self.slope_stderr,
            "mean_slope": self.mean_slope,
            "mean_slope_stderr": self.mean_slope_stderr,
            "min_fit_n": self.min_fit_n,
            "rows": [row.to_dict() for row in self.rows],
        }


RowLike = Union[GrowthRow, Tuple[float, float]]


def _row_point(row: RowLike, statistic: str) -> Tuple[float, float]:
    if isinstance(row, GrowthRow):
        return float(row.n), row.mean if statistic == "mean" else row.best
    n, value = row
    return float(n), float(value)


def fit_loglog_slope(rows: Sequence[RowLike], statistic: str = "best") -> Tuple[float, float]:
    """
    Least-squares slope of log(ratio) against log(n)

    Args:
        rows: GrowthRow objects or (n, value) pairs
        statistic: "best" or "mean", the GrowthRow field to fit

    Returns:
        (slope, stderr); stderr is nan for exactly two rows

    Raises:
        UsageError: Fewer than two rows or an unknown statistic
        DomainError: Non-positive n or value
    """
    if statistic not in ("best", "mean"):
        raise UsageError(f"unknown statistic {statistic!r}")
    points = [_row_point(row, statistic) for row in rows]
    if len(points) < 2:
        raise UsageError(f"a slope needs at least 2 rows, got {len(points)}")
    if any(n <= 0 or value <= 0 for n, value in points):
        raise DomainError("log-log fit needs positive n and ratios")
    x = np.log([n for n, _ in points])
    y = np.log([value for _, value in points])
    slope, intercept = np.polyfit(x, y, 1)
    if len(points) == 2:
        return float(slope), math.nan
    residuals = y - (slope * x + intercept)
    spread = float(np.sum((x - x.mean()) ** 2))
    stderr = math.sqrt(float(np.sum(residuals ** 2)) / (len(points) - 2) / spread)
    return float(slope), stderr


def _check_n_list(n_list: Sequence[int]) -> Tuple[int, ...]:
    n_list = tuple(int(n) for n in n_list)
    if not n_list:
        raise UsageError("n_list must not be empty")
    if n_list[0] < 1 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise UsageError(f"n_list must be positive and strictly increasing, got {n_list}")
    return n_list


def growth_probe(
    p: PLike,
    q: float,
    n_list: Sequence[int] = DEFAULT_N_LIST,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    norm_cfg: Optional[NormConfig] = None,
    threads: Optional[int] = 1,
    min_fit_n: int = DEFAULT_MIN_FIT_N,
) -> GrowthTable:
    """
    Ratio statistics of random sign forms for growing n

    Cell (n, t) draws a real sign tensor of shape (n,)*m from the (seed, n, t)
    stream and records lp_coeff_norm(T, q) / ||T||. Norms are vertex-certified
    when every p_k is inf and the budget allows, and alternating otherwise.

    Args:
        p: Exponent pattern (its length fixes m)
        q: Coefficient exponent, >= 1
        n_list: Strictly increasing sizes
        trials: Tensors per size
        seed: Master seed
        norm_cfg: Norm settings (default: 8 alternating starts)
        threads: Concurrent cells
        min_fit_n: Smallest n used for the mean-ratio slope

    Returns:
        GrowthTable, bit-reproducible for a fixed seed
    """
    p = as_pvector(p)
    if not q >= 1:
        raise UsageError(f"q must be >= 1, got {q}")
    if trials < 1:
        raise UsageError(f"trials must be >= 1, got {trials}")
    n_list = _check_n_list(n_list)
    norm_cfg = replace(norm_cfg or NormConfig(starts=DEFAULT_PROBE_STARTS), threads=1)

    cells = [(n, t) for n in n_list for t in range(trials)]

    def measure(cell: Tuple[int, int]) -> Tuple[float, bool]:
        n, t = cell
        T = random_tensor((n,) * p.m, Field.REAL, Distribution.SIGNS, seed, stream=(n, t))
        norm = sup_norm(T, p, norm_cfg)
        return lp_coeff_norm(T, q) / norm.value, norm.certified_exact

    results = map_ordered(measure, cells, threads)

    rows = []
    for i, n in enumerate(n_list):
        chunk = results[i * trials:(i + 1) * trials]
        ratios = np.array([r for r, _ in chunk])
        rows.append(GrowthRow(
            n=n,
            trials=trials,
            best=float(np.max(ratios)),
            mean=float(np.mean(ratios)),
            std=float(np.std(ratios)),
            certified_fraction=sum(c for _, c in chunk) / trials,
        ))
        logger.info("n = %d: best %.6g, mean %.6g over %d trials", n, rows[-1].best, rows[-1].mean, trials)

    slope, stderr = fit_loglog_slope(rows) if len(rows) >= 2 else (math.nan, math.nan)
    tail = [row for row in rows if row.n >= min_fit_n]
    mean_slope, mean_stderr = fit_loglog_slope(tail, "mean") if len(tail) >= 2 else (math.nan, math.nan)
    return GrowthTable(p, float(q), tuple(rows), slope, stderr, seed, mean_slope, mean_stderr, min_fit_n)
