"""
Statistics Utilities
Rolling shares, convergence diagnostics and confidence intervals
"""
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats


def rolling_share(flags: Sequence[bool], window: int) -> np.ndarray:
    """Rolling fraction of True flags; NaN until the window is full"""
    series = pd.Series(np.asarray(flags, dtype=float))
    return series.rolling(window).mean().to_numpy()


def convergence_round(rolling: np.ndarray, band: float) -> Optional[int]:
    """First index after which the rolling series stays within band of its final value"""
    if len(rolling) == 0:
        return None
    valid = ~np.isnan(rolling)
    if not valid.any():
        return None
    final = rolling[-1]
    outside = np.flatnonzero(valid & (np.abs(rolling - final) > band))
    if len(outside) == 0:
        return int(np.flatnonzero(valid)[0])
    return int(outside[-1] + 1)


def binomial_interval(successes: int, trials: int, confidence: float) -> Tuple[float, float]:
    """Exact (Clopper-Pearson) interval for a success probability"""
    interval = stats.binomtest(successes, trials).proportion_ci(confidence_level=confidence, method='exact')
    return float(interval.low), float(interval.high)


def mean_and_stderr(samples: np.ndarray, lag_one: bool = True) -> Tuple[float, float]:
    """Sample mean and standard error; with lag_one the error allows for one-step dependence"""
    samples = np.asarray(samples, dtype=float)
    n = len(samples)
    mean = float(samples.mean())
    centered = samples - mean
    gamma0 = float(np.dot(centered, centered)) / n
    variance = gamma0
    if lag_one and n > 1:
        gamma1 = float(np.dot(centered[:-1], centered[1:])) / n
        corrected = gamma0 + 2.0 * gamma1
        if corrected > 0:
            variance = corrected
    return mean, float(np.sqrt(variance / n))
