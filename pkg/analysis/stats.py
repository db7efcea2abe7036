"""stats.py

Similarity statistics between probability traces.

All functions are pure and take 1-D arrays (one value per episode).
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy import stats
from scipy.signal import savgol_filter

from core.config import NOISE_MEAN, NOISE_SD, SAVGOL_ORDER, SAVGOL_WINDOW
from core.errors import ContractViolation, DataMismatchError

# pearson() result when either series has zero variance
NOT_DEFINED = None


def _as_series(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ContractViolation(f"{name} must be 1-D, got shape {arr.shape}")
    return arr


def mean_trace(traces: list[np.ndarray]) -> np.ndarray:
    """Pointwise arithmetic mean of equally long traces."""
    if len(traces) == 0:
        raise ContractViolation("mean_trace needs at least one trace")
    lengths = {len(t) for t in traces}
    if len(lengths) != 1:
        raise DataMismatchError(f"traces have different lengths: {sorted(lengths)}")
    return np.mean(np.vstack([np.asarray(t, dtype=float) for t in traces]), axis=0)


def pearson(x, y) -> float | None:
    """Sample Pearson coefficient, or NOT_DEFINED when a series is constant."""
    x = _as_series(x, "x")
    y = _as_series(y, "y")
    if len(x) != len(y):
        raise DataMismatchError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ContractViolation("pearson needs at least 2 points")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return NOT_DEFINED
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = stats.pearsonr(x, y)[0]
    if not np.isfinite(r):
        return NOT_DEFINED
    return float(min(1.0, max(-1.0, r)))


def mse(x, y) -> float:
    x = _as_series(x, "x")
    y = _as_series(y, "y")
    if len(x) != len(y):
        raise DataMismatchError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) == 0:
        raise ContractViolation("mse needs at least 1 point")
    return float(np.mean((x - y) ** 2))


def noisy_control(trace, rng: np.random.Generator, *, mean: float = NOISE_MEAN, sd: float = NOISE_SD) -> np.ndarray:
    """Multiply each point by an independent Normal(mean, sd) factor and clamp to [0, 1]."""
    t = _as_series(trace, "trace")
    return np.clip(t * rng.normal(mean, sd, size=t.shape), 0.0, 1.0)


def savgol(trace, window: int = SAVGOL_WINDOW, order: int = SAVGOL_ORDER) -> np.ndarray:
    """Savitzky-Golay smoothing with mirror padding at the edges."""
    t = _as_series(trace, "trace")
    if window <= 0 or window % 2 == 0:
        raise ContractViolation(f"window must be a positive odd integer, got {window}")
    if not 0 <= order < window:
        raise ContractViolation(f"order must be in [0, window), got {order}")
    if len(t) < window:
        raise ContractViolation(f"trace length {len(t)} shorter than window {window}")
    return savgol_filter(t, window_length=window, polyorder=order, mode="mirror")
