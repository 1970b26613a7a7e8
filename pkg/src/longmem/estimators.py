"""Rescaled range (R/S) and modified rescaled range (M-R/S) Hurst estimation.

The increments are cut into adjacent non-overlapping windows of every dyadic
scale from ``2**p_min`` up to the series length. Each window contributes its
profile range over its standard deviation (``rs``) or over the Bartlett
weighted long-run standard deviation (``mrs``); window values are averaged
per scale and H is the OLS slope of log mean R/S on log scale.

Window variances and autocovariances divide by ``window - ddof``; the
default ``ddof=1`` is the sample standard deviation, ``ddof=0`` the
maximum-likelihood form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .processes import increments_from_levels

__all__ = [
    "METHODS",
    "EstimationError",
    "HurstEstimate",
    "RescaledRangeCurve",
    "ScaleGrid",
    "WindowStats",
    "build_grid",
    "estimate_hurst",
    "fit_hurst",
    "modified_std",
    "optimal_lag",
    "rescaled_range_at_scale",
    "rs_curve",
    "window_stats",
]

METHODS = ("rs", "mrs")
DEFAULT_DDOF = 1


class EstimationError(ValueError):
    """Series too short or too degenerate to estimate H."""


def _check_method(method: str) -> str:
    m = method.lower().replace("-", "").replace("/", "")
    if m not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    return m


@dataclass(frozen=True)
class ScaleGrid:
    p_min: int
    p_max: int
    base: int = 2

    @property
    def scales(self) -> np.ndarray:
        return self.base ** np.arange(self.p_min, self.p_max + 1, dtype=np.int64)

    @property
    def length(self) -> int:
        """Analysed prefix length (the largest scale)."""
        return self.base**self.p_max

    def window_counts(self) -> np.ndarray:
        return self.length // self.scales


def build_grid(length: int, p_min: int = 5) -> ScaleGrid:
    """Dyadic scales 2**p_min .. largest power of two not exceeding ``length``."""
    if p_min < 1:
        raise ValueError(f"p_min must be >= 1, got {p_min}")
    if length < 2 ** (p_min + 1):
        raise EstimationError(
            f"length {length} gives fewer than two scales >= {2**p_min}; need at least {2 ** (p_min + 1)}"
        )
    p_max = int(length).bit_length() - 1
    return ScaleGrid(p_min=p_min, p_max=p_max)


@dataclass(frozen=True)
class WindowStats:
    range: float
    std_dev: float
    modified_std: float
    lag: int
    rho1: float
    capped: bool = False


def window_stats(window, modified: bool = True, lag: int | None = None, ddof: int = DEFAULT_DDOF) -> WindowStats:
    """Statistics of a single window (convenience wrapper around the kernel)."""
    w = np.asarray(window, dtype=np.float64)
    r, s, sm, rho, lags, _, capped = _kernels.window_statistics(
        w, w.shape[0], modified, -1 if lag is None else lag, ddof
    )
    return WindowStats(float(r[0]), float(s[0]), float(sm[0]), int(lags[0]), float(rho[0]), bool(capped[0]))


def optimal_lag(window) -> int:
    """Data-driven Bartlett truncation lag from the window's lag-1 autocorrelation.

    Non-positive autocorrelation gives 0; the lag never exceeds ``len(window) - 1``.
    """
    w = np.asarray(window, dtype=np.float64)
    if w.shape[0] < 2:
        raise ValueError("window must hold at least two values")
    return window_stats(w, modified=True).lag


def lag_from_rho(rho1: float, size: int) -> tuple[int, bool]:
    """Optimal lag for a given lag-1 autocorrelation and window size; (lag, capped)."""
    lags, capped = _kernels._optimal_lag_numpy(np.array([rho1]), size)
    return int(lags[0]), bool(capped[0])


def modified_std(window, lag: int, ddof: int = DEFAULT_DDOF) -> float:
    """Long-run standard deviation with Bartlett weights up to ``lag``."""
    w = np.asarray(window, dtype=np.float64)
    if not 0 <= lag < w.shape[0]:
        raise ValueError(f"lag must satisfy 0 <= lag < {w.shape[0]}, got {lag}")
    return window_stats(w, modified=True, lag=lag, ddof=ddof).modified_std


@dataclass(frozen=True)
class ScaleResult:
    scale: int
    mean: float
    windows: int
    skipped: int
    capped: int


def rescaled_range_at_scale(increments, scale: int, method: str = "rs",
                            fixed_lag: int | None = None, ddof: int = DEFAULT_DDOF) -> ScaleResult:
    """Average rescaled range over the adjacent windows of one scale.

    Windows with zero dispersion are skipped and counted. ``fixed_lag``
    overrides the automatic lag choice for ``mrs``.
    """
    method = _check_method(method)
    x = np.asarray(increments, dtype=np.float64)
    n_win = x.shape[0] // scale
    if n_win < 1:
        raise EstimationError(f"series of length {x.shape[0]} is shorter than scale {scale}")
    r, s, sm, _, _, skipped, capped = _kernels.window_statistics(
        x[: n_win * scale], scale, method == "mrs", -1 if fixed_lag is None else fixed_lag, ddof
    )
    denom = sm if method == "mrs" else s
    keep = ~skipped
    if not keep.any():
        raise EstimationError(f"every window at scale {scale} has zero dispersion")
    values = r[keep] / denom[keep]
    return ScaleResult(int(scale), float(values.mean()), int(n_win), int(skipped.sum()), int(capped.sum()))


@dataclass(frozen=True)
class RescaledRangeCurve:
    method: str
    scales: np.ndarray
    values: np.ndarray
    skipped: dict = field(default_factory=dict)
    capped: dict = field(default_factory=dict)
    dropped_scales: tuple = ()

    @property
    def points(self) -> list[tuple[int, float]]:
        return list(zip(self.scales.tolist(), self.values.tolist()))


def rs_curve(increments, grid: ScaleGrid, method: str = "rs", fixed_lag: int | None = None,
             ddof: int = DEFAULT_DDOF) -> RescaledRangeCurve:
    method = _check_method(method)
    x = np.asarray(increments, dtype=np.float64)
    if x.shape[0] < grid.length:
        raise EstimationError(f"grid needs {grid.length} increments, got {x.shape[0]}")
    x = x[: grid.length]
    scales, values, dropped = [], [], []
    skipped, capped = {}, {}
    for v in grid.scales.tolist():
        try:
            res = rescaled_range_at_scale(x, v, method, fixed_lag, ddof)
        except EstimationError:
            dropped.append(v)
            skipped[v] = grid.length // v
            continue
        scales.append(v)
        values.append(res.mean)
        skipped[v] = res.skipped
        capped[v] = res.capped
    if len(scales) < 2:
        raise EstimationError("fewer than two scales with non-degenerate windows")
    return RescaledRangeCurve(method, np.array(scales, dtype=np.int64), np.array(values),
                              skipped, capped, tuple(dropped))


@dataclass(frozen=True)
class HurstEstimate:
    hurst: float
    intercept: float
    method: str
    scales: tuple
    residual_sd: float
    analysed_length: int = 0
    truncated_from: int = 0

    @property
    def H(self) -> float:
        return self.hurst


def _ols(logx: np.ndarray, logy: np.ndarray) -> tuple[float, float, float]:
    xm = logx.mean()
    ym = logy.mean()
    dx = logx - xm
    slope = float((dx * (logy - ym)).sum() / (dx * dx).sum())
    intercept = float(ym - slope * xm)
    resid = logy - (intercept + slope * logx)
    dof = max(logx.shape[0] - 2, 1)
    return slope, intercept, float(math.sqrt((resid * resid).sum() / dof))


def fit_hurst(curve: RescaledRangeCurve) -> HurstEstimate:
    """Equal-weight least squares slope of log R/S against log scale."""
    scales = np.asarray(curve.scales, dtype=float)
    values = np.asarray(curve.values, dtype=float)
    if scales.shape[0] < 2:
        raise EstimationError("need at least two scales to fit H")
    if np.any(values <= 0) or np.any(scales <= 0):
        raise EstimationError("curve points must be positive")
    slope, intercept, resid = _ols(np.log(scales), np.log(values))
    return HurstEstimate(slope, intercept, curve.method, tuple(int(s) for s in curve.scales), resid)


def estimate_hurst(series, method: str = "rs", p_min: int = 5, kind: str = "increments",
                   ddof: int = DEFAULT_DDOF) -> HurstEstimate:
    """Hurst exponent of ``series`` (increments, or levels when ``kind='levels'``).

    Only the longest power-of-two prefix of the increments is analysed.
    """
    method = _check_method(method)
    if kind == "levels":
        x = increments_from_levels(series)
    elif kind == "increments":
        x = np.asarray(series, dtype=np.float64)
    else:
        raise ValueError(f"kind must be 'levels' or 'increments', got {kind!r}")
    if not np.all(np.isfinite(x)):
        raise EstimationError("series contains non-finite values")
    grid = build_grid(x.shape[0], p_min)
    est = fit_hurst(rs_curve(x, grid, method, ddof=ddof))
    return HurstEstimate(est.hurst, est.intercept, est.method, est.scales, est.residual_sd,
                         analysed_length=grid.length, truncated_from=int(x.shape[0]))
