"""Numeric inner loops, each in a numba and a numpy flavour.

The public wrappers at the bottom dispatch on :func:`longmem._backend.get_backend`.
Both flavours implement the same arithmetic; they agree to rounding, not
bit for bit, because numpy reductions use pairwise summation.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.signal import lfilter

from ._backend import get_backend, njit

# window is "zero dispersion" when its sd is below this fraction of max |x|
DEGENERATE_RTOL = 1e-13
# |rho1| at or above 1 - RHO_EPS is treated as a unit root
RHO_EPS = 1e-12
# allowed negative slack in the modified variance, relative to the plain variance
RADICAND_RTOL = 1e-12


class KernelError(RuntimeError):
    """Internal numeric invariant violated."""


# ---------------------------------------------------------------------------
# autoregressive filter


@njit(cache=True)
def _ar_filter_numba(eps, coeffs):
    # transposed direct form II, as lfilter does: the state update has no
    # loop-carried dependence, so it vectorises
    n = eps.shape[0]
    p = coeffs.shape[0]
    z = np.zeros(p + 1)
    out = np.empty(n)
    for t in range(n):
        y = eps[t] + z[0]
        out[t] = y
        for i in range(p):
            z[i] = z[i + 1] + coeffs[i] * y
    return out


def _ar_filter_numpy(eps, coeffs):
    den = np.empty(coeffs.shape[0] + 1)
    den[0] = 1.0
    den[1:] = -coeffs
    return lfilter([1.0], den, eps)


# ---------------------------------------------------------------------------
# per-window rescaled range statistics


@njit(cache=True)
def _optimal_lag_numba(rho, size):
    """Return (lag, capped)."""
    cap = size - 1
    if not rho > 0.0:
        return 0, False
    if rho >= 1.0 - RHO_EPS:
        return cap, True
    val = (1.5 * size) ** (1.0 / 3.0) * (2.0 * rho / (1.0 - rho * rho)) ** (2.0 / 3.0)
    if val >= cap:
        return cap, True
    return int(math.floor(val)), False


@njit(cache=True)
def _windows_numba(x, size, modified, fixed_lag, ddof):
    n_win = x.shape[0] // size
    ranges = np.empty(n_win)
    sd = np.empty(n_win)
    sd_mod = np.empty(n_win)
    rho = np.empty(n_win)
    lags = np.zeros(n_win, dtype=np.int64)
    skipped = np.zeros(n_win, dtype=np.bool_)
    capped = np.zeros(n_win, dtype=np.bool_)
    dev = np.empty(size)
    denom = size - ddof
    bad_radicand = False
    for w in range(n_win):
        start = w * size
        total = 0.0
        peak = 0.0
        for t in range(size):
            v = x[start + t]
            total += v
            if abs(v) > peak:
                peak = abs(v)
        mean = total / size
        # second pass removes the rounding left in the mean, which the
        # profile would otherwise accumulate linearly
        resid = 0.0
        for t in range(size):
            resid += x[start + t] - mean
        mean += resid / size
        y = 0.0
        ymax = -np.inf
        ymin = np.inf
        ss = 0.0
        for t in range(size):
            d = x[start + t] - mean
            dev[t] = d
            y += d
            if y > ymax:
                ymax = y
            if y < ymin:
                ymin = y
            ss += d * d
        var = ss / denom
        s = math.sqrt(var)
        ranges[w] = ymax - ymin
        sd[w] = s
        if not s > DEGENERATE_RTOL * peak:
            skipped[w] = True
            rho[w] = np.nan
            sd_mod[w] = s
            continue
        c1 = 0.0
        for t in range(size - 1):
            c1 += dev[t] * dev[t + 1]
        r1 = c1 / ss
        rho[w] = r1
        if not modified:
            sd_mod[w] = s
            continue
        if fixed_lag >= 0:
            lag = fixed_lag if fixed_lag < size else size - 1
            cap = fixed_lag >= size
        else:
            lag, cap = _optimal_lag_numba(r1, size)
        lags[w] = lag
        capped[w] = cap
        acc = 0.0
        for j in range(1, lag + 1):
            cj = 0.0
            for t in range(size - j):
                cj += dev[t] * dev[t + j]
            acc += (cj / denom) * (1.0 - j / (lag + 1.0))
        rad = var + 2.0 * acc
        if rad < 0.0:
            if rad < -RADICAND_RTOL * var:
                bad_radicand = True
            rad = 0.0
        sm = math.sqrt(rad)
        sd_mod[w] = sm
        if not sm > DEGENERATE_RTOL * peak:
            skipped[w] = True
    return ranges, sd, sd_mod, rho, lags, skipped, capped, bad_radicand


def _optimal_lag_numpy(rho, size):
    rho = np.asarray(rho, dtype=float)
    cap = size - 1
    lags = np.zeros(rho.shape, dtype=np.int64)
    capped = np.zeros(rho.shape, dtype=bool)
    pos = rho > 0.0
    unit = pos & (rho >= 1.0 - RHO_EPS)
    mid = pos & ~unit
    r = rho[mid]
    val = (1.5 * size) ** (1.0 / 3.0) * (2.0 * r / (1.0 - r * r)) ** (2.0 / 3.0)
    over = val >= cap
    lags[mid] = np.where(over, cap, np.floor(np.where(over, 0.0, val))).astype(np.int64)
    capped[mid] = over
    lags[unit] = cap
    capped[unit] = True
    return lags, capped


def _windows_numpy(x, size, modified, fixed_lag, ddof):
    n_win = x.shape[0] // size
    win = x[: n_win * size].reshape(n_win, size)
    peak = np.abs(win).max(axis=1)
    mean = win.sum(axis=1) / size
    mean += (win - mean[:, None]).sum(axis=1) / size
    dev = win - mean[:, None]
    profile = np.cumsum(dev, axis=1)
    ranges = profile.max(axis=1) - profile.min(axis=1)
    denom = size - ddof
    ss = (dev * dev).sum(axis=1)
    var = ss / denom
    sd = np.sqrt(var)
    skipped = ~(sd > DEGENERATE_RTOL * peak)
    with np.errstate(invalid="ignore", divide="ignore"):
        rho = (dev[:, :-1] * dev[:, 1:]).sum(axis=1) / ss
    rho[skipped] = np.nan
    lags = np.zeros(n_win, dtype=np.int64)
    capped = np.zeros(n_win, dtype=bool)
    if not modified:
        return ranges, sd, sd.copy(), rho, lags, skipped, capped, False
    live = ~skipped
    if fixed_lag >= 0:
        lags[live] = min(fixed_lag, size - 1)
        capped[live] = fixed_lag >= size
    else:
        lags[live], capped[live] = _optimal_lag_numpy(rho[live], size)
    acc = np.zeros(n_win)
    top = int(lags.max()) if n_win else 0
    for j in range(1, top + 1):
        use = lags >= j
        cj = (dev[use, :-j] * dev[use, j:]).sum(axis=1) / denom
        acc[use] += cj * (1.0 - j / (lags[use] + 1.0))
    rad = var + 2.0 * acc
    bad = bool(np.any(rad < -RADICAND_RTOL * var))
    sd_mod = np.sqrt(np.maximum(rad, 0.0))
    skipped = skipped | ~(sd_mod > DEGENERATE_RTOL * peak)
    return ranges, sd, sd_mod, rho, lags, skipped, capped, bad


# ---------------------------------------------------------------------------
# dispatch


def ar_filter(eps: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """x[t] = eps[t] + sum_i coeffs[i-1] * x[t-i] with zero pre-history."""
    eps = np.ascontiguousarray(eps, dtype=np.float64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    if get_backend() == "numba":
        return _ar_filter_numba(eps, coeffs)
    return _ar_filter_numpy(eps, coeffs)


def window_statistics(x: np.ndarray, size: int, modified: bool, fixed_lag: int = -1, ddof: int = 1):
    """Per-window (range, sd, modified sd, rho1, lag, skipped, capped).

    ``x`` is split into ``len(x) // size`` adjacent windows; a trailing
    remainder is ignored. ``fixed_lag < 0`` selects the lag from rho1.
    Variance and autocovariances divide by ``size - ddof``; rho1 does not
    depend on ``ddof``.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if size < 2:
        raise ValueError("window size must be >= 2")
    if ddof not in (0, 1):
        raise ValueError(f"ddof must be 0 or 1, got {ddof}")
    if get_backend() == "numba":
        out = _windows_numba(x, int(size), bool(modified), int(fixed_lag), int(ddof))
    else:
        out = _windows_numpy(x, int(size), bool(modified), int(fixed_lag), int(ddof))
    if out[-1]:
        raise KernelError("modified variance radicand is materially negative")
    return out[:-1]
