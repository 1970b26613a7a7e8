"""Increment generators (i.i.d., AR(1), truncated ARFIMA(0,d,0)) and integration."""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .distributions import ParameterError

__all__ = [
    "PROCESS_KINDS",
    "ProcessSpec",
    "arfima_weights",
    "generate_increments",
    "increments_from_levels",
    "integrate",
]

PROCESS_KINDS = ("iid", "ar1", "arfima")
DEFAULT_BURN_IN = 1000


@dataclass(frozen=True)
class ProcessSpec:
    """Memory structure of the simulated increments.

    ``theta`` is the AR(1) coefficient and ``d`` the fractional parameter;
    ``truncation`` caps the ARFIMA autoregressive expansion. ``burn_in``
    steps are simulated and dropped (default 1000 for ar1/arfima, 0 for iid).
    """

    kind: str
    theta: float = 0.25
    d: float = 0.25
    truncation: int = 100
    burn_in: int | None = None

    def __post_init__(self):
        kind = self.kind.strip().lower().replace("-", "").replace("_", "")
        if kind not in PROCESS_KINDS:
            raise ParameterError(f"unknown process {self.kind!r}; valid names: {', '.join(PROCESS_KINDS)}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "d", float(self.d))
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", 0 if kind == "iid" else DEFAULT_BURN_IN)
        if int(self.burn_in) != self.burn_in or self.burn_in < 0:
            raise ParameterError(f"burn-in must be a non-negative integer, got {self.burn_in}")
        object.__setattr__(self, "burn_in", int(self.burn_in))
        if kind == "ar1" and not abs(self.theta) < 1.0:
            raise ParameterError(f"ar1: |theta| must be < 1, got {self.theta}")
        if kind == "arfima":
            if not 0.0 < self.d < 0.5:
                raise ParameterError(f"arfima: d must lie in (0, 0.5), got {self.d}")
            if int(self.truncation) != self.truncation or self.truncation < 1:
                raise ParameterError(f"arfima: truncation must be a positive integer, got {self.truncation}")
            object.__setattr__(self, "truncation", int(self.truncation))

    @property
    def hurst(self) -> float:
        """Asymptotic Hurst exponent of the idealised process."""
        return self.d + 0.5 if self.kind == "arfima" else 0.5

    @property
    def label(self) -> str:
        default = ProcessSpec(self.kind)
        keys = {"iid": ("burn_in",), "ar1": ("theta", "burn_in"),
                "arfima": ("d", "truncation", "burn_in")}[self.kind]
        extras = [f"{k.replace('_', '-')}={getattr(self, k):g}" for k in keys
                  if getattr(self, k) != getattr(default, k)]
        return self.kind if not extras else f"{self.kind}({','.join(extras)})"

    def to_dict(self) -> dict:
        out: dict = {"name": self.kind}
        if self.kind == "ar1":
            out["theta"] = self.theta
        elif self.kind == "arfima":
            out["d"] = self.d
            out["truncation"] = self.truncation
        out["burn-in"] = self.burn_in
        return out

    @classmethod
    def from_dict(cls, data: dict | str) -> "ProcessSpec":
        if isinstance(data, str):
            return cls(data)
        data = {k.replace("-", "_"): v for k, v in data.items()}
        try:
            kind = data.pop("name")
        except KeyError:
            raise ParameterError("process entry needs a 'name'") from None
        unknown = set(data) - {"theta", "d", "truncation", "burn_in"}
        if unknown:
            raise ParameterError(f"process {kind!r}: unknown keys {sorted(unknown)}")
        return cls(kind, **data)

    def coefficients(self) -> np.ndarray:
        if self.kind == "ar1":
            return np.array([self.theta])
        if self.kind == "arfima":
            return arfima_weights(self.d, self.truncation)
        return np.empty(0)


@functools.lru_cache(maxsize=64)
def _weights(d: float, max_lag: int) -> np.ndarray:
    i = np.arange(1, max_lag + 1, dtype=float)
    logw = np.log(d) + gammaln(i - d) - gammaln(1.0 - d) - gammaln(1.0 + i)
    w = np.exp(logw)
    w.setflags(write=False)
    return w


def arfima_weights(d: float, max_lag: int) -> np.ndarray:
    """Autoregressive weights a_1..a_max_lag of fractionally integrated noise.

    a_i = d * Gamma(i - d) / (Gamma(1 - d) * Gamma(1 + i)), evaluated in log
    space. The returned array is read-only and cached per ``(d, max_lag)``.
    """
    d = float(d)
    if not 0.0 < d < 0.5:
        raise ParameterError(f"d must lie in (0, 0.5), got {d}")
    if int(max_lag) != max_lag or max_lag < 1:
        raise ParameterError(f"max_lag must be a positive integer, got {max_lag}")
    return _weights(d, int(max_lag))


def generate_increments(spec: ProcessSpec, innovations: np.ndarray, length: int | None = None) -> np.ndarray:
    """Filter ``innovations`` through the process and drop the burn-in.

    ``length`` defaults to ``len(innovations) - spec.burn_in``.
    """
    eps = np.asarray(innovations, dtype=np.float64)
    if eps.ndim != 1:
        raise ValueError("innovations must be one-dimensional")
    if length is None:
        length = eps.shape[0] - spec.burn_in
    need = length + spec.burn_in
    if length < 1 or eps.shape[0] < need:
        raise ValueError(
            f"need {need} innovations (length {length} + burn-in {spec.burn_in}), got {eps.shape[0]}"
        )
    eps = eps[:need]
    if spec.kind == "iid":
        x = eps.copy()
    else:
        x = _kernels.ar_filter(eps, spec.coefficients())
    return x[spec.burn_in:]


def integrate(increments) -> np.ndarray:
    """Level series X_0 = 0, X_t = X_{t-1} + x_t (length T + 1)."""
    x = np.asarray(increments, dtype=np.float64)
    out = np.zeros(x.shape[0] + 1)
    np.cumsum(x, out=out[1:])
    return out


def increments_from_levels(levels) -> np.ndarray:
    levels = np.asarray(levels, dtype=np.float64)
    if levels.ndim != 1 or levels.shape[0] < 2:
        raise ValueError("need at least two levels to form increments")
    return np.diff(levels)
