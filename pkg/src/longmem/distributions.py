"""Innovation distributions used by the simulation grid.

Every draw is a raw variate minus a fixed ``shift``. The exponential
families (log-normal, log-t, log-Laplace) and the (inverse) gamma are
shifted by one, the symmetric laws are left alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import Enum

import numpy as np

__all__ = [
    "KINDS",
    "DistributionSpec",
    "Moment",
    "MomentSummary",
    "ParameterError",
    "sample",
    "theoretical_moments",
]

KINDS = (
    "normal",
    "log-normal",
    "cauchy",
    "log-t",
    "gamma",
    "inv-gamma",
    "laplace",
    "log-laplace",
)

_UNIT_SHIFT = {"log-normal", "log-t", "log-laplace", "gamma", "inv-gamma"}

# parameters each kind actually reads
_USES = {
    "normal": (),
    "log-normal": (),
    "cauchy": (),
    "log-t": ("dof",),
    "gamma": ("shape", "scale"),
    "inv-gamma": ("shape", "scale"),
    "laplace": ("sd",),
    "log-laplace": ("sd",),
}


class ParameterError(ValueError):
    """Invalid distribution or process parameter."""


def canonical_kind(name: str) -> str:
    key = name.strip().lower().replace("_", "-")
    aliases = {"lognormal": "log-normal", "invgamma": "inv-gamma", "inverse-gamma": "inv-gamma",
               "logt": "log-t", "loglaplace": "log-laplace"}
    key = aliases.get(key, key)
    if key not in KINDS:
        raise ParameterError(f"unknown distribution {name!r}; valid names: {', '.join(KINDS)}")
    return key


@dataclass(frozen=True)
class DistributionSpec:
    """One innovation law.

    ``dof`` is the Student-t degrees of freedom behind log-t, ``shape`` and
    ``scale`` parameterise gamma and inverse gamma (the latter is ``1/X`` for
    ``X ~ gamma(shape, scale)``), ``sd`` is the Laplace standard deviation.
    ``shift`` defaults to 1 for the non-symmetric kinds and 0 otherwise.
    """

    kind: str
    dof: float = 5.0
    shape: float = 4.0
    scale: float = 0.25
    sd: float = 1.0
    shift: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", canonical_kind(self.kind))
        if self.shift is None:
            object.__setattr__(self, "shift", 1.0 if self.kind in _UNIT_SHIFT else 0.0)
        for name in ("dof", "shape", "scale", "sd"):
            value = float(getattr(self, name))
            object.__setattr__(self, name, value)
            if name in _USES[self.kind] and not (value > 0 and math.isfinite(value)):
                raise ParameterError(f"{self.kind}: {name} must be a positive finite number, got {value}")
        object.__setattr__(self, "shift", float(self.shift))

    @property
    def label(self) -> str:
        """Short name; non-default parameters are appended."""
        default = DistributionSpec(self.kind)
        extras = [f"{n}={getattr(self, n):g}" for n in (*_USES[self.kind], "shift")
                  if getattr(self, n) != getattr(default, n)]
        return self.kind if not extras else f"{self.kind}({','.join(extras)})"

    def to_dict(self) -> dict:
        out = {"name": self.kind}
        for n in _USES[self.kind]:
            out[n] = getattr(self, n)
        out["shift"] = self.shift
        return out

    @classmethod
    def from_dict(cls, data: dict | str) -> "DistributionSpec":
        if isinstance(data, str):
            return cls(data)
        data = dict(data)
        try:
            kind = data.pop("name")
        except KeyError:
            raise ParameterError("distribution entry needs a 'name'") from None
        known = {f.name for f in fields(cls)} - {"kind"}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"distribution {kind!r}: unknown keys {sorted(unknown)}")
        return cls(kind, **data)


def _raw(spec: DistributionSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    kind = spec.kind
    if kind == "normal":
        return rng.standard_normal(n)
    if kind == "log-normal":
        return np.exp(rng.standard_normal(n))
    if kind == "cauchy":
        # scale-1 Cauchy by inversion
        return np.tan(np.pi * (rng.random(n) - 0.5))
    if kind == "log-t":
        return np.exp(_student_t(spec.dof, n, rng))
    if kind == "gamma":
        return rng.gamma(spec.shape, spec.scale, n)
    if kind == "inv-gamma":
        return 1.0 / rng.gamma(spec.shape, spec.scale, n)
    if kind == "laplace":
        return rng.laplace(0.0, spec.sd / math.sqrt(2.0), n)
    if kind == "log-laplace":
        return np.exp(rng.laplace(0.0, spec.sd / math.sqrt(2.0), n))
    raise AssertionError(kind)


def _student_t(dof: float, n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(n)
    chi2 = rng.chisquare(dof, n)
    return z / np.sqrt(chi2 / dof)


def sample(spec: DistributionSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` shifted innovations from ``spec`` using ``rng``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    out = _raw(spec, int(n), rng)
    if spec.shift:
        out -= spec.shift
    return out


class Moment(Enum):
    UNDEFINED = "undefined"
    INFINITE = "infinite"


@dataclass(frozen=True)
class MomentSummary:
    mean: float | Moment
    std_dev: float | Moment
    skewness: float | Moment
    excess_kurtosis: float | Moment

    def as_tuple(self) -> tuple:
        return (self.mean, self.std_dev, self.skewness, self.excess_kurtosis)


_INF = Moment.INFINITE
_UND = Moment.UNDEFINED


def theoretical_moments(spec: DistributionSpec) -> MomentSummary:
    """Closed-form moments of the shifted law; missing moments are flagged."""
    kind, s = spec.kind, spec.shift
    if kind == "normal":
        return MomentSummary(0.0 - s, 1.0, 0.0, 0.0)
    if kind == "log-normal":
        e = math.e
        return MomentSummary(
            math.exp(0.5) - s,
            math.sqrt((e - 1.0) * e),
            (e + 2.0) * math.sqrt(e - 1.0),
            e**4 + 2 * e**3 + 3 * e**2 - 6.0,
        )
    if kind == "cauchy":
        return MomentSummary(_UND, _INF, _UND, _UND)
    if kind == "log-t":
        # E[exp(tX)] diverges for every t > 0 when X is Student-t
        return MomentSummary(_INF, _INF, _INF, _INF)
    if kind == "gamma":
        k, th = spec.shape, spec.scale
        return MomentSummary(k * th - s, math.sqrt(k) * th, 2.0 / math.sqrt(k), 6.0 / k)
    if kind == "inv-gamma":
        # 1/X with X ~ gamma(k, th) is inverse gamma with shape k and scale 1/th
        k, beta = spec.shape, 1.0 / spec.scale
        mean = beta / (k - 1.0) - s if k > 1 else _INF
        sd = beta / ((k - 1.0) * math.sqrt(k - 2.0)) if k > 2 else (_INF if k > 1 else _UND)
        skew = 4.0 * math.sqrt(k - 2.0) / (k - 3.0) if k > 3 else _UND
        kurt = (30.0 * k - 66.0) / ((k - 3.0) * (k - 4.0)) if k > 4 else _UND
        return MomentSummary(mean, sd, skew, kurt)
    if kind == "laplace":
        return MomentSummary(0.0 - s, spec.sd, 0.0, 3.0)
    if kind == "log-laplace":
        # E[exp(tX)] = 1 / (1 - b^2 t^2) for |t| < 1/b
        b = spec.sd / math.sqrt(2.0)

        def mgf(t: float) -> float | None:
            return 1.0 / (1.0 - (b * t) ** 2) if b * t < 1.0 else None

        m1, m2, m3, m4 = (mgf(t) for t in (1, 2, 3, 4))
        if m1 is None:
            return MomentSummary(_INF, _INF, _INF, _INF)
        mean = m1 - s
        if m2 is None:
            return MomentSummary(mean, _INF, _INF, _INF)
        var = m2 - m1**2
        sd = math.sqrt(var)
        skew = (m3 - 3 * m1 * var - m1**3) / sd**3 if m3 is not None else _INF
        if m4 is None:
            kurt = _INF
        else:
            mu4 = m4 - 4 * m1 * m3 + 6 * m1**2 * m2 - 3 * m1**4
            kurt = mu4 / var**2 - 3.0
        return MomentSummary(mean, sd, skew, kurt)
    raise AssertionError(kind)
