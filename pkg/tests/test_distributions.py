import math

import numpy as np
import pytest
from scipy import stats

from longmem.distributions import (
    KINDS,
    DistributionSpec,
    Moment,
    ParameterError,
    sample,
    theoretical_moments,
)
from longmem.harness import derive_stream

N_BIG = 10**6


def draws(kind, n=N_BIG, seed=11, **kw):
    return sample(DistributionSpec(kind, **kw), n, np.random.default_rng(seed))


def test_defaults():
    g = DistributionSpec("gamma")
    assert (g.shape, g.scale, g.shift) == (4.0, 0.25, 1.0)
    assert DistributionSpec("log-t").dof == 5.0
    assert DistributionSpec("laplace").sd == 1.0
    for kind in ("normal", "cauchy", "laplace"):
        assert DistributionSpec(kind).shift == 0.0
    for kind in ("log-normal", "log-t", "log-laplace", "gamma", "inv-gamma"):
        assert DistributionSpec(kind).shift == 1.0


def test_underscore_names_accepted():
    assert DistributionSpec("log_normal").kind == "log-normal"
    assert DistributionSpec("inv_gamma").kind == "inv-gamma"


@pytest.mark.parametrize("kwargs", [
    {"kind": "gamma", "shape": 0.0},
    {"kind": "gamma", "scale": -1.0},
    {"kind": "inv-gamma", "shape": -2.0},
    {"kind": "log-t", "dof": 0.0},
    {"kind": "laplace", "sd": 0.0},
])
def test_invalid_params(kwargs):
    with pytest.raises(ParameterError):
        DistributionSpec(**kwargs)


def test_unknown_kind_lists_valid_names():
    with pytest.raises(ParameterError, match="log-laplace"):
        DistributionSpec("weibull")


@pytest.mark.parametrize("kind", KINDS)
def test_deterministic(kind):
    spec = DistributionSpec(kind)
    a = sample(spec, 10, derive_stream(5, 99, 0))
    b = sample(spec, 10, derive_stream(5, 99, 0))
    assert np.array_equal(a, b)


@pytest.mark.parametrize("kind", KINDS)
def test_shift_property(kind):
    spec = DistributionSpec(kind)
    unshifted = DistributionSpec(kind, shift=0.0)
    a = sample(spec, 1000, np.random.default_rng(3))
    b = sample(unshifted, 1000, np.random.default_rng(3))
    assert np.array_equal(a, b - spec.shift)


def test_n_must_be_positive():
    with pytest.raises(ValueError):
        sample(DistributionSpec("normal"), 0, np.random.default_rng(0))


def test_gamma_mean_zero_after_shift():
    x = draws("gamma")
    assert abs(x.mean()) <= 4 * (0.5 / 10**3)


def test_laplace_excess_kurtosis():
    x = draws("laplace")
    assert stats.kurtosis(x) == pytest.approx(3.0, abs=0.2)
    assert x.std() == pytest.approx(1.0, abs=0.005)


@pytest.mark.parametrize("kind,density_at_zero", [
    ("normal", 1 / math.sqrt(2 * math.pi)),
    ("cauchy", 1 / math.pi),
    ("laplace", 1 / math.sqrt(2)),
])
def test_symmetric_median(kind, density_at_zero):
    x = draws(kind)
    se = 1 / (2 * density_at_zero * math.sqrt(x.size))
    assert abs(np.median(x)) < 5 * se


@pytest.mark.parametrize("kind", ["log-normal", "log-t", "log-laplace"])
def test_log_family_lower_bound(kind):
    spec = DistributionSpec(kind)
    x = sample(spec, 200_000, np.random.default_rng(1))
    assert np.all(x > -spec.shift)


@pytest.mark.parametrize("kind", ["gamma", "inv-gamma"])
def test_gamma_family_positive_before_shift(kind):
    x = draws(kind, 200_000, shift=0.0)
    assert np.all(x > 0)


@pytest.mark.parametrize("kind,frozen", [
    ("normal", stats.norm()),
    ("log-normal", stats.lognorm(1.0)),
    ("cauchy", stats.cauchy()),
    ("log-t", None),
    ("gamma", stats.gamma(4, scale=0.25)),
    ("inv-gamma", stats.invgamma(4, scale=4.0)),
    ("laplace", stats.laplace(scale=1 / math.sqrt(2))),
    ("log-laplace", stats.loglaplace(math.sqrt(2))),
])
def test_matches_scipy_law(kind, frozen):
    x = draws(kind, 50_000, seed=123, shift=0.0)
    if kind == "log-t":
        # log of the draws is Student-t with 5 dof
        x, frozen = np.log(x), stats.t(5)
    assert stats.kstest(x, frozen.cdf).pvalue > 1e-3


def test_moments_normal():
    assert theoretical_moments(DistributionSpec("normal")).as_tuple() == (0.0, 1.0, 0.0, 0.0)


def test_moments_gamma():
    m = theoretical_moments(DistributionSpec("gamma"))
    assert m.as_tuple() == pytest.approx((0.0, 0.5, 1.0, 1.5))


def test_moments_inv_gamma():
    m = theoretical_moments(DistributionSpec("inv-gamma"))
    assert m.excess_kurtosis is Moment.UNDEFINED
    ref = stats.invgamma(4, scale=4.0)
    assert m.mean == pytest.approx(ref.mean() - 1.0)
    assert m.std_dev == pytest.approx(ref.std())
    assert m.skewness == pytest.approx(float(ref.stats(moments="s")))


def test_moments_flags():
    c = theoretical_moments(DistributionSpec("cauchy"))
    assert c.mean is Moment.UNDEFINED and c.std_dev is Moment.INFINITE
    lt = theoretical_moments(DistributionSpec("log-t"))
    assert all(v is Moment.INFINITE for v in lt.as_tuple())
    ll = theoretical_moments(DistributionSpec("log-laplace"))
    assert ll.mean == pytest.approx(1.0)
    assert ll.std_dev is Moment.INFINITE


def test_moments_log_normal_and_laplace():
    ln = theoretical_moments(DistributionSpec("log-normal"))
    ref = stats.lognorm(1.0)
    assert ln.mean == pytest.approx(ref.mean() - 1.0)
    assert ln.std_dev == pytest.approx(ref.std())
    s, k = ref.stats(moments="sk")
    assert (ln.skewness, ln.excess_kurtosis) == pytest.approx((float(s), float(k)))
    assert theoretical_moments(DistributionSpec("laplace")).as_tuple() == pytest.approx((0, 1, 0, 3))


def test_moments_are_flag_or_number():
    for kind in KINDS:
        for v in theoretical_moments(DistributionSpec(kind)).as_tuple():
            assert isinstance(v, Moment) or math.isfinite(v)
        sd = theoretical_moments(DistributionSpec(kind)).std_dev
        assert isinstance(sd, Moment) or sd >= 0


def test_round_trip_dict():
    for kind in KINDS:
        spec = DistributionSpec(kind)
        assert DistributionSpec.from_dict(spec.to_dict()) == spec
