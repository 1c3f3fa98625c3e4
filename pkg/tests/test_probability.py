import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize, stats

from formsens.errors import NonFinite, OutOfSupport, ValidationError
from formsens.probability import (Lognormal, Normal, RandomVector, from_standard_normal,
                                  marginal, std_normal_cdf, std_normal_ppf,
                                  to_standard_normal)

# lognormal(200, 30) quantiles from brentq on scipy.stats.lognorm
LN_MEDIAN = 197.78727057365938
LN_U1 = 229.6045409995823


def test_standard_normal_identity():
    rv = RandomVector.standard_normal(1)
    assert to_standard_normal([1.3], rv)[0] == pytest.approx(1.3, abs=1e-15)
    assert from_standard_normal([2.0], rv)[0] == 2.0


def test_normal_mean_maps_to_zero():
    rv = RandomVector((Normal(50, 20),))
    assert to_standard_normal([50.0], rv)[0] == 0.0
    assert from_standard_normal([0.0], rv)[0] == 50.0


def test_lognormal_median_maps_to_zero():
    d = Lognormal(200, 30)
    zeta = math.sqrt(math.log(1 + (30 / 200) ** 2))
    lam = math.log(200) - zeta ** 2 / 2
    assert d.zeta == pytest.approx(zeta, rel=1e-15)
    assert math.exp(lam) == pytest.approx(LN_MEDIAN, rel=1e-12)
    assert d.to_u(math.exp(lam)) == pytest.approx(0.0, abs=1e-12)


def test_lognormal_quantile_at_one():
    d = Lognormal(200, 30)
    assert d.from_u(1.0) == pytest.approx(math.exp(d.lam + d.zeta), rel=1e-14)
    assert d.from_u(1.0) == pytest.approx(LN_U1, rel=1e-12)


def test_lognormal_cdf_matches_scipy():
    d = Lognormal(50, 20)
    ref = stats.lognorm(s=d.zeta, scale=math.exp(d.lam))
    x = np.linspace(5, 200, 50)
    assert np.allclose(d.cdf(x), ref.cdf(x), rtol=1e-12, atol=1e-300)
    assert ref.mean() == pytest.approx(50, rel=1e-12)
    assert ref.std() == pytest.approx(20, rel=1e-12)


def test_quantile_of_cdf_is_identity():
    for d in (Normal(-3, 2), Lognormal(200, 30), Lognormal(1000, 300)):
        # each half through its own tail, as to_u does
        lower = d.from_u(np.linspace(-6, 0, 21))
        upper = d.from_u(np.linspace(0, 6, 21))
        assert np.allclose(d.ppf(d.cdf(lower)), lower, rtol=1e-12, atol=1e-12)
        assert np.allclose(d.isf(d.sf(upper)), upper, rtol=1e-12, atol=1e-12)


def test_out_of_support():
    with pytest.raises(OutOfSupport):
        Lognormal(200, 30).to_u(-1.0)
    with pytest.raises(OutOfSupport):
        Lognormal(200, 30).to_u(0.0)
    with pytest.raises(OutOfSupport):
        Normal(0, 1).to_u(math.inf)


def test_non_finite_tail():
    with pytest.raises(NonFinite):
        Normal(0, 1).to_u(40.0)
    with pytest.raises(NonFinite):
        Lognormal(200, 30).to_u(1e-20)


def test_invalid_parameters():
    with pytest.raises(ValidationError):
        Normal(0, 0)
    with pytest.raises(ValidationError):
        Lognormal(-1, 1)
    with pytest.raises(ValidationError):
        marginal("gumbel", 1, 1)
    with pytest.raises(ValidationError):
        RandomVector((Normal(0, 1), Normal(0, 1)), ("a", "a"))


def test_phi_accuracy():
    assert std_normal_cdf(-2.0) == pytest.approx(0.022750131948179195, rel=1e-14)
    assert std_normal_ppf(std_normal_cdf(-7.5)) == pytest.approx(-7.5, rel=1e-13)


def test_open_for_extension():
    class Exponential(Lognormal.__mro__[1]):
        kind = "exponential"

        def support(self):
            return (0.0, math.inf)

        def cdf(self, x):
            return 1 - np.exp(-np.asarray(x) / self.mean)

        def sf(self, x):
            return np.exp(-np.asarray(x) / self.mean)

        def ppf(self, p):
            return -self.mean * np.log1p(-np.asarray(p))

        def pdf(self, x):
            return np.exp(-np.asarray(x) / self.mean) / self.mean

    d = Exponential(2.0, 2.0)
    rv = RandomVector((d, Normal(0, 1)))
    u = to_standard_normal([1.0, 0.5], rv)
    assert from_standard_normal(u, rv) == pytest.approx([1.0, 0.5], rel=1e-12)
    assert d.dx_du(0.3) == pytest.approx(
        (d.from_u(0.3 + 1e-6) - d.from_u(0.3 - 1e-6)) / 2e-6, rel=1e-6)


marginals = st.one_of(
    st.builds(Normal, st.floats(-1e3, 1e3), st.floats(1e-2, 1e3)),
    st.builds(Lognormal, st.floats(1e-1, 1e4), st.floats(1e-3, 1.0)).map(
        lambda d: Lognormal(d.mean, d.std_dev * d.mean)),
)


@settings(max_examples=40, deadline=None)
@given(marginals, st.integers(0, 2**31))
def test_round_trip(d, seed):
    rv = RandomVector((d,))
    u = np.random.default_rng(seed).standard_normal((1000, 1)) * 2
    back = to_standard_normal(from_standard_normal(u, rv), rv)
    assert np.max(np.abs(back - u)) < 1e-8


@settings(max_examples=30, deadline=None)
@given(marginals)
def test_monotone(d):
    u = np.linspace(-7, 7, 301)
    x = d.from_u(u)
    assert np.all(np.diff(x) > 0)
    assert np.all(np.diff(d.to_u(x)) > 0)


@pytest.mark.parametrize("d", [Normal(50, 20), Lognormal(200, 30), Lognormal(1000, 300),
                               Lognormal(50, 20)])
def test_sample_moments(d):
    u = np.random.default_rng(7).standard_normal(10**6)
    x = d.from_u(u)
    n = x.size
    assert abs(x.mean() - d.mean) < 3 * x.std() / math.sqrt(n)
    # std error of the sample std via the fourth central moment
    m4 = np.mean((x - x.mean()) ** 4)
    se_var = math.sqrt((m4 - x.var() ** 2) / n)
    se_std = se_var / (2 * x.std())
    assert abs(x.std() - d.std_dev) < 3 * se_std


def test_vector_shapes():
    rv = RandomVector((Normal(0, 1), Lognormal(200, 30)), ("a", "b"))
    u = np.zeros((5, 2))
    assert from_standard_normal(u, rv).shape == (5, 2)
    assert rv.index("b") == 1
    with pytest.raises(ValidationError):
        from_standard_normal(np.zeros(3), rv)
    lo = optimize.brentq(lambda x: Lognormal(200, 30).cdf(x) - 0.5, 1, 1000, xtol=1e-13)
    assert lo == pytest.approx(LN_MEDIAN, rel=1e-10)
