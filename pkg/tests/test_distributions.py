import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from twopoint.distributions import (EmpiricalArrival, Exponential, UniformArrival, Weibull, arrival_from_dict,
                                    build_empirical_arrival, journey_family)
from twopoint.errors import DataError

positive = st.floats(0.05, 20.0)
shapes = st.floats(0.3, 5.0)


def test_exponential_pdf_at_zero():
    assert Exponential(0.5).pdf(0.0) == 0.5


def test_exponential_cdf_closed_form():
    assert Exponential(0.5).cdf(2.0) == pytest.approx(1 - math.exp(-1), abs=1e-15)


def test_negative_times_have_no_mass():
    for d in (Exponential(0.5), Weibull(0.75, 2.0)):
        assert d.pdf(-1.0) == 0.0
        assert d.cdf(-1.0) == 0.0
        assert d.cdf(0.0) == 0.0
        assert d.sf(-1.0) == 1.0
        assert d.cdf(1e6) == 1.0


def test_means():
    assert Exponential(0.5).mean() == 2.0
    assert Weibull(0.75, 2.0).mean() == pytest.approx(2 * math.gamma(1 + 1 / 0.75), rel=1e-14)
    assert round(Weibull(0.75, 2.0).mean(), 2) == 2.38
    assert Weibull(1.0, 3.7).mean() == pytest.approx(3.7, rel=1e-14)


def test_medians():
    assert Exponential(0.5).median() == pytest.approx(2 * math.log(2))
    assert Weibull(0.75, 2.0).median() == pytest.approx(stats.weibull_min(0.75, scale=2.0).median(), rel=1e-12)


@settings(max_examples=50)
@given(shapes, positive)
def test_weibull_matches_scipy(k, lam):
    d = Weibull(k, lam)
    ref = stats.weibull_min(k, scale=lam)
    t = np.array([1e-3, 0.1, 0.5, 1.0, 2.0, 7.5]) * lam
    np.testing.assert_allclose(d.pdf(t), ref.pdf(t), rtol=1e-11)
    np.testing.assert_allclose(d.cdf(t), ref.cdf(t), rtol=1e-11, atol=1e-300)
    np.testing.assert_allclose(d.sf(t), ref.sf(t), rtol=1e-11, atol=1e-300)
    np.testing.assert_allclose(d.logpdf(t), ref.logpdf(t), rtol=1e-11)


@settings(max_examples=100)
@given(st.sampled_from(["exp", "weibull"]), shapes, positive, st.floats(0, 10), st.floats(0.01, 10))
def test_interval_mass_matches_quadrature(fam, k, scale, lo, width):
    d = Exponential(1 / scale) if fam == "exp" else Weibull(k, scale)
    hi = lo + width
    # s = lo + width * v**4 tames the t**(k-1) singularity at 0
    ref, _ = integrate.quad(lambda v: float(d.pdf(lo + width * v**4)) * 4 * width * v**3, 0, 1,
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    assert float(d.cdf(hi) - d.cdf(lo)) == pytest.approx(ref, abs=1e-8)


@settings(max_examples=50)
@given(positive, st.integers(0, 2**32 - 1))
def test_weibull_shape_one_is_exponential(lam, seed):
    w, e = Weibull(1.0, lam), Exponential(1.0 / lam)
    t = np.linspace(0, 5 * lam, 41)
    np.testing.assert_allclose(w.pdf(t), e.pdf(t), rtol=1e-12)
    np.testing.assert_allclose(w.cdf(t), e.cdf(t), rtol=1e-12, atol=1e-15)
    assert w.mean() == pytest.approx(e.mean(), rel=1e-12)
    a = w.sample(np.random.default_rng(seed), 64)
    b = e.sample(np.random.default_rng(seed), 64)
    np.testing.assert_allclose(a, b, rtol=1e-12)


@settings(max_examples=30)
@given(st.sampled_from(["exp", "weibull"]), shapes, positive)
def test_cdf_monotone(fam, k, scale):
    d = Exponential(1 / scale) if fam == "exp" else Weibull(k, scale)
    c = d.cdf(np.linspace(-1, 20 * scale, 500))
    assert np.all(np.diff(c) >= 0)
    assert np.all(d.pdf(np.linspace(-1, 20 * scale, 500)) >= 0)


def test_sample_empty():
    assert Exponential(0.5).sample(np.random.default_rng(0), 0).shape == (0,)


@pytest.mark.parametrize("d,mean,var", [
    (Exponential(0.5), 2.0, 4.0),
    (Weibull(0.75, 2.0), 2 * math.gamma(1 + 1 / 0.75), 4 * (math.gamma(1 + 2 / 0.75) - math.gamma(1 + 1 / 0.75) ** 2)),
])
def test_sample_mean_clt(d, mean, var):
    n = 100_000
    x = d.sample(np.random.default_rng(7), n)
    assert abs(x.mean() - mean) < 3 * math.sqrt(var / n)


def test_sampling_is_deterministic():
    a = Weibull(0.75, 2.0).sample(np.random.default_rng(3), 10)
    b = Weibull(0.75, 2.0).sample(np.random.default_rng(3), 10)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("inf"), float("nan")])
def test_parameters_must_be_positive(bad):
    with pytest.raises(ValueError):
        Exponential(bad)
    with pytest.raises(ValueError):
        Weibull(bad, 1.0)
    with pytest.raises(ValueError):
        Weibull(1.0, bad)


def test_family_lookup():
    assert journey_family("exp") is Exponential
    assert journey_family("weibull") is Weibull
    with pytest.raises(ValueError):
        journey_family("gamma")


def test_uniform_arrival():
    h = UniformArrival(6.0, 9.0)
    assert h.height == pytest.approx(1 / 3)
    assert h.pdf(5.0) == 0.0
    assert h.cdf(9.0) == pytest.approx(1.0)
    assert arrival_from_dict(h.to_dict()) == h


def test_empirical_uniform_arrivals_are_flat():
    x = np.random.default_rng(11).uniform(6.0, 9.0, 10_000)
    h = build_empirical_arrival(x, (6.0, 9.0), bin_width=0.25)
    interior = h.density[1:-1]
    assert np.all(np.abs(interior - 1 / 3) <= 0.1 / 3)


def test_empirical_spike_leaves_far_bins_empty():
    x = np.full(500, 7.1)
    h = build_empirical_arrival(x, (6.0, 9.0), bin_width=0.25)
    far = np.abs(h.times - 7.125) > 0.25 + 1e-12
    assert np.all(h.density[far] == 0.0)
    assert h.pdf(7.125) > 0


@settings(max_examples=50)
@given(st.lists(st.floats(6.0, 9.0), min_size=1, max_size=300), st.floats(0.05, 1.5))
def test_empirical_unit_mass(times, bw):
    h = build_empirical_arrival(times, (6.0, 9.0), bin_width=bw)
    assert np.trapezoid(h.density, h.times) == pytest.approx(1.0, abs=1e-9)
    assert np.all(h.density >= 0)
    assert h.cdf(9.0) == pytest.approx(1.0, abs=1e-9)
    again = build_empirical_arrival(times, (6.0, 9.0), bin_width=bw)
    assert np.array_equal(h.density, again.density)


def test_empirical_needs_arrivals_in_window():
    with pytest.raises(DataError):
        build_empirical_arrival([1.0, 2.0], (6.0, 9.0))


def test_empirical_rejects_bad_mass():
    with pytest.raises(ValueError):
        EmpiricalArrival(np.array([0.0, 1.0]), np.array([2.0, 2.0]))


def test_empirical_sampling_follows_cdf():
    h = EmpiricalArrival(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 0.0]))
    x = h.sample(np.random.default_rng(5), 200_000)
    res = stats.kstest(x, h.cdf)
    assert res.pvalue > 1e-3
    assert h.cdf(1.0) == pytest.approx(0.5)
    assert arrival_from_dict(h.to_dict()).cdf(0.5) == pytest.approx(0.125)
