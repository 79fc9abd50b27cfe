import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from agehawkes.kernels import (
    GENERATION_INTERVAL,
    REPORTING_DELAY,
    KernelSpec,
    UnsampleableRegionError,
    density,
    interval_mass,
    masses_over_boundaries,
    sample_truncated,
)

KERNELS = [GENERATION_INTERVAL, REPORTING_DELAY]


def quad_mass(k, lo, hi):
    return integrate.quad(lambda s: density(k, s), lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)[0]


def test_moment_matching_gi():
    assert GENERATION_INTERVAL.shape == pytest.approx(13.8549, abs=1e-4)
    assert GENERATION_INTERVAL.rate == pytest.approx(2.06790, abs=1e-5)


def test_shape_rate_agree_with_scipy_moments():
    for k in KERNELS:
        law = stats.gamma(k.shape, scale=1 / k.rate)
        assert law.mean() == pytest.approx(k.mean)
        assert law.std() == pytest.approx(k.sd)


def test_density_support_and_exponential():
    assert density(GENERATION_INTERVAL, -1.0) == 0.0
    assert density(KernelSpec(1.0, 1.0), 0.0) == pytest.approx(1.0)


@pytest.mark.parametrize("k", KERNELS)
def test_density_matches_scipy(k):
    s = np.linspace(0.01, 40, 50)
    np.testing.assert_allclose(density(k, s), stats.gamma.pdf(s, k.shape, scale=1 / k.rate), rtol=1e-10)


@pytest.mark.parametrize("k", KERNELS)
def test_density_integrates_to_one(k):
    assert 1 - 1e-9 <= quad_mass(k, 0, 200) <= 1 + 1e-12


def test_interval_mass_edge_cases():
    k = GENERATION_INTERVAL
    assert interval_mass(k, 0, np.inf) == pytest.approx(1.0)
    assert interval_mass(k, 3.0, 3.0) == 0.0
    assert interval_mass(k, -5.0, -1.0) == 0.0
    with pytest.raises(ValueError):
        interval_mass(k, 2.0, 1.0)


def test_interval_mass_gi_21_days():
    val = interval_mass(GENERATION_INTERVAL, 0, 21)
    assert abs(val - quad_mass(GENERATION_INTERVAL, 0, 21)) < 1e-9
    assert val > 0.999


@pytest.mark.parametrize("k", KERNELS)
@given(st.floats(0, 60), st.floats(0, 60))
def test_interval_mass_monotone_in_upper_limit(k, x, y):
    lo, hi = sorted((x, y))
    assert interval_mass(k, 0, lo) <= interval_mass(k, 0, hi) + 1e-15


def test_masses_over_boundaries_sum():
    times = np.array([0.0, 3.0, 10.5])
    b = np.arange(0.0, 120.0, 7.0)
    M = masses_over_boundaries(REPORTING_DELAY, times, b)
    for i, t in enumerate(times):
        expect = [interval_mass(REPORTING_DELAY, max(b[j], t) - t, b[j + 1] - t) if b[j + 1] > t else 0.0
                  for j in range(len(b) - 1)]
        np.testing.assert_allclose(M[i], expect, atol=1e-15)


class TestTruncatedSampler:
    def test_unsampleable(self, rng):
        with pytest.raises(UnsampleableRegionError):
            sample_truncated(GENERATION_INTERVAL, -3.0, 0.0, rng)
        with pytest.raises(UnsampleableRegionError):
            sample_truncated(GENERATION_INTERVAL, 4.0, 2.0, rng)

    @given(st.floats(0, 30), st.floats(0.01, 20), st.integers(0, 2**32 - 1))
    def test_draws_inside_window(self, lo, width, seed):
        k = GENERATION_INTERVAL
        hi = lo + width
        if interval_mass(k, lo, hi) <= 0:
            return
        x = sample_truncated(k, lo, hi, np.random.default_rng(seed), size=50)
        assert np.all((x >= lo) & (x < hi))

    def test_untruncated_mean(self, rng):
        k = GENERATION_INTERVAL
        x = sample_truncated(k, 0.0, np.inf, rng, size=10**6)
        assert abs(x.mean() - k.mean) < 3 * k.sd / np.sqrt(len(x))

    @pytest.mark.parametrize("lo,hi", [(0.0, 7.0), (5.0, 9.0), (12.0, 19.0), (2.0, 2.5)])
    def test_ks_against_truncated_cdf(self, rng, lo, hi):
        k = GENERATION_INTERVAL
        x = sample_truncated(k, lo, hi, rng, size=10**5)
        F = lambda s: (k.cdf(s) - k.cdf(lo)) / (k.cdf(hi) - k.cdf(lo))
        assert stats.kstest(x, F).pvalue > 0.01
