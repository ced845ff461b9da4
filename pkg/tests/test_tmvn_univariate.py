import numpy as np
import pytest
from scipy import stats

from src.tmvn.univariate import (
    ln_normal_prob,
    log_upper_tail,
    trandn,
    truncated_normal_inverse_cdf,
)


def test_ln_normal_prob_matches_scipy_in_the_body():
    a = np.array([-1.0, -3.0, 0.2, -np.inf])
    b = np.array([1.0, -2.0, 0.9, 0.0])

    expected = np.log(stats.norm.cdf(b) - stats.norm.cdf(a))

    np.testing.assert_allclose(ln_normal_prob(a, b), expected, rtol=1e-10)


def test_ln_normal_prob_far_tails():
    assert ln_normal_prob(40.0, np.inf)[()] == pytest.approx(stats.norm.logsf(40.0), rel=1e-10)
    assert ln_normal_prob(-np.inf, -40.0)[()] == pytest.approx(stats.norm.logcdf(-40.0), rel=1e-10)


def test_ln_normal_prob_whole_line_is_zero():
    assert ln_normal_prob(-np.inf, np.inf)[()] == 0.0


def test_log_upper_tail():
    x = np.array([0.0, 1.5, 10.0])

    np.testing.assert_allclose(log_upper_tail(x), stats.norm.logsf(x), rtol=1e-12)


def test_inverse_cdf_matches_truncnorm():
    l = np.array([-1.0, 0.5, -4.0, 2.0])
    u = np.array([1.0, 3.0, -3.5, np.inf])
    q = np.array([0.3, 0.7, 0.5, 0.9])

    x = truncated_normal_inverse_cdf(l, u, q)

    np.testing.assert_allclose(x, stats.truncnorm.ppf(q, l, u), atol=1e-8)


def test_inverse_cdf_symmetric_median():
    assert truncated_normal_inverse_cdf(-1.0, 1.0, 0.5)[0] == pytest.approx(0.0, abs=1e-12)


def test_inverse_cdf_underflowing_tail_uses_sampler():
    rng = np.random.default_rng(0)

    x = truncated_normal_inverse_cdf(np.full(100, 45.0), np.full(100, np.inf), rng.random(100), rng)

    assert np.all(x > 45.0)
    assert np.all(x < 46.0)


def test_trandn_respects_bounds_everywhere():
    rng = np.random.default_rng(1)
    l = np.array([-np.inf, 0.7, -3.0, -1e-3, 8.0, -np.inf] * 500)
    u = np.array([np.inf, np.inf, -0.7, 1e-3, 8.5, -9.0] * 500)

    x = trandn(l, u, rng)

    assert np.all((x > l) & (x < u))


def test_trandn_right_tail_mean():
    rng = np.random.default_rng(2)
    n = 50_000

    x = trandn(np.full(n, 3.0), np.full(n, np.inf), rng)

    mean, var = stats.truncnorm.stats(3.0, np.inf, moments="mv")
    assert abs(x.mean() - mean) < 3 * np.sqrt(var / n)
