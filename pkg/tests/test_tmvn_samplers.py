import numpy as np
import pytest

from src.core.errors import BudgetExhausted, InvalidBounds, NotPositiveDefinite, RegionTooImprobable
from src.tmvn import (
    TiltedSampler,
    TruncatedGaussianSpec,
    sample_gibbs,
    sample_naive,
    sample_tilted,
)

HALF_NORMAL_MEAN = np.sqrt(2.0 / np.pi)


def correlated_cov(d, rho=0.5):
    return rho * np.ones((d, d)) + (1.0 - rho) * np.eye(d)


def assert_means_agree(a, b, k=3.0):
    se = np.sqrt(a.var(axis=0) / a.shape[0] + b.var(axis=0) / b.shape[0])
    assert np.all(np.abs(a.mean(axis=0) - b.mean(axis=0)) < k * se)


def test_half_space_mean():
    spec = TruncatedGaussianSpec.from_covariance([0.0], [[1.0]], [0.0], [np.inf])
    n = 20_000

    result = sample_tilted(spec, n, seed=0)

    se = np.sqrt((1.0 - 2.0 / np.pi) / n)
    assert abs(result.draws.mean() - HALF_NORMAL_MEAN) < 3 * se
    assert np.all(result.draws > 0.0)


def test_untruncated_draws_are_gaussian():
    cov = correlated_cov(3)
    spec = TruncatedGaussianSpec.from_covariance([1.0, -1.0, 0.5], cov, -np.inf, np.inf)
    n = 20_000

    result = sample_tilted(spec, n, seed=1)

    assert result.acceptance_rate == 1.0
    se = np.sqrt(np.diag(cov) / n)
    assert np.all(np.abs(result.draws.mean(axis=0) - spec.mean) < 3 * se)
    np.testing.assert_allclose(np.cov(result.draws.T), cov, atol=0.05)


def test_tilted_matches_naive_on_correlated_box():
    spec = TruncatedGaussianSpec.from_covariance(
        [0.2, 0.0, -0.3], correlated_cov(3, 0.6), -1.0, 1.0
    )

    tilted = sample_tilted(spec, 20_000, seed=2)
    naive = sample_naive(spec, 20_000, seed=3)

    assert_means_agree(tilted.draws, naive.draws)
    np.testing.assert_allclose(np.cov(tilted.draws.T), np.cov(naive.draws.T), atol=0.02)


def test_tilted_draws_stay_in_support():
    spec = TruncatedGaussianSpec.from_covariance(
        np.zeros(4), correlated_cov(4, 0.8), [-0.5, 0.0, 1.0, -np.inf], [0.5, np.inf, 1.5, -1.0]
    )

    result = sample_tilted(spec, 5_000, seed=4)

    assert np.all(spec.contains(result.draws, slack=0.0))
    assert np.all((result.draws > spec.lower) & (result.draws < spec.upper))


def test_tilted_beats_naive_acceptance_on_unlikely_box():
    spec = TruncatedGaussianSpec.from_covariance(np.zeros(2), np.eye(2), 1.0, 3.0)

    tilted = sample_tilted(spec, 5_000, seed=5)
    naive = sample_naive(spec, 500, seed=6)

    assert tilted.acceptance_rate >= naive.acceptance_rate


def test_precision_parameterisation():
    cov = correlated_cov(2, 0.3)
    spec = TruncatedGaussianSpec.from_precision(np.zeros(2), np.linalg.inv(cov), 0.0, np.inf)

    np.testing.assert_allclose(spec.covariance, cov, atol=1e-12)
    assert np.all(sample_tilted(spec, 1_000, seed=7).draws > 0.0)


def test_tilted_is_deterministic():
    spec = TruncatedGaussianSpec.from_covariance(np.zeros(3), correlated_cov(3), -0.5, 2.0)

    a = sample_tilted(spec, 500, seed=11).draws
    b = sample_tilted(spec, 500, seed=11).draws

    np.testing.assert_array_equal(a, b)


def test_setup_is_reusable():
    spec = TruncatedGaussianSpec.from_covariance(np.zeros(2), correlated_cov(2), 0.0, 1.0)
    sampler = TiltedSampler(spec)

    first = sampler.sample(200, seed=1).draws
    second = sampler.sample(200, seed=1).draws

    np.testing.assert_array_equal(first, second)
    assert sampler.log_probability_upper_bound <= 0.0


def test_region_too_improbable():
    spec = TruncatedGaussianSpec.from_covariance([0.0], [[1.0]], [40.0], [np.inf])

    with pytest.raises(RegionTooImprobable):
        sample_tilted(spec, 10, seed=0)


def test_invalid_bounds_rejected():
    with pytest.raises(InvalidBounds):
        TruncatedGaussianSpec.from_covariance([0.0, 0.0], np.eye(2), [0.0, 1.0], [1.0, 1.0])


def test_indefinite_matrix_rejected():
    with pytest.raises(NotPositiveDefinite):
        TruncatedGaussianSpec.from_covariance([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]], -1.0, 1.0)


def test_gibbs_symmetric_box_mean():
    spec = TruncatedGaussianSpec.from_covariance([1.0, 2.0], correlated_cov(2, 0.4), [0.0, 1.0], [2.0, 3.0])

    result = sample_gibbs(spec, 20_000, burn_in=200, seed=8)

    np.testing.assert_allclose(result.draws.mean(axis=0), spec.mean, atol=0.03)


def test_gibbs_agrees_with_tilted():
    spec = TruncatedGaussianSpec.from_covariance(
        [0.0, 0.5, -0.5, 0.0], correlated_cov(4, 0.5), [-1.0, 0.0, -np.inf, -0.5], [1.0, np.inf, 0.0, 2.0]
    )

    gibbs = sample_gibbs(spec, 20_000, burn_in=500, seed=9)
    tilted = sample_tilted(spec, 20_000, seed=10)

    np.testing.assert_allclose(gibbs.draws.mean(axis=0), tilted.draws.mean(axis=0), atol=0.04)


def test_gibbs_degenerate_box():
    spec = TruncatedGaussianSpec.from_covariance(
        np.zeros(2), correlated_cov(2), [0.3, -1.0], [0.3 + 1e-6, 1.0]
    )

    result = sample_gibbs(spec, 2_000, burn_in=50, seed=12)

    assert np.all((result.draws > spec.lower) & (result.draws < spec.upper))


def test_gibbs_thinning_shape():
    spec = TruncatedGaussianSpec.from_covariance(np.zeros(2), np.eye(2), -1.0, 1.0)

    result = sample_gibbs(spec, 100, burn_in=10, seed=0, thin=3)

    assert result.draws.shape == (100, 2)
    assert result.n_proposals == 310


def test_naive_full_space_accepts_everything():
    spec = TruncatedGaussianSpec.from_covariance(np.zeros(2), np.eye(2), -np.inf, np.inf)

    result = sample_naive(spec, 1_000, seed=0)

    assert result.acceptance_rate == 1.0
    assert result.draws.shape == (1_000, 2)


def test_naive_half_space_rate():
    spec = TruncatedGaussianSpec.from_covariance([0.0], [[1.0]], [0.0], [np.inf])

    result = sample_naive(spec, 20_000, seed=1)

    se = np.sqrt(0.25 / result.n_proposals)
    assert abs(result.acceptance_rate - 0.5) < 3 * se


def test_naive_budget_exhausted():
    spec = TruncatedGaussianSpec.from_covariance([0.0], [[1.0]], [4.0], [np.inf])

    with pytest.raises(BudgetExhausted):
        sample_naive(spec, 100, max_proposals=1_000, seed=0)
