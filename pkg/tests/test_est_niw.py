import numpy as np
import pytest

from src.core.errors import DimensionMismatch, InsufficientData, InvalidPrior
from src.est.niw import NiwPrior, build_regressors, gibbs_niw
from src.est.posterior import PosteriorDraws
from src.var.params import ReducedParams

B1 = np.array([[0.5, 0.1], [0.0, 0.3]])
B2 = np.array([[0.1, 0.0], [0.05, -0.1]])
SIGMA = np.array([[1.0, 0.3], [0.3, 0.5]])


def simulate_var(rng, b, lags, sigma, T, warmup=100):
    n = b.size
    p = len(lags)
    chol = np.linalg.cholesky(sigma)
    y = np.zeros((T + warmup + p, n))
    for t in range(p, y.shape[0]):
        y[t] = b + sum(lags[j] @ y[t - 1 - j] for j in range(p)) + chol @ rng.standard_normal(n)
    return y[-T:]


def test_regressor_layout():
    data = np.arange(12.0).reshape(6, 2)

    Y, X = build_regressors(data, 2)

    np.testing.assert_array_equal(Y, data[2:])
    np.testing.assert_array_equal(X[0], [1.0, 2.0, 3.0, 0.0, 1.0])
    np.testing.assert_array_equal(X[:, 0], np.ones(4))


def test_regressors_need_more_rows_than_lags():
    with pytest.raises(InsufficientData):
        build_regressors(np.zeros((2, 3)), 2)


def test_default_prior_dimensions():
    prior = NiwPrior.default(3, 2)

    assert prior.k == 21
    assert prior.n == 3
    assert prior.p == 2
    assert prior.iw_dof == 6.0


@pytest.mark.parametrize("dof", [0.5, 2.0, 3.0])
def test_prior_rejects_bad_dof(dof):
    # n = 2: the prior mean of Sigma needs dof > n + 1
    with pytest.raises(InvalidPrior):
        NiwPrior(np.zeros(6), np.eye(6), dof, np.eye(2))


def test_prior_accepts_dof_above_n_plus_one():
    assert NiwPrior(np.zeros(6), np.eye(6), 3.5, np.eye(2)).iw_dof == 3.5


def test_prior_rejects_bad_beta_size():
    with pytest.raises(DimensionMismatch):
        NiwPrior(np.zeros(5), np.eye(5), 5.0, np.eye(2))


def test_gibbs_needs_enough_data():
    with pytest.raises(InsufficientData):
        gibbs_niw(np.zeros((5, 2)), 2, n_draws=5, burn_in=0, seed=0)


def test_gibbs_recovers_dgp():
    rng = np.random.default_rng(0)
    data = simulate_var(rng, np.full(2, 0.01), [B1, B2], SIGMA, 300)

    post = gibbs_niw(data, 2, n_draws=1_000, burn_in=200, seed=1)

    b1 = np.stack([d.B_lags[0] for d in post])
    assert np.all(np.abs(b1.mean(axis=0) - B1) < 3 * b1.std(axis=0))
    sigma = np.stack([d.Sigma for d in post])
    assert np.all(np.abs(sigma.mean(axis=0) - SIGMA) < 3 * sigma.std(axis=0) + 1e-12)


def test_gibbs_split_half_stationarity():
    rng = np.random.default_rng(5)
    data = simulate_var(rng, np.zeros(2), [B1], SIGMA, 300)

    post = gibbs_niw(data, 1, n_draws=2_000, burn_in=200, seed=6)

    beta = np.stack([d.coefficient_matrix().ravel() for d in post])
    first, second = beta[:1_000], beta[1_000:]
    # Batch means over blocks of 50 absorb the chain's autocorrelation
    se = np.sqrt(
        first.reshape(20, 50, -1).mean(axis=1).var(axis=0, ddof=1) / 20
        + second.reshape(20, 50, -1).mean(axis=1).var(axis=0, ddof=1) / 20
    )
    assert np.all(np.abs(first.mean(axis=0) - second.mean(axis=0)) < 4 * se)


def test_dogmatic_prior_pins_coefficients():
    rng = np.random.default_rng(2)
    data = simulate_var(rng, np.zeros(2), [B1], SIGMA, 100)
    k = 2 * 3
    beta0 = np.linspace(-0.5, 0.5, k)
    prior = NiwPrior(beta0, 1e-14 * np.eye(k), 5.0, np.eye(2))

    post = gibbs_niw(data, 1, prior, n_draws=50, burn_in=5, seed=3)

    for draw in post:
        np.testing.assert_allclose(
            draw.coefficient_matrix().ravel(order="F"), beta0, atol=1e-5
        )


def test_gibbs_is_deterministic():
    rng = np.random.default_rng(4)
    data = simulate_var(rng, np.zeros(2), [B1], SIGMA, 80)

    a = gibbs_niw(data, 1, n_draws=20, burn_in=5, seed=11)
    b = gibbs_niw(data, 1, n_draws=20, burn_in=5, seed=11)

    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.coefficient_matrix(), y.coefficient_matrix())
        np.testing.assert_array_equal(x.Sigma, y.Sigma)
    assert a.root_entropy == 11


def test_gibbs_thinning():
    rng = np.random.default_rng(4)
    data = simulate_var(rng, np.zeros(2), [B1], SIGMA, 80)

    post = gibbs_niw(data, 1, n_draws=7, burn_in=3, seed=0, thin=4)

    assert len(post) == 7
    assert post.thin == 4
    assert isinstance(post[0], ReducedParams)


def test_posterior_archive_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    data = simulate_var(rng, np.zeros(2), [B1], SIGMA, 80)
    post = gibbs_niw(data, 1, n_draws=5, burn_in=0, seed=2)

    post.save(tmp_path / "posterior.npz")
    loaded = PosteriorDraws.load(tmp_path / "posterior.npz")

    assert len(loaded) == 5
    assert loaded.kind == "reduced"
    assert loaded.info == {"prior": "niw"}
    np.testing.assert_array_equal(loaded[3].Sigma, post[3].Sigma)
    np.testing.assert_allclose(loaded.mean_reduced().b, post.mean_reduced().b)
