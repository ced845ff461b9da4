import logging

import numpy as np
import pytest

from src.cond import samplers
from src.cond.constraints import (
    ConstraintSet,
    EqualityRows,
    GaussianRows,
    InequalityRows,
)
from src.cond.moments import conditional_moments_linear
from src.cond.samplers import (
    build_structural_scenario,
    draw_conditional_combined,
    draw_conditional_equality,
    draw_conditional_inequality,
    draw_conditional_linear,
    draw_conditional_linear_truncated,
    draw_conditional_mixed,
    draw_unconditional,
    sample_truncated,
    shocks_to_observable_restrictions,
    structural_shocks,
    unconditional_gaussian,
)
from src.core.errors import (
    OverlapEqualityInequality,
    OverlappingConstraints,
    RankDeficientStack,
    RankDeficientW,
    TiltingDiverged,
    ValidationError,
)
from src.linalg.selection import SelectionMatrix
from src.tmvn import TruncatedGaussianSpec
from src.var.params import SvarParams
from src.var.system import build_forecast_system


def random_system(seed, n=3, p=1, h=3):
    rng = np.random.default_rng(seed)
    a0 = np.eye(n) + 0.3 * rng.standard_normal((n, n))
    lags = 0.4 / p * rng.standard_normal((p, n, n)) / np.sqrt(n)
    s = SvarParams(a0, rng.standard_normal(n), lags)
    return build_forecast_system(s, rng.standard_normal((p, n)), h)


def dense_moments(f):
    H = f.dense_H()
    return np.linalg.solve(H, f.c), np.linalg.inv(H.T @ H)


def assert_mean_close(draws, mean, cov, k=5.0):
    se = np.sqrt(np.diag(cov) / draws.shape[0])
    assert np.all(np.abs(draws.mean(axis=0) - mean) <= k * se + 1e-12)


def assert_cov_close(draws, cov, k=5.0):
    m = draws.shape[0]
    d = np.sqrt(np.diag(cov))
    se = np.sqrt((np.outer(d, d) ** 2 + cov**2) / m)
    assert np.all(np.abs(np.cov(draws, rowvar=False) - cov) <= k * se + 1e-12)


def select(indices, nh):
    return SelectionMatrix.from_indices(indices, nh)


def test_unconditional_white_noise_is_standard_normal():
    n, p, h = 2, 1, 3
    s = SvarParams(np.eye(n), np.zeros(n), np.zeros((p, n, n)))
    f = build_forecast_system(s, np.ones((p, n)), h)

    out = draw_unconditional(f, 20_000, seed=0)

    assert_mean_close(out.draws, np.zeros(f.dim), np.eye(f.dim))
    assert_cov_close(out.draws, np.eye(f.dim))


def test_unconditional_matches_dense_covariance():
    f = random_system(1, n=4, p=2, h=6)
    mean, cov = dense_moments(f)

    out = draw_unconditional(f, 50_000, seed=1)

    assert out.draws.shape == (50_000, 24)
    assert_mean_close(out.draws, mean, cov)
    assert_cov_close(out.draws, cov)


def test_empty_equality_is_the_unconditional_stream():
    f = random_system(2)

    a = draw_conditional_equality(f, SelectionMatrix(0, f.dim, ()), [], 100, seed=5)
    b = draw_unconditional(f, 100, seed=5)

    np.testing.assert_array_equal(a.draws, b.draws)


def test_equality_matches_dense_conditioning():
    f = random_system(3, n=2, p=1, h=2)
    mean, cov = dense_moments(f)
    o, u = np.array([0]), np.array([1, 2, 3])
    value = np.array([1.5])

    cond_mean = mean[u] + cov[np.ix_(u, o)] @ np.linalg.solve(cov[np.ix_(o, o)], value - mean[o])
    cond_cov = cov[np.ix_(u, u)] - cov[np.ix_(u, o)] @ np.linalg.solve(
        cov[np.ix_(o, o)], cov[np.ix_(o, u)]
    )
    law = unconditional_gaussian(f).condition_on(o, value)
    out = draw_conditional_equality(f, select(o, f.dim), value, 40_000, seed=3)

    np.testing.assert_allclose(law.mean, cond_mean, atol=1e-8)
    np.testing.assert_array_equal(out.draws[:, 0], 1.5)
    assert_mean_close(out.draws[:, u], cond_mean, cond_cov)
    assert_cov_close(out.draws[:, u], cond_cov)


def test_equality_agrees_with_general_linear_path():
    f = random_system(4)
    sel = select([1, 5, 7], f.dim)
    values = np.array([0.2, -0.4, 1.0])

    m = conditional_moments_linear(f, sel.to_dense(), values, np.zeros((3, 3)))
    law = unconditional_gaussian(f).condition_on(sel.indices, values)
    free = np.setdiff1d(np.arange(f.dim), sel.indices)
    linear = draw_conditional_linear(f, m, 2_000, seed=4)

    np.testing.assert_allclose(m.mu_y[free], law.mean, atol=1e-8)
    np.testing.assert_allclose(m.mu_y[sel.indices], values, atol=1e-8)
    np.testing.assert_allclose(linear.draws[:, sel.indices], np.tile(values, (2_000, 1)), atol=1e-8)


def test_fully_fixed_equality():
    f = random_system(5, n=1, p=1, h=2)

    out = draw_conditional_equality(f, select([1, 0], f.dim), [3.0, 4.0], 5, seed=0)

    np.testing.assert_array_equal(out.draws, np.tile([4.0, 3.0], (5, 1)))


def test_vacuous_inequality_is_unconditional():
    f = random_system(6)
    mean, cov = dense_moments(f)

    out = draw_conditional_inequality(
        f, select([0, 4], f.dim), [-np.inf] * 2, [np.inf] * 2, 30_000, seed=6
    )

    assert_mean_close(out.draws, mean, cov)


def test_inequality_matches_rejection_oracle():
    f = random_system(7)
    mean, _ = dense_moments(f)
    k = 4
    lo, hi = mean[k] + 0.5, mean[k] + 1.5

    out = draw_conditional_inequality(f, select([k], f.dim), [lo], [hi], 20_000, seed=7)
    pool = draw_unconditional(f, 400_000, seed=8).draws
    oracle = pool[(pool[:, k] > lo) & (pool[:, k] < hi)]

    assert np.all((out.draws[:, k] > lo) & (out.draws[:, k] < hi))
    se = np.sqrt(oracle.var(axis=0) * (1 / out.n_draws + 1 / oracle.shape[0]))
    assert np.all(np.abs(out.draws.mean(axis=0) - oracle.mean(axis=0)) <= 5 * se)


@pytest.mark.parametrize("method", ["tilted", "gibbs", "naive"])
def test_inequality_support_for_every_method(method):
    f = random_system(8)
    lower = [-0.5, 0.0]
    upper = [0.5, np.inf]

    out = draw_conditional_inequality(f, select([2, 6], f.dim), lower, upper, 500, 8, method)

    y = out.draws[:, [2, 6]]
    assert np.all((y > lower) & (y < upper))


def test_mixed_holds_both_kinds_of_rows():
    f = random_system(9)
    eq = select([0, 3], f.dim)
    ineq = select([4], f.dim)

    out = draw_conditional_mixed(f, eq, [1.0, -1.0], ineq, [0.0], [0.3], 1_000, seed=9)

    cs = ConstraintSet(EqualityRows(eq, [1.0, -1.0]), inequality=InequalityRows(ineq, [0.0], [0.3]))
    assert out.count_violations(cs) == 0
    np.testing.assert_array_equal(out.draws[:, 0], 1.0)


def test_mixed_matches_inequality_on_conditioned_law():
    f = random_system(10)
    eq, ineq = select([1], f.dim), select([5], f.dim)

    out = draw_conditional_mixed(f, eq, [0.5], ineq, [-np.inf], [np.inf], 30_000, seed=10)
    exact = draw_conditional_equality(f, eq, [0.5], 30_000, seed=11)

    se = np.sqrt(exact.draws.var(axis=0) * 2 / 30_000) + 1e-12
    assert np.all(np.abs(out.draws.mean(axis=0) - exact.draws.mean(axis=0)) <= 5 * se)


def test_mixed_rejects_overlap():
    f = random_system(11)

    with pytest.raises(OverlapEqualityInequality):
        draw_conditional_mixed(
            f, select([2], f.dim), [0.0], select([2], f.dim), [-1.0], [1.0], 10, seed=0
        )


def test_combined_degenerate_parts():
    f = random_system(12)
    rows = GaussianRows(np.eye(f.dim)[[0, 1]], [0.3, -0.2])
    ineq = InequalityRows(select([7], f.dim), [-1.0], [1.0])

    only_gaussian = draw_conditional_combined(f, rows, None, 50, seed=1)
    linear = draw_conditional_linear(f, conditional_moments_linear(f, rows.R, rows.r, None), 50, 1)
    only_ineq = draw_conditional_combined(f, None, ineq, 50, seed=2)
    plain = draw_conditional_inequality(f, ineq.selection, ineq.lower, ineq.upper, 50, seed=2)

    np.testing.assert_array_equal(only_gaussian.draws, linear.draws)
    np.testing.assert_array_equal(only_ineq.draws, plain.draws)


def test_combined_matches_rejection_oracle():
    f = random_system(13)
    R = np.eye(f.dim)[[0]]
    rows = GaussianRows(R, [0.8])
    ineq = InequalityRows(select([5], f.dim), [0.0], [np.inf])

    m = conditional_moments_linear(f, R, [0.8], None)
    out = draw_conditional_combined(f, rows, ineq, 20_000, seed=13)
    pool = draw_conditional_linear(f, m, 200_000, seed=14).draws
    oracle = pool[pool[:, 5] > 0.0]

    assert np.all(out.draws[:, 5] > 0.0)
    se = np.sqrt(oracle.var(axis=0) * (1 / 20_000 + 1 / oracle.shape[0]))
    assert np.all(np.abs(out.draws.mean(axis=0) - oracle.mean(axis=0)) <= 5 * se)


def test_combined_rejects_overlap_and_explicit_omega():
    f = random_system(14)
    ineq = InequalityRows(select([2], f.dim), [-1.0], [1.0])

    with pytest.raises(OverlappingConstraints):
        draw_conditional_combined(f, GaussianRows(np.eye(f.dim)[[2]], [0.0]), ineq, 10, seed=0)
    with pytest.raises(ValidationError):
        draw_conditional_combined(
            f, GaussianRows(np.eye(f.dim)[[0]], [0.0], [[1.0]]), ineq, 10, seed=0
        )


def test_identity_shock_restriction_is_unconditional():
    f = random_system(15)
    mean, cov = dense_moments(f)

    R, r, omega = shocks_to_observable_restrictions(
        f, np.eye(f.dim), np.zeros(f.dim), np.eye(f.dim)
    )
    m = conditional_moments_linear(f, R, r, omega)

    np.testing.assert_allclose(m.mu_y, mean, atol=1e-8)
    np.testing.assert_allclose(m.covariance(f), cov, atol=1e-8)


def test_pinned_shock_is_zero_on_every_draw():
    f = random_system(16)
    W = select([4], f.dim)

    R, r, omega = shocks_to_observable_restrictions(f, W, [0.0], [[0.0]])
    out = draw_conditional_linear(f, conditional_moments_linear(f, R, r, omega), 500, seed=16)

    np.testing.assert_allclose(structural_shocks(f, out.draws)[:, 4], 0.0, atol=1e-8)


def test_random_shock_restriction_holds_in_mean():
    f = random_system(17)
    rng = np.random.default_rng(17)
    W = rng.standard_normal((2, f.dim))
    w = rng.standard_normal(2)

    R, r, omega = shocks_to_observable_restrictions(f, W, w, np.eye(2))
    m = conditional_moments_linear(f, R, r, omega)

    np.testing.assert_allclose(R @ m.mu_y, r, atol=1e-8)
    np.testing.assert_allclose(W @ m.shock_mean_shift, w, atol=1e-8)


def test_rank_deficient_shock_rows():
    f = random_system(18)
    row = np.random.default_rng(18).standard_normal(f.dim)

    with pytest.raises(RankDeficientW):
        shocks_to_observable_restrictions(f, np.vstack([row, row]), [0.0, 0.0], np.eye(2))


def test_scenario_without_nondriving_shocks_is_plain_restriction():
    f = random_system(19)
    R = np.eye(f.dim)[[1, 2]]

    Rs, rs, omega = build_structural_scenario(
        f, R, [0.1, 0.2], np.zeros((2, 2)), SelectionMatrix(0, f.dim, ())
    )

    np.testing.assert_array_equal(Rs, R)
    np.testing.assert_array_equal(rs, [0.1, 0.2])
    np.testing.assert_array_equal(omega, np.zeros((2, 2)))


def test_all_shocks_nondriving_is_unconditional():
    f = random_system(20)
    mean, cov = dense_moments(f)

    R, r, omega = build_structural_scenario(
        f, None, None, None, SelectionMatrix.from_indices(np.arange(f.dim), f.dim)
    )
    m = conditional_moments_linear(f, R, r, omega)

    np.testing.assert_allclose(m.mu_y, mean, atol=1e-8)
    np.testing.assert_allclose(m.covariance(f), cov, atol=1e-8)


def test_nondriving_shock_keeps_its_law():
    f = random_system(21, n=2, p=1, h=2)
    nondriving = select([1, 3], f.dim)

    R, r, omega = build_structural_scenario(
        f, np.eye(f.dim)[[0]], [2.0], np.zeros((1, 1)), nondriving
    )
    out = draw_conditional_linear(f, conditional_moments_linear(f, R, r, omega), 40_000, seed=21)
    shocks = structural_shocks(f, out.draws)[:, [1, 3]]

    np.testing.assert_allclose(out.draws[:, 0], 2.0, atol=1e-8)
    assert np.all(np.abs(shocks.mean(axis=0)) < 5 * np.sqrt(1 / 40_000))
    assert np.all(np.abs(shocks.var(axis=0) - 1.0) < 5 * np.sqrt(2 / 40_000))


def test_scenario_stack_must_have_full_rank():
    f = random_system(22, n=2, p=1, h=2)

    with pytest.raises(RankDeficientStack):
        build_structural_scenario(
            f, np.eye(f.dim)[[0]], [0.0], None, SelectionMatrix.from_indices(range(4), 4)
        )


def test_linear_truncated_respects_both_blocks():
    f = random_system(23)
    W = select([0], f.dim)
    R, r, omega = shocks_to_observable_restrictions(f, W, [0.0], [[0.0]])
    ineq = InequalityRows(select([6], f.dim), [0.0], [0.5])

    out = draw_conditional_linear_truncated(f, R, r, omega, ineq, 1_000, seed=23)

    assert np.all((out.draws[:, 6] > 0.0) & (out.draws[:, 6] < 0.5))
    np.testing.assert_allclose(structural_shocks(f, out.draws)[:, 0], 0.0, atol=1e-8)


def test_linear_truncated_without_inequality_is_linear():
    f = random_system(24)
    R = np.eye(f.dim)[[2]]

    a = draw_conditional_linear_truncated(f, R, [1.0], [[0.5]], None, 30, seed=3)
    b = draw_conditional_linear(f, conditional_moments_linear(f, R, [1.0], [[0.5]]), 30, 3)

    np.testing.assert_array_equal(a.draws, b.draws)


def test_linear_truncated_rejects_pinned_bounded_coordinate():
    f = random_system(25)
    ineq = InequalityRows(select([3], f.dim), [-1.0], [1.0])

    with pytest.raises(OverlappingConstraints):
        draw_conditional_linear_truncated(
            f, np.eye(f.dim)[[3]], [0.0], np.zeros((1, 1)), ineq, 10, seed=0
        )


def test_unconditional_shocks_are_standard():
    f = random_system(26)

    shocks = structural_shocks(f, draw_unconditional(f, 20_000, seed=26).draws)

    assert_mean_close(shocks, np.zeros(f.dim), np.eye(f.dim))


def test_seed_determinism():
    f = random_system(27)
    sel = select([4], f.dim)

    for draw in (
        lambda s: draw_unconditional(f, 20, s),
        lambda s: draw_conditional_equality(f, sel, [0.0], 20, s),
        lambda s: draw_conditional_inequality(f, sel, [0.0], [1.0], 20, s),
    ):
        np.testing.assert_array_equal(draw(42).draws, draw(42).draws)
        assert draw(42).seed_entropy == 42


def test_tilting_failure_falls_back_to_gibbs(monkeypatch, caplog):
    def diverge(*args, **kwargs):
        raise TiltingDiverged("forced")

    monkeypatch.setattr(samplers, "sample_tilted", diverge)
    spec = TruncatedGaussianSpec.from_covariance([0.0, 0.0], np.eye(2), [0.0, -1.0], [1.0, 1.0])

    with caplog.at_level(logging.WARNING, logger="condcast.cond.samplers"):
        draws = sample_truncated(spec, 200, np.random.default_rng(0))

    assert draws.shape == (200, 2)
    assert np.all(spec.contains(draws))
    assert "falling back to Gibbs" in caplog.text


def test_unknown_truncation_method():
    spec = TruncatedGaussianSpec.from_covariance([0.0], [[1.0]], [0.0], [1.0])

    with pytest.raises(ValidationError):
        sample_truncated(spec, 1, np.random.default_rng(0), method="slice")
