from __future__ import annotations

import logging

import numpy as np

from src.core.errors import BudgetExhausted, ValidationError
from src.core.rng import SeedLike, as_generator
from src.tmvn.spec import TmvnResult, TruncatedGaussianSpec

logger = logging.getLogger("condcast.tmvn.naive")

DEFAULT_MAX_PROPOSALS = 1_000_000
DEFAULT_BATCH = 10_000


def sample_naive(
    spec: TruncatedGaussianSpec,
    n_target: int,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
    seed: SeedLike = None,
    batch_size: int = DEFAULT_BATCH,
) -> TmvnResult:
    """
    Accept-reject with the untruncated Gaussian as proposal.

    Raises:
        BudgetExhausted: fewer than ``n_target`` acceptances within ``max_proposals``
    """
    if n_target < 0 or max_proposals < 1 or batch_size < 1:
        raise ValidationError("n_target >= 0, max_proposals >= 1 and batch_size >= 1 are required")
    rng = as_generator(seed)
    d = spec.dim
    if spec.is_precision:
        chol = np.linalg.cholesky(spec.covariance)
    else:
        chol = spec.cholesky

    kept: list[np.ndarray] = []
    n_accepted = 0
    n_proposals = 0
    while n_accepted < n_target:
        if n_proposals >= max_proposals:
            raise BudgetExhausted(
                f"naive sampler accepted {n_accepted} of {n_target} draws in {n_proposals} proposals"
            )
        batch = min(batch_size, max_proposals - n_proposals)
        x = spec.mean + rng.standard_normal((batch, d)) @ chol.T
        inside = np.all((x > spec.lower) & (x < spec.upper), axis=1)
        kept.append(x[inside])
        n_accepted += int(inside.sum())
        n_proposals += batch

    draws = np.concatenate(kept, axis=0)[:n_target] if kept else np.empty((0, d))
    rate = n_accepted / n_proposals if n_proposals else 1.0
    logger.debug("Naive sampler: d=%d, acceptance rate %.4f", d, rate)
    return TmvnResult(draws=draws, acceptance_rate=rate, n_proposals=n_proposals)
