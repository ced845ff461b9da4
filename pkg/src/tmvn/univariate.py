"""Univariate standard normal truncated to ``(l, u)``: log-probabilities and generators."""

from __future__ import annotations

import numpy as np
from scipy import special

from src.tmvn.spec import move_inside

# Beyond this lower bound the Rayleigh tail sampler is used
TAIL_THRESHOLD = 0.66
# Interval width below which the inverse transform is preferred over rejection
INVERSE_WIDTH = 2.0

_SQRT2 = np.sqrt(2.0)


def log_upper_tail(x: np.ndarray) -> np.ndarray:
    """``ln(1 - Phi(x))`` through the scaled complementary error function."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return -0.5 * x**2 - np.log(2.0) + np.log(special.erfcx(x / _SQRT2))


def ln_normal_prob(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``ln P(a < Z < b)`` for ``Z ~ N(0, 1)``, accurate in both tails."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = np.broadcast_arrays(a, b)
    p = np.zeros(a.shape)

    upper = a > 0
    if np.any(upper):
        pa = log_upper_tail(a[upper])
        pb = log_upper_tail(b[upper])
        p[upper] = pa + np.log1p(-np.exp(pb - pa))

    lower = b < 0
    if np.any(lower):
        pa = log_upper_tail(-a[lower])
        pb = log_upper_tail(-b[lower])
        p[lower] = pb + np.log1p(-np.exp(pa - pb))

    mid = ~(upper | lower)
    if np.any(mid):
        pa = special.erfc(-a[mid] / _SQRT2) / 2
        pb = special.erfc(b[mid] / _SQRT2) / 2
        p[mid] = np.log1p(-pa - pb)
    return p


def _ntail(l: np.ndarray, u: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # Rayleigh proposal with rejection, valid for l > 0
    c = l**2 / 2
    f = np.expm1(c - u**2 / 2)
    x = c - np.log1p(rng.random(l.size) * f)
    reject = np.flatnonzero(rng.random(l.size) ** 2 * x > c)
    while reject.size:
        cy = c[reject]
        y = cy - np.log1p(rng.random(reject.size) * f[reject])
        ok = rng.random(reject.size) ** 2 * y < cy
        x[reject[ok]] = y[ok]
        reject = reject[~ok]
    return np.sqrt(2 * x)


def _trnd(l: np.ndarray, u: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal(l.size)
    reject = np.flatnonzero((x < l) | (x > u))
    while reject.size:
        y = rng.standard_normal(reject.size)
        ok = (y > l[reject]) & (y < u[reject])
        x[reject[ok]] = y[ok]
        reject = reject[~ok]
    return x


def _inverse_transform(l: np.ndarray, u: np.ndarray, q: np.ndarray) -> np.ndarray:
    pl = special.erfc(l / _SQRT2) / 2
    pu = special.erfc(u / _SQRT2) / 2
    return _SQRT2 * special.erfcinv(2 * (pl - (pl - pu) * q))


def _tn(l: np.ndarray, u: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    x = np.empty(l.size)
    wide = np.abs(u - l) > INVERSE_WIDTH
    if np.any(wide):
        x[wide] = _trnd(l[wide], u[wide], rng)
    narrow = ~wide
    if np.any(narrow):
        x[narrow] = _inverse_transform(l[narrow], u[narrow], rng.random(int(narrow.sum())))
    return x


def trandn(l: np.ndarray, u: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """
    Draw ``Z ~ N(0, 1)`` conditioned on ``l < Z < u``, elementwise.

    Args:
        l: Lower bounds, may be ``-inf``
        u: Upper bounds, may be ``+inf``
        rng: Random generator
    """
    l = np.atleast_1d(np.asarray(l, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    x = np.empty(l.size)

    right = l > TAIL_THRESHOLD
    if np.any(right):
        x[right] = _ntail(l[right], u[right], rng)
    left = u < -TAIL_THRESHOLD
    if np.any(left):
        x[left] = -_ntail(-u[left], -l[left], rng)
    body = ~(right | left)
    if np.any(body):
        x[body] = _tn(l[body], u[body], rng)
    return move_inside(x, l, u)


def truncated_normal_inverse_cdf(
    l: np.ndarray, u: np.ndarray, q: np.ndarray, rng: np.random.Generator | None = None
) -> np.ndarray:
    """
    Quantile ``q`` of ``N(0, 1)`` truncated to ``(l, u)``, in survival form.

    Intervals in the left tail are mirrored to the right. When both tail masses
    underflow the Rayleigh sampler of ``trandn`` is used instead (requires ``rng``).
    """
    l, u, q = np.broadcast_arrays(
        np.atleast_1d(np.asarray(l, dtype=float)),
        np.atleast_1d(np.asarray(u, dtype=float)),
        np.atleast_1d(np.asarray(q, dtype=float)),
    )
    flip = (l + u) < 0
    lo = np.where(flip, -u, l)
    hi = np.where(flip, -l, u)
    with np.errstate(invalid="ignore"):
        x = _inverse_transform(lo, hi, np.where(flip, 1.0 - q, q))
    underflow = special.erfc(lo / _SQRT2) == 0.0
    if np.any(underflow):
        if rng is None:
            raise ValueError("tail mass underflows, a generator is needed for the tail sampler")
        x = x.copy()
        x[underflow] = _ntail(lo[underflow], hi[underflow], rng)
    x = np.where(flip, -x, x)
    return move_inside(x, l, u)
