from src.tmvn.gibbs import sample_gibbs
from src.tmvn.naive import sample_naive
from src.tmvn.spec import TmvnResult, TruncatedGaussianSpec
from src.tmvn.tilting import TiltedSampler, sample_tilted
from src.tmvn.univariate import ln_normal_prob, trandn, truncated_normal_inverse_cdf

__all__ = [
    "TiltedSampler",
    "TmvnResult",
    "TruncatedGaussianSpec",
    "ln_normal_prob",
    "sample_gibbs",
    "sample_naive",
    "sample_tilted",
    "trandn",
    "truncated_normal_inverse_cdf",
]
