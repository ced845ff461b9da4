from __future__ import annotations

import json
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from src.core.errors import DimensionMismatch, ValidationError
from src.var.params import ReducedParams, SvarParams, reduced_to_structural

logger = logging.getLogger("condcast.est.posterior")

KIND_REDUCED = "reduced"
KIND_STRUCTURAL = "structural"

ParamDraw = SvarParams | ReducedParams


@dataclass(frozen=True, eq=False)
class PosteriorDraws:
    """
    Retained parameter draws of one estimation run.

    ``root_entropy`` is the entropy of the root ``SeedSequence`` the sampler was
    seeded with, so the run can be reproduced. ``info`` carries free-form
    metadata (prior name, shrinkage, log marginal likelihood).
    """

    params: tuple[ParamDraw, ...]
    root_entropy: int | None = None
    burn_in: int = 0
    thin: int = 1
    info: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        params = tuple(self.params)
        if not params:
            raise ValidationError("posterior holds no draws")
        kinds = {type(d) for d in params}
        if len(kinds) > 1:
            raise ValidationError("posterior mixes reduced and structural draws")
        n, p = params[0].n, params[0].p
        if any(d.n != n or d.p != p for d in params):
            raise DimensionMismatch("posterior draws disagree on (n, p)")
        object.__setattr__(self, "params", params)

    def __len__(self) -> int:
        return len(self.params)

    def __iter__(self) -> Iterator[ParamDraw]:
        return iter(self.params)

    def __getitem__(self, index: int) -> ParamDraw:
        return self.params[index]

    @property
    def n(self) -> int:
        return self.params[0].n

    @property
    def p(self) -> int:
        return self.params[0].p

    @property
    def kind(self) -> str:
        return KIND_STRUCTURAL if isinstance(self.params[0], SvarParams) else KIND_REDUCED

    def structural(self, index: int) -> SvarParams:
        """Draw ``index`` in structural form (Cholesky identification for reduced draws)."""
        draw = self.params[index]
        if isinstance(draw, SvarParams):
            return draw
        return reduced_to_structural(draw)

    def reduced(self, index: int) -> ReducedParams:
        draw = self.params[index]
        if isinstance(draw, ReducedParams):
            return draw
        return draw.to_reduced()

    def mean_reduced(self) -> ReducedParams:
        """Posterior mean of the reduced-form coefficients and covariance."""
        reduced = [self.reduced(i) for i in range(len(self))]
        coefs = np.mean([r.coefficient_matrix() for r in reduced], axis=0)
        sigma = np.mean([r.Sigma for r in reduced], axis=0)
        return ReducedParams.from_coefficient_matrix(coefs, sigma)

    def subset(self, indices: Sequence[int]) -> PosteriorDraws:
        return PosteriorDraws(
            tuple(self.params[i] for i in indices),
            root_entropy=self.root_entropy,
            burn_in=self.burn_in,
            thin=self.thin,
            info=dict(self.info),
        )

    def save(self, path: Path | str) -> None:
        """Write the draws to an ``.npz`` archive."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = {
            "kind": self.kind,
            "root_entropy": self.root_entropy,
            "burn_in": self.burn_in,
            "thin": self.thin,
            "info": self.info,
        }
        arrays: dict[str, np.ndarray] = {"header": np.array(json.dumps(header, sort_keys=True))}
        if self.kind == KIND_STRUCTURAL:
            arrays["A0"] = np.stack([d.A0 for d in self.params])
            arrays["a"] = np.stack([d.a for d in self.params])
            arrays["A_lags"] = np.stack([d.A_lags for d in self.params])
            if self.params[0].shock_scale is not None:
                arrays["shock_scale"] = np.stack([d.shock_scale for d in self.params])
        else:
            arrays["b"] = np.stack([d.b for d in self.params])
            arrays["B_lags"] = np.stack([d.B_lags for d in self.params])
            arrays["Sigma"] = np.stack([d.Sigma for d in self.params])
        np.savez(path, **arrays)
        logger.info("Saved %d %s draws to %s", len(self), self.kind, path)

    @classmethod
    def load(cls, path: Path | str) -> PosteriorDraws:
        """
        Read an archive written by ``save``.

        Raises:
            ValidationError: file missing or not a posterior archive
        """
        path = Path(path)
        if not path.exists():
            raise ValidationError(f"posterior archive {path} not found")
        with np.load(path, allow_pickle=False) as archive:
            if "header" not in archive:
                raise ValidationError(f"{path} is not a posterior archive")
            header = json.loads(str(archive["header"]))
            if header["kind"] == KIND_STRUCTURAL:
                scales = archive["shock_scale"] if "shock_scale" in archive else None
                params: tuple[ParamDraw, ...] = tuple(
                    SvarParams(a0, a, lags, None if scales is None else scales[i])
                    for i, (a0, a, lags) in enumerate(
                        zip(archive["A0"], archive["a"], archive["A_lags"], strict=True)
                    )
                )
            else:
                params = tuple(
                    ReducedParams(b, lags, sigma)
                    for b, lags, sigma in zip(
                        archive["b"], archive["B_lags"], archive["Sigma"], strict=True
                    )
                )
        logger.info("Loaded %d %s draws from %s", len(params), header["kind"], path)
        return cls(
            params,
            root_entropy=header.get("root_entropy"),
            burn_in=int(header.get("burn_in", 0)),
            thin=int(header.get("thin", 1)),
            info=header.get("info") or {},
        )
