"""Synthetic GLM datasets."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .glm import get_family

__all__ = ["SimulationConfig", "simulate_glm"]


@dataclass(frozen=True)
class SimulationConfig:
    """Settings for :func:`simulate_glm`.

    ``coefficient_scale`` defaults to 1.0 except for Poisson, where 0.3
    keeps ``exp(X beta)`` in a comfortable range.
    """

    family: str = "gaussian"
    n: int = 1000
    d: int = 10
    coefficient_scale: float | None = None
    covariate_scale: float = 1.0
    seed: int = 0
    relationship: str = "linear"

    def __post_init__(self):
        get_family(self.family)
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be >= 1")
        if self.covariate_scale <= 0 or (self.coefficient_scale is not None and self.coefficient_scale <= 0):
            raise ValueError("scales must be positive")
        if self.relationship not in ("linear", "none"):
            raise ValueError("relationship must be 'linear' or 'none'")

    @property
    def effective_coefficient_scale(self) -> float:
        if self.coefficient_scale is not None:
            return float(self.coefficient_scale)
        return 0.3 if get_family(self.family).kind == "poisson" else 1.0


def simulate_glm(config: SimulationConfig):
    """Draw ``(X, z, beta)``.

    Covariates and coefficients are i.i.d. normal with the configured
    scales. With ``relationship="none"`` the coefficients are zero and the
    targets are drawn around the zero-predictor mean. Bernoulli draws are
    softened to ``{eps, 1 - eps}``.
    """
    family = get_family(config.family)
    rng = np.random.default_rng(config.seed)
    X = rng.standard_normal((config.n, config.d)) * config.covariate_scale
    beta = rng.standard_normal(config.d) * config.effective_coefficient_scale
    if config.relationship == "none":
        beta = np.zeros(config.d)
    mu = family.mean(X @ beta)
    if family.kind == "gaussian":
        z = mu + rng.standard_normal(config.n)
    elif family.kind == "poisson":
        z = rng.poisson(mu).astype(float)
    else:
        draws = rng.random(config.n) < mu
        z = np.where(draws, 1.0 - family.epsilon, family.epsilon)
    return X, z, beta
