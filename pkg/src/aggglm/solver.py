"""Alternating minimization over coefficients and imputed targets."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .aggregation import validate_summary
from .glm import ConvergenceError, fit_glm, get_family, glm_objective, predict_means
from .imputation import impute_targets

__all__ = ["FitOptions", "FitState", "alternate_fit", "initialize_targets"]

logger = logging.getLogger(__name__)

INIT_SCHEMES = ("interpolate", "zero-beta")


@dataclass(frozen=True)
class FitOptions:
    lam: float = 0.0
    max_outer_iterations: int = 500
    relative_loss_tolerance: float = 1e-6
    seed: int = 0
    init_scheme: str = "interpolate"
    unpenalized: tuple | None = None
    glm_tol: float = 1e-8
    glm_max_iter: int = 100

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be >= 1")
        if not self.relative_loss_tolerance > 0:
            raise ValueError("relative_loss_tolerance must be positive")
        if self.init_scheme not in INIT_SCHEMES:
            raise ValueError(f"init_scheme must be one of {INIT_SCHEMES}")


@dataclass(frozen=True)
class FitState:
    beta: np.ndarray
    lam: float
    z_hat: np.ndarray
    loss_trajectory: tuple
    iterations: int
    converged: bool
    glm_failures: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "beta": [float(b) for b in self.beta],
            "lambda": float(self.lam),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "loss_trajectory": [float(v) for v in self.loss_trajectory],
            "glm_failures": list(self.glm_failures),
        }


def initialize_targets(summary, n, family, scheme="interpolate", X=None) -> np.ndarray:
    """Feasible starting targets.

    ``interpolate`` fills each block's sorted positions by linear
    interpolation between the constraint values (constant beyond the first
    and last rank) and hands them to the block's rows in ascending row-id
    order. ``zero-beta`` imputes against the means of an all-zero
    coefficient vector and needs ``X``. Rows outside every block start at
    the zero-predictor mean.
    """
    family = get_family(family)
    if scheme == "zero-beta":
        if X is None:
            raise ValueError("zero-beta initialization needs X")
        X = np.asarray(X, dtype=float)
        return impute_targets(predict_means(X, np.zeros(X.shape[1]), family), summary)
    if scheme != "interpolate":
        raise ValueError(f"unknown init scheme {scheme!r}")

    z = np.full(n, float(family.mean(0.0)))
    for block in summary.blocks:
        rows = np.sort(np.asarray(block.rows, dtype=int))
        positions = np.arange(1, rows.size + 1)
        z[rows] = np.interp(positions, block.ranks, block.values)
    return z


def alternate_fit(X, summary, family, options=None, *, z0=None) -> FitState:
    """Fit GLM coefficients and individual targets from an aggregate summary.

    Each outer iteration refits the coefficients on the current targets
    (warm-started, so the objective cannot increase), then re-imputes the
    targets against the new means. The recorded loss after iteration ``t``
    is ``D(z_t || mean(X beta_t)) + lam * ||beta_t||^2``.

    Parameters
    ----------
    X : (n, d) array
    summary : AggregateSummary
    family : GlmFamily or str
    options : FitOptions, optional
    z0 : (n,) array, optional
        Explicit starting targets; overrides ``options.init_scheme``.

    Returns
    -------
    FitState
    """
    options = options or FitOptions()
    family = get_family(family)
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    validate_summary(summary, n, family)

    if z0 is None:
        z = initialize_targets(summary, n, family, options.init_scheme, X)
    else:
        z = family.check_targets(np.asarray(z0, dtype=float).ravel(), "z0").copy()

    beta = np.zeros(X.shape[1])
    losses = []
    failures = []
    converged = False
    t = 0
    for t in range(1, options.max_outer_iterations + 1):
        try:
            beta = fit_glm(
                X,
                z,
                family,
                options.lam,
                unpenalized=options.unpenalized,
                beta0=beta,
                tol=options.glm_tol,
                max_iter=options.glm_max_iter,
            )
        except ConvergenceError as exc:
            logger.warning("outer iteration %d: %s", t, exc)
            failures.append(t)
            beta = exc.beta
        gamma = predict_means(X, beta, family)
        z = impute_targets(gamma, summary)
        losses.append(glm_objective(X, z, beta, family, options.lam, options.unpenalized))
        if len(losses) > 1:
            prev = losses[-2]
            if abs(losses[-1] - prev) / max(prev, 1e-12) < options.relative_loss_tolerance:
                converged = True
                break

    return FitState(
        beta=beta,
        lam=options.lam,
        z_hat=z,
        loss_trajectory=tuple(losses),
        iterations=t,
        converged=converged,
        glm_failures=tuple(failures),
    )
