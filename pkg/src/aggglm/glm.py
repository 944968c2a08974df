"""
Exponential-family GLMs expressed through Bregman divergences.

Three identically separable families are supported:

=========  ==============  ===============================  ===========
family     mean link       divergence D(y || mu)            target domain
=========  ==============  ===============================  ===========
gaussian   identity        1/2 (y - mu)^2                   R
poisson    exp             y log(y/mu) - y + mu             [0, inf)
bernoulli  logistic        y log(y/mu) + (1-y) log(...)     [0, 1]
=========  ==============  ===============================  ===========

All three use the canonical link, so the derivative of ``D(z || mu(eta))``
with respect to ``eta`` is simply ``mu - z``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import expit, xlogy

__all__ = [
    "FAMILIES",
    "ConvergenceError",
    "GlmFamily",
    "RankDeficientWarning",
    "bregman_divergence",
    "fit_glm",
    "get_family",
    "glm_objective",
    "glm_gradient",
    "link_inverse",
    "predict_means",
]

FAMILIES = ("gaussian", "poisson", "bernoulli")

# exp overflows just above 709
_MAX_ETA = 700.0


class ConvergenceError(RuntimeError):
    """Raised when the Newton solver runs out of iterations.

    The last iterate is kept on ``beta`` so callers can continue from it.
    """

    def __init__(self, message, beta, gradient_norm):
        super().__init__(message)
        self.beta = beta
        self.gradient_norm = gradient_norm


class RankDeficientWarning(UserWarning):
    pass


@dataclass(frozen=True)
class GlmFamily:
    """An exponential family with canonical link.

    Parameters
    ----------
    kind : {"gaussian", "poisson", "bernoulli"}
    epsilon : float
        Offset used to keep targets and means away from the singular
        points of the divergence (0 for Poisson, 0 and 1 for Bernoulli).
    """

    kind: str
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.kind not in FAMILIES:
            raise ValueError(f"unknown family {self.kind!r}; expected one of {FAMILIES}")
        if not 0.0 < self.epsilon < 1e-3:
            raise ValueError("epsilon must lie in (0, 1e-3)")

    @property
    def domain_min(self) -> float:
        return -np.inf if self.kind == "gaussian" else 0.0

    @property
    def domain_max(self) -> float:
        return 1.0 if self.kind == "bernoulli" else np.inf

    def in_domain(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        return np.isfinite(values) & (values >= self.domain_min) & (values <= self.domain_max)

    def check_targets(self, values, name="targets"):
        values = np.asarray(values, dtype=float)
        bad = ~self.in_domain(values)
        if bad.any():
            idx = int(np.flatnonzero(bad)[0])
            raise ValueError(
                f"{name}[{idx}] = {values.flat[idx]!r} is outside the {self.kind} "
                f"domain [{self.domain_min}, {self.domain_max}]"
            )
        return values

    def clip(self, values) -> np.ndarray:
        """Move values off the divergence singularities."""
        values = np.asarray(values, dtype=float)
        if self.kind == "poisson":
            return np.maximum(values, self.epsilon)
        if self.kind == "bernoulli":
            return np.clip(values, self.epsilon, 1.0 - self.epsilon)
        return values

    def mean(self, eta) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        if self.kind == "gaussian":
            return eta.copy()
        if self.kind == "poisson":
            return self.clip(np.exp(np.minimum(eta, _MAX_ETA)))
        return self.clip(expit(eta))

    def mean_derivative(self, mu) -> np.ndarray:
        """d mu / d eta expressed through mu (the IRLS weights)."""
        mu = np.asarray(mu, dtype=float)
        if self.kind == "gaussian":
            return np.ones_like(mu)
        if self.kind == "poisson":
            return mu
        return mu * (1.0 - mu)

    def phi(self, x) -> np.ndarray:
        """The scalar convex generator, applied elementwise."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            return 0.5 * x * x
        if self.kind == "poisson":
            return xlogy(x, x) - x
        return xlogy(x, x) + xlogy(1.0 - x, 1.0 - x)

    def divergence(self, y, mu) -> np.ndarray:
        """Elementwise divergence D(y || mu), after epsilon clipping."""
        y = self.clip(y)
        mu = self.clip(mu)
        if self.kind == "gaussian":
            d = 0.5 * (y - mu) ** 2
        elif self.kind == "poisson":
            d = xlogy(y, y / mu) - y + mu
        else:
            d = xlogy(y, y / mu) + xlogy(1.0 - y, (1.0 - y) / (1.0 - mu))
        # rounding can leave tiny negatives at y == mu
        return np.maximum(d, 0.0)


def get_family(family, epsilon=1e-8) -> GlmFamily:
    if isinstance(family, GlmFamily):
        return family
    return GlmFamily(str(family).lower(), epsilon)


def link_inverse(family, eta):
    """Map a linear predictor to the mean parameter.

    Identity for Gaussian, ``exp`` for Poisson and the logistic function
    for Bernoulli. Results saturate at ``epsilon`` from the boundary of
    the mean domain instead of overflowing.
    """
    family = get_family(family)
    out = family.mean(eta)
    return float(out) if np.ndim(out) == 0 else out


def bregman_divergence(family, y, mu) -> float:
    """Summed divergence ``sum_i D(y_i || mu_i)``."""
    family = get_family(family)
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if y.shape != mu.shape:
        raise ValueError(f"dimension mismatch: {y.shape} vs {mu.shape}")
    return float(np.sum(family.divergence(y, mu)))


def _as_design(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"design matrix must be 2-d with n, d >= 1, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("design matrix has non-finite entries")
    return X


def predict_means(X, beta, family) -> np.ndarray:
    X = _as_design(X)
    beta = np.asarray(beta, dtype=float).ravel()
    if X.shape[1] != beta.shape[0]:
        raise ValueError(f"X has {X.shape[1]} columns but beta has length {beta.shape[0]}")
    return get_family(family).mean(X @ beta)


def _penalty_weights(d, lam, unpenalized):
    w = np.full(d, float(lam))
    if unpenalized is not None:
        w[np.atleast_1d(unpenalized)] = 0.0
    return w


def glm_objective(X, z, beta, family, lam=0.0, unpenalized=None) -> float:
    """``D(z || mean(X beta)) + lam * ||beta||^2`` (optionally sparing some columns)."""
    family = get_family(family)
    beta = np.asarray(beta, dtype=float)
    w = _penalty_weights(beta.shape[0], lam, unpenalized)
    return bregman_divergence(family, z, predict_means(X, beta, family)) + float(w @ (beta * beta))


def glm_gradient(X, z, beta, family, lam=0.0, unpenalized=None) -> np.ndarray:
    family = get_family(family)
    X = np.asarray(X, dtype=float)
    beta = np.asarray(beta, dtype=float)
    w = _penalty_weights(beta.shape[0], lam, unpenalized)
    mu = predict_means(X, beta, family)
    return X.T @ (mu - family.clip(z)) + 2.0 * w * beta


def _solve_pd(hess, grad):
    with warnings.catch_warnings():
        warnings.simplefilter("error", linalg.LinAlgWarning)
        try:
            step = linalg.solve(hess, grad, assume_a="pos")
        except (linalg.LinAlgError, linalg.LinAlgWarning, ValueError):
            return None
    return step if np.all(np.isfinite(step)) else None


def fit_glm(
    X,
    z,
    family,
    lam=0.0,
    *,
    unpenalized=None,
    beta0=None,
    tol=1e-8,
    max_iter=100,
):
    """Ridge-penalized GLM fit by damped Newton (IRLS) iterations.

    Minimizes ``D(z || mean(X beta)) + lam * ||beta||^2``. Every coefficient
    is penalized unless listed in ``unpenalized``; there is no implicit
    intercept.

    Parameters
    ----------
    X : (n, d) array
    z : (n,) array
        Targets in the family's domain. Fractional values are fine for
        Poisson and Bernoulli.
    family : GlmFamily or str
    lam : float
        Ridge weight, ``>= 0``.
    unpenalized : int or sequence of int, optional
        Column indices exempt from the penalty.
    beta0 : (d,) array, optional
        Starting point. Steps are only accepted when the objective does not
        increase (beyond a few ulps of rounding on the final polishing step),
        so the result is never worse than ``beta0``.
    tol : float
        Convergence threshold on the gradient infinity-norm.
    max_iter : int

    Returns
    -------
    beta : (d,) ndarray

    Raises
    ------
    ConvergenceError
        If the gradient is still above ``tol`` after ``max_iter`` steps.
    """
    family = get_family(family)
    X = _as_design(X)
    z = family.check_targets(np.asarray(z, dtype=float).ravel(), "z")
    n, d = X.shape
    if z.shape[0] != n:
        raise ValueError(f"z has length {z.shape[0]} but X has {n} rows")
    if lam < 0:
        raise ValueError("lam must be nonnegative")

    w = _penalty_weights(d, lam, unpenalized)
    zc = family.clip(z)
    beta = np.zeros(d) if beta0 is None else np.array(beta0, dtype=float)

    def objective(b):
        mu = family.mean(X @ b)
        return float(np.sum(family.divergence(zc, mu))) + float(w @ (b * b)), mu

    f, mu = objective(beta)
    warned = False
    gnorm = np.inf
    for _ in range(max_iter):
        grad = X.T @ (mu - zc) + 2.0 * w * beta
        gnorm = float(np.max(np.abs(grad)))
        if gnorm <= tol:
            return beta
        hess = (X.T * family.mean_derivative(mu)) @ X + np.diag(2.0 * w)
        step = _solve_pd(hess, grad)
        if step is None:
            if not warned:
                warnings.warn(
                    "Hessian is singular; using the minimum-norm Newton step",
                    RankDeficientWarning,
                    stacklevel=2,
                )
                warned = True
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]

        # predicted decrease below the resolution of f: one last full step still
        # shrinks the gradient quadratically. Keep it if f moves by rounding
        # noise only (a few ulps) and the gradient really did shrink.
        if 0.5 * float(grad @ step) <= 16 * np.finfo(float).eps * max(1.0, abs(f)):
            candidate = beta - step
            f_new, mu_new = objective(candidate)
            g_new = X.T @ (mu_new - zc) + 2.0 * w * candidate
            if f_new <= f + 4 * np.spacing(abs(f)) and np.max(np.abs(g_new)) < gnorm:
                return candidate
            return beta

        t = 1.0
        for _ in range(60):
            candidate = beta - t * step
            f_new, mu_new = objective(candidate)
            if f_new <= f:
                break
            t *= 0.5
        else:
            # no decrease representable in floating point: at the numerical optimum
            return beta
        if np.array_equal(candidate, beta):
            return beta
        beta, f, mu = candidate, f_new, mu_new

    grad = X.T @ (mu - zc) + 2.0 * w * beta
    gnorm = float(np.max(np.abs(grad)))
    if gnorm <= tol:
        return beta
    raise ConvergenceError(
        f"Newton solver did not converge in {max_iter} iterations (|grad| = {gnorm:.3g})",
        beta,
        gnorm,
    )
