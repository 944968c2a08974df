"""Error metrics, permutation tests and bin-granularity sweeps."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .aggregation import summarize_blocks, summarize_targets
from .glm import ConvergenceError, bregman_divergence, fit_glm, get_family, predict_means
from .solver import FitOptions, alternate_fit

__all__ = [
    "PermutationTestResult",
    "SweepResult",
    "evaluate_error",
    "granularity_sweep",
    "kfold_indices",
    "permutation_p_value",
    "permutation_test",
]

logger = logging.getLogger(__name__)


def evaluate_error(z_true, z_rec, family) -> float:
    """Mean per-sample divergence ``D(z_true || z_rec) / n``."""
    family = get_family(family)
    z_true = family.check_targets(np.asarray(z_true, dtype=float).ravel(), "z_true")
    z_rec = family.check_targets(np.asarray(z_rec, dtype=float).ravel(), "z_rec")
    if z_true.shape != z_rec.shape:
        raise ValueError(f"dimension mismatch: {z_true.shape} vs {z_rec.shape}")
    if z_true.size == 0:
        raise ValueError("cannot evaluate an empty vector")
    return bregman_divergence(family, z_true, z_rec) / z_true.size


def permutation_p_value(observed, null) -> float:
    """Share of the null at or below ``observed``, counting the observation itself.

    Null values within ``100 * eps * |observed|`` of the observation count as
    ties, so errors that differ only by summation order are not separated.
    """
    null = np.asarray(null, dtype=float)
    gamma = 100 * np.finfo(float).eps * abs(observed)
    return float((1 + np.sum(null <= observed + gamma)) / (1 + null.size))


def _map(func, tasks, jobs):
    if jobs is None or jobs <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, tasks))


def _glm_training_error(args):
    X, z, family, lam, unpenalized = args
    failed = False
    try:
        beta = fit_glm(X, z, family, lam, unpenalized=unpenalized)
    except ConvergenceError as exc:
        beta, failed = exc.beta, True
    return evaluate_error(z, predict_means(X, beta, family), family), failed


@dataclass(frozen=True)
class PermutationTestResult:
    observed_error: float
    null_errors: np.ndarray
    p_value: float
    failed_replicates: tuple = ()

    def to_dict(self) -> dict:
        return {
            "observed_error": float(self.observed_error),
            "null_errors": [float(v) for v in self.null_errors],
            "p_value": float(self.p_value),
            "n_perms": int(len(self.null_errors)),
            "failed_replicates": list(self.failed_replicates),
        }


def permutation_test(
    X,
    z_true,
    family,
    summary=None,
    options=None,
    n_perms=1000,
    seed=0,
    jobs=1,
) -> PermutationTestResult:
    """Compare a fit error against GLM fits on randomly permuted targets.

    The observed error is ``evaluate_error(z_true, z_hat)`` for the
    aggregate fit when ``summary`` is given, and the training error of a
    plain GLM on ``z_true`` otherwise. Each null replicate fits a plain GLM
    to a uniformly permuted copy of ``z_true`` and records its training
    error. Small observed errors relative to the null are evidence of a
    real relationship.
    """
    if n_perms < 1:
        raise ValueError("n_perms must be >= 1")
    family = get_family(family)
    options = options or FitOptions()
    X = np.asarray(X, dtype=float)
    z_true = family.check_targets(np.asarray(z_true, dtype=float).ravel(), "z_true")

    if summary is None:
        observed, _ = _glm_training_error((X, z_true, family, options.lam, options.unpenalized))
    else:
        state = alternate_fit(X, summary, family, options)
        observed = evaluate_error(z_true, state.z_hat, family)

    rng = np.random.default_rng(seed)
    perms = [rng.permutation(z_true.size) for _ in range(n_perms)]
    tasks = [(X, z_true[p], family, options.lam, options.unpenalized) for p in perms]
    results = _map(_glm_training_error, tasks, jobs)
    null = np.array([r[0] for r in results])
    failed = tuple(i for i, r in enumerate(results) if r[1])
    if failed:
        logger.warning("%d null replicates hit the Newton iteration cap", len(failed))
    return PermutationTestResult(observed, null, permutation_p_value(observed, null), failed)


def kfold_indices(n, folds, seed, groups=None):
    """Random ``(train, test)`` index pairs. Rows sharing a group stay together."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    rng = np.random.default_rng(seed)
    if groups is None:
        if folds > n:
            raise ValueError(f"cannot split {n} rows into {folds} folds")
        parts = np.array_split(rng.permutation(n), folds)
    else:
        groups = np.asarray(groups)
        labels = np.unique(groups)
        if folds > labels.size:
            raise ValueError(f"cannot split {labels.size} blocks into {folds} folds")
        label_parts = np.array_split(labels[rng.permutation(labels.size)], folds)
        parts = [np.flatnonzero(np.isin(groups, lp)) for lp in label_parts]
    out = []
    for k in range(folds):
        test = np.sort(parts[k])
        train = np.sort(np.concatenate([parts[j] for j in range(folds) if j != k]))
        out.append((train, test))
    return out


SWEEP_FIELDS = (
    "fold",
    "bins",
    "train_error",
    "test_error",
    "baseline_train_error",
    "baseline_test_error",
    "iterations",
    "converged",
)


@dataclass(frozen=True)
class SweepResult:
    """One record per (fold, bin count); see ``SWEEP_FIELDS``."""

    records: tuple

    def column(self, name, bins=None) -> np.ndarray:
        rows = self.records if bins is None else [r for r in self.records if r["bins"] == bins]
        return np.array([r[name] for r in rows], dtype=float)

    @property
    def bins(self) -> list:
        return sorted({r["bins"] for r in self.records})

    def mean_by_bins(self, name) -> dict:
        return {b: float(np.mean(self.column(name, b))) for b in self.bins}

    def to_dict(self) -> dict:
        return {"records": [dict(r) for r in self.records]}


def _sweep_task(args):
    X, z, family, train, test, bins, groups, options, include_extremes = args
    Xtr, ztr = X[train], z[train]
    if groups is None:
        summary = summarize_targets(ztr, bins, include_extremes=include_extremes)
    else:
        summary = summarize_blocks(ztr, groups[train], bins, include_extremes=include_extremes)
    state = alternate_fit(Xtr, summary, family, options)
    return {
        "train_error": evaluate_error(ztr, state.z_hat, family),
        "test_error": evaluate_error(z[test], predict_means(X[test], state.beta, family), family),
        "iterations": int(state.iterations),
        "converged": bool(state.converged),
    }


def granularity_sweep(
    X,
    z_true,
    family,
    bins_list,
    folds=5,
    options=None,
    seed=0,
    *,
    groups=None,
    include_extremes=True,
    jobs=1,
) -> SweepResult:
    """Cross-validated errors of the aggregate fit for each bin count.

    For every fold the training targets are summarized into ``B``
    equal-frequency bins (per block when ``groups`` is given), the
    alternating fit is run on the summary, and two errors are recorded:
    training error between the true and imputed training targets, and test
    error between the true test targets and the predicted means. The
    baseline columns hold the same errors for a GLM fitted to the fully
    observed training targets, with predicted means standing in for the
    imputation.
    """
    family = get_family(family)
    options = options or FitOptions()
    X = np.asarray(X, dtype=float)
    z_true = family.check_targets(np.asarray(z_true, dtype=float).ravel(), "z_true")
    bins_list = [int(b) for b in bins_list]
    if any(b < 1 for b in bins_list):
        raise ValueError("every bin count must be >= 1")
    if groups is not None:
        groups = np.asarray(groups)
    splits = kfold_indices(z_true.size, folds, seed, groups)
    if groups is None:
        smallest = min(tr.size for tr, _ in splits)
        if max(bins_list) > smallest:
            raise ValueError(f"{max(bins_list)} bins exceed the smallest training fold ({smallest} rows)")

    baselines = []
    for train, test in splits:
        beta, _ = _baseline_beta(X[train], z_true[train], family, options)
        baselines.append(
            (
                evaluate_error(z_true[train], predict_means(X[train], beta, family), family),
                evaluate_error(z_true[test], predict_means(X[test], beta, family), family),
            )
        )

    tasks, keys = [], []
    for k, (train, test) in enumerate(splits):
        for b in bins_list:
            tasks.append((X, z_true, family, train, test, b, groups, options, include_extremes))
            keys.append((k, b))
    results = _map(_sweep_task, tasks, jobs)

    records = []
    for (k, b), res in zip(keys, results):
        records.append(
            {
                "fold": k,
                "bins": b,
                "train_error": res["train_error"],
                "test_error": res["test_error"],
                "baseline_train_error": baselines[k][0],
                "baseline_test_error": baselines[k][1],
                "iterations": res["iterations"],
                "converged": res["converged"],
            }
        )
    return SweepResult(tuple(records))


def _baseline_beta(X, z, family, options):
    try:
        return fit_glm(X, z, family, options.lam, unpenalized=options.unpenalized), False
    except ConvergenceError as exc:
        return exc.beta, True
