"""Constrained target imputation.

Given predicted means ``gamma``, find the target vector closest to ``gamma``
(in any identically separable Bregman divergence) whose order statistics
match a summary. Within a block the minimizer is isotonic with ``gamma``, so
the problem reduces to sorting ``gamma`` and clamping each sorted entry
between the neighbouring constraint values. No divergence-specific code is
needed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SortedView", "impute_sorted", "impute_targets", "sorted_view"]


@dataclass(frozen=True)
class SortedView:
    """A vector factored as a permutation of a nondecreasing vector.

    ``order[j]`` is the original index of the ``j``-th smallest entry, so
    ``v[order] == sorted_values``.
    """

    order: np.ndarray
    sorted_values: np.ndarray

    def scatter(self, sorted_like) -> np.ndarray:
        """Place values given in sorted coordinates back at their original indices."""
        out = np.empty_like(np.asarray(sorted_like, dtype=float))
        out[self.order] = sorted_like
        return out

    def values(self) -> np.ndarray:
        return self.scatter(self.sorted_values)


def sorted_view(v) -> SortedView:
    """Stable sort; ties keep ascending original index."""
    v = np.asarray(v, dtype=float).ravel()
    if not np.all(np.isfinite(v)):
        raise ValueError("sorted_view needs finite entries")
    order = np.argsort(v, kind="stable")
    return SortedView(order, v[order])


def impute_sorted(gamma_sorted, ranks, values=None) -> np.ndarray:
    """Closest nondecreasing vector to ``gamma_sorted`` meeting the constraints.

    Parameters
    ----------
    gamma_sorted : (m,) array, nondecreasing
    ranks : (h,) int array
        Strictly increasing 1-based ranks. A sequence of
        ``(rank, value)`` pairs or constraint objects is also accepted when
        ``values`` is omitted.
    values : (h,) array
        Nondecreasing constraint values.

    Returns
    -------
    (m,) ndarray
        ``values[i]`` at position ``ranks[i]``; every other entry is
        ``gamma_sorted`` clamped between the constraint values of the
        nearest ranks below and above it.
    """
    g = np.asarray(gamma_sorted, dtype=float)
    if values is None:
        pairs = [(c.rank, c.value) if hasattr(c, "rank") else tuple(c) for c in ranks]
        ranks = [p[0] for p in pairs]
        values = [p[1] for p in pairs]
    ranks = np.asarray(ranks, dtype=int)
    values = np.asarray(values, dtype=float)
    m = g.shape[0]
    if ranks.shape != values.shape:
        raise ValueError("ranks and values differ in length")
    if ranks.size == 0:
        return g.copy()
    pos = ranks - 1
    # number of constraints strictly before each position
    k = np.searchsorted(pos, np.arange(m), side="left")
    lower = np.concatenate([[-np.inf], values])[k]
    upper = np.concatenate([values, [np.inf]])[k]
    out = np.minimum(np.maximum(g, lower), upper)
    out[pos] = values
    return out


def impute_targets(gamma, summary) -> np.ndarray:
    """Blockwise constrained imputation.

    Each block is solved independently in the sorted coordinates of
    ``gamma`` restricted to the block and scattered back. Rows outside every
    block keep their ``gamma`` value.
    """
    gamma = np.asarray(gamma, dtype=float).ravel()
    out = gamma.copy()
    n = gamma.shape[0]
    for i, block in enumerate(summary.blocks):
        rows = np.asarray(block.rows, dtype=int)
        if rows.size and (rows.min() < 0 or rows.max() >= n):
            raise ValueError(f"block {i} references rows outside [0, {n})")
        if block.h and block.ranks[-1] > rows.size:
            raise ValueError(f"block {i} has a rank beyond its {rows.size} rows")
        view = sorted_view(gamma[rows])
        out[rows[view.order]] = impute_sorted(view.sorted_values, block.ranks, block.values)
    return out
