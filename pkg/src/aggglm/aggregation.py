"""Order-statistic and histogram summaries of a target column.

A summary is a list of disjoint blocks of rows. Each block carries a set of
``(rank, value)`` constraints: the ``rank``-th smallest target in the block
equals ``value``. Ranks are 1-based within their block; row ids are 0-based
positions in the dataset.

A histogram maps onto the same structure through cumulative counts: an
interior bin edge ``b`` with ``c`` samples below it is read as "the
``c``-th order statistic is ``b``". That reading is exact for quantile
summaries and an approximation for fixed-edge histograms.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .glm import get_family

__all__ = [
    "AggregateSummary",
    "Block",
    "OrderStatisticConstraint",
    "SummaryValidationError",
    "HistogramCounts",
    "histogram_to_constraints",
    "quantile_ranks",
    "recovered_histogram",
    "summarize_blocks",
    "summarize_targets",
    "validate_summary",
]


class SummaryValidationError(ValueError):
    """A summary that no target vector can satisfy, or that does not fit the data."""

    def __init__(self, message, block=None):
        if block is not None:
            message = f"block {block}: {message}"
        super().__init__(message)
        self.block = block


@dataclass(frozen=True, order=True)
class OrderStatisticConstraint:
    rank: int
    value: float


@dataclass(frozen=True)
class Block:
    rows: tuple
    constraints: tuple

    def __init__(self, rows, constraints):
        object.__setattr__(self, "rows", tuple(int(r) for r in rows))
        cons = tuple(
            c if isinstance(c, OrderStatisticConstraint) else OrderStatisticConstraint(int(c[0]), float(c[1]))
            for c in constraints
        )
        object.__setattr__(self, "constraints", tuple(sorted(cons, key=lambda c: c.rank)))

    @property
    def size(self) -> int:
        return len(self.rows)

    @property
    def h(self) -> int:
        return len(self.constraints)

    @property
    def ranks(self) -> np.ndarray:
        return np.array([c.rank for c in self.constraints], dtype=int)

    @property
    def values(self) -> np.ndarray:
        return np.array([c.value for c in self.constraints], dtype=float)


@dataclass(frozen=True)
class AggregateSummary:
    blocks: tuple = field(default_factory=tuple)

    def __init__(self, blocks):
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def h(self) -> list:
        return [b.h for b in self.blocks]

    @classmethod
    def single_block(cls, n, constraints):
        return cls([Block(range(n), constraints)])

    def covered_rows(self) -> np.ndarray:
        if not self.blocks:
            return np.zeros(0, dtype=int)
        return np.concatenate([np.asarray(b.rows, dtype=int) for b in self.blocks])

    def to_dict(self) -> dict:
        return {
            "blocks": [
                {
                    "rows": list(b.rows),
                    "constraints": [{"rank": c.rank, "value": c.value} for c in b.constraints],
                }
                for b in self.blocks
            ]
        }

    @classmethod
    def from_dict(cls, data) -> "AggregateSummary":
        try:
            blocks = [
                Block(blk["rows"], [(c["rank"], c["value"]) for c in blk["constraints"]])
                for blk in data["blocks"]
            ]
        except (KeyError, TypeError) as exc:
            raise SummaryValidationError(f"malformed summary: {exc!r}") from exc
        return cls(blocks)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text) -> "AggregateSummary":
        return cls.from_dict(json.loads(text))


def validate_summary(summary, n, family) -> AggregateSummary:
    """Check that ``summary`` is feasible for ``n`` rows of a ``family`` target.

    Returns the summary unchanged on success and raises
    :class:`SummaryValidationError` naming the offending block otherwise.
    """
    family = get_family(family)
    seen = np.full(n, -1, dtype=int)
    for i, block in enumerate(summary.blocks):
        rows = np.asarray(block.rows, dtype=int)
        if rows.size == 0:
            raise SummaryValidationError("block has no rows", i)
        if rows.min() < 0 or rows.max() >= n:
            raise SummaryValidationError(f"row ids must lie in [0, {n})", i)
        if np.unique(rows).size != rows.size:
            raise SummaryValidationError("row ids repeat within the block", i)
        clash = seen[rows] >= 0
        if clash.any():
            other = int(seen[rows[clash][0]])
            raise SummaryValidationError(f"row {int(rows[clash][0])} also belongs to block {other}", i)
        seen[rows] = i

        if block.h < 1:
            raise SummaryValidationError("block has no constraints", i)
        ranks, values = block.ranks, block.values
        if np.any(np.diff(ranks) == 0):
            raise SummaryValidationError("duplicate rank", i)
        if ranks[0] < 1 or ranks[-1] > rows.size:
            raise SummaryValidationError(f"rank outside [1, {rows.size}]", i)
        if np.any(np.diff(values) < 0):
            raise SummaryValidationError("constraint values decrease with rank", i)
        bad = ~family.in_domain(values)
        if bad.any():
            raise SummaryValidationError(
                f"value {values[bad][0]!r} outside the {family.kind} domain", i
            )
    return summary


def quantile_ranks(n, bins, include_extremes=True) -> np.ndarray:
    """Ranks ``round(k n / bins)`` for ``k = 1 .. bins-1``, plus 1 and ``n``.

    Rounding is half-up. Duplicates are removed.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if bins > n:
        raise ValueError(f"cannot cut {n} samples into {bins} quantile bins")
    k = np.arange(1, bins)
    ranks = np.floor(k * n / bins + 0.5).astype(int)
    if include_extremes:
        ranks = np.concatenate([[1], ranks, [n]])
    return np.unique(ranks[(ranks >= 1) & (ranks <= n)])


def histogram_to_constraints(edges, counts):
    """Convert a histogram (edges, per-bin counts) into order-statistic constraints.

    Interior edges whose cumulative count ``c`` satisfies ``0 < c < n``
    become ``(c, edge)``. When several edges share a count only the
    smallest is kept, since it is the tighter bound.
    """
    edges = np.asarray(edges, dtype=float)
    counts = np.asarray(counts, dtype=int)
    if counts.shape[0] != edges.shape[0] - 1:
        raise ValueError("need exactly len(edges) - 1 counts")
    if np.any(np.diff(edges) <= 0):
        raise ValueError("edges must be strictly increasing")
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    n = int(counts.sum())
    cumulative = np.concatenate([[0], np.cumsum(counts)])
    return _edge_constraints(edges, cumulative, n)


def _edge_constraints(edges, cumulative, n):
    out = []
    last_rank = None
    for b, c in zip(edges, cumulative):
        c = int(c)
        if 0 < c < n and np.isfinite(b) and c != last_rank:
            out.append(OrderStatisticConstraint(c, float(b)))
            last_rank = c
    return out


def summarize_targets(z, bins=None, *, edges=None, include_extremes=True):
    """Summarize a single block of targets.

    Parameters
    ----------
    z : (n,) array
    bins : int, optional
        Number of equal-frequency bins (quantile cuts).
    edges : sequence of float, optional
        Fixed bin edges; used instead of ``bins``. The count for edge ``b``
        is the number of targets strictly below it, matching half-open
        bins ``[e_i, e_{i+1})``.
    include_extremes : bool
        Keep ranks 1 and ``n`` in the quantile scheme. Ignored for edges.

    Returns
    -------
    AggregateSummary
        One block covering rows ``0 .. n-1``.
    """
    z = np.asarray(z, dtype=float).ravel()
    return AggregateSummary([_summarize_block(z, np.arange(z.size), bins, edges, include_extremes)])


def _summarize_block(z_block, rows, bins, edges, include_extremes):
    n = z_block.size
    sorted_z = np.sort(z_block, kind="stable")
    if edges is not None:
        edges = np.asarray(edges, dtype=float)
        if np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        cumulative = np.searchsorted(sorted_z, edges, side="left")
        constraints = _edge_constraints(edges, cumulative, n)
    else:
        if bins is None:
            raise ValueError("either bins or edges is required")
        ranks = quantile_ranks(n, int(bins), include_extremes)
        constraints = [OrderStatisticConstraint(int(r), float(sorted_z[r - 1])) for r in ranks]
    return Block(rows, constraints)


def summarize_blocks(z, labels, bins=None, *, edges=None, include_extremes=True):
    """Per-block summaries, grouping rows by ``labels`` in order of first appearance."""
    z = np.asarray(z, dtype=float).ravel()
    labels = np.asarray(labels)
    if labels.shape[0] != z.shape[0]:
        raise ValueError("labels and z differ in length")
    _, first = np.unique(labels, return_index=True)
    blocks = []
    for lab in labels[np.sort(first)]:
        rows = np.flatnonzero(labels == lab)
        blocks.append(_summarize_block(z[rows], rows, bins, edges, include_extremes))
    return AggregateSummary(blocks)


@dataclass(frozen=True)
class HistogramCounts:
    counts: np.ndarray
    below: int
    above: int

    @property
    def out_of_range(self) -> int:
        return self.below + self.above


def recovered_histogram(z_hat, edges) -> HistogramCounts:
    """Count ``z_hat`` into half-open bins ``[e_i, e_{i+1})``.

    Values outside ``[e_0, e_last)`` are tallied separately.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("need at least two edges")
    if np.any(np.diff(edges) <= 0):
        raise ValueError("edges must be strictly increasing")
    z_hat = np.asarray(z_hat, dtype=float).ravel()
    idx = np.searchsorted(edges, z_hat, side="right") - 1
    nbins = edges.size - 1
    inside = (idx >= 0) & (idx < nbins)
    counts = np.bincount(idx[inside], minlength=nbins)
    return HistogramCounts(counts, int(np.sum(idx < 0)), int(np.sum(idx >= nbins)))
