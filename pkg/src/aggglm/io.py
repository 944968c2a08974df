"""CSV datasets and JSON artifacts."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .aggregation import AggregateSummary
from .glm import get_family

__all__ = [
    "Dataset",
    "DatasetError",
    "format_float",
    "read_dataset",
    "read_summary",
    "write_csv",
    "write_dataset",
    "write_json",
    "write_summary",
]


class DatasetError(ValueError):
    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.row = row
        self.column = column


@dataclass
class Dataset:
    feature_names: list
    X: np.ndarray
    target_name: str | None = None
    target: np.ndarray | None = None
    block_name: str | None = None
    block_labels: np.ndarray | None = None
    family: str | None = None

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def blocks(self) -> dict:
        """Row indices per block label, in order of first appearance."""
        if self.block_labels is None:
            return {}
        out = {}
        for i, lab in enumerate(self.block_labels):
            out.setdefault(lab, []).append(i)
        return out


def format_float(x) -> str:
    # repr gives the shortest string that round-trips exactly
    return repr(float(x))


def read_dataset(path, *, target=None, block=None, features=None, family=None) -> Dataset:
    """Read a headered, comma-separated numeric CSV.

    ``features`` defaults to every column other than ``target`` and
    ``block``. Block labels are kept as strings; all other cells must parse
    as floats. Rows and columns in error messages are 1-based data rows and
    header names.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError(f"{path} is empty") from None
        rows = [r for r in reader if r]

    if len(set(header)) != len(header):
        raise DatasetError("duplicate column names in header")
    for name in [target, block] + list(features or []):
        if name is not None and name not in header:
            raise DatasetError("missing column", column=name)
    if features is None:
        features = [h for h in header if h not in (target, block)]
    if not features:
        raise DatasetError("no feature columns")

    for i, r in enumerate(rows, start=1):
        if len(r) != len(header):
            raise DatasetError(f"expected {len(header)} fields, found {len(r)}", row=i)

    def numeric(name):
        j = header.index(name)
        out = np.empty(len(rows))
        for i, r in enumerate(rows, start=1):
            cell = r[j].strip()
            try:
                out[i - 1] = float(cell)
            except ValueError:
                raise DatasetError(f"non-numeric value {cell!r}", row=i, column=name) from None
            if not np.isfinite(out[i - 1]):
                raise DatasetError(f"non-finite value {cell!r}", row=i, column=name)
        return out

    X = np.column_stack([numeric(f) for f in features]) if rows else np.zeros((0, len(features)))
    ds = Dataset(list(features), X, family=family)
    if target is not None:
        ds.target_name = target
        ds.target = numeric(target)
        if family is not None:
            fam = get_family(family)
            bad = ~fam.in_domain(ds.target)
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise DatasetError(f"value outside the {fam.kind} domain", row=i + 1, column=target)
    if block is not None:
        j = header.index(block)
        ds.block_name = block
        ds.block_labels = np.array([r[j].strip() for r in rows], dtype=object)
    return ds


def write_csv(path, header, rows):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in r])


def write_dataset(path, ds: Dataset):
    header = list(ds.feature_names)
    cols = [ds.X[:, j] for j in range(ds.d)]
    if ds.target is not None:
        header.append(ds.target_name or "z")
        cols.append(ds.target)
    if ds.block_labels is not None:
        header.append(ds.block_name or "block")
    rows = []
    for i in range(ds.n):
        row = [float(c[i]) for c in cols]
        if ds.block_labels is not None:
            row.append(ds.block_labels[i])
        rows.append(row)
    write_csv(path, header, rows)


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=1) + "\n", encoding="utf-8")


def read_summary(path) -> AggregateSummary:
    return AggregateSummary.from_json(Path(path).read_text(encoding="utf-8"))


def write_summary(path, summary: AggregateSummary):
    write_json(path, summary.to_dict())
