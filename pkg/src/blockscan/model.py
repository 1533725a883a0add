"""Labeled point data: ingestion, sorted storage, order-statistic access.

A dataset is a set of 2D locations, each carrying a 0/1 label.  Points are
stored sorted by x (ties broken by y, then input order) because every scan
window is an x-rank interval crossed with a y-rank window.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from .errors import EmptyInput, ParseError

__all__ = ["LabeledPoint", "Dataset", "ingest_csv", "order_stat", "round_half_up"]

CSV_HEADER = ("x", "y", "label")


@dataclass(frozen=True)
class LabeledPoint:
    """A 2D location with a binary label."""

    x: float
    y: float
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("coordinates must be finite")


def round_half_up(r: float) -> int:
    """Round to the nearest integer, halves up."""
    return int(math.floor(r + 0.5))


@dataclass(frozen=True)
class Dataset:
    """Immutable x-sorted point store.

    ``xs``, ``ys`` and ``labels`` are parallel arrays in x-sorted order
    (stable tie-break by y, then input order).  Construction is
    single-threaded; afterwards the dataset is safe for concurrent reads.
    """

    xs: np.ndarray
    ys: np.ndarray
    labels: np.ndarray
    n_total: int = field(init=False)
    ones_total: int = field(init=False)

    def __post_init__(self):
        n = len(self.xs)
        if len(self.ys) != n or len(self.labels) != n:
            raise ValueError("xs, ys, labels must have equal length")
        object.__setattr__(self, "n_total", n)
        object.__setattr__(self, "ones_total", int(self.labels.sum()))
        for a in (self.xs, self.ys, self.labels):
            a.setflags(write=False)

    @property
    def pbar(self) -> float:
        return self.ones_total / self.n_total

    @classmethod
    def from_points(cls, xs, ys, labels) -> "Dataset":
        """Build a dataset from unsorted coordinate/label sequences."""
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.int8)
        if not (np.isfinite(xs).all() and np.isfinite(ys).all()):
            raise ValueError("coordinates must be finite")
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        # lexsort: primary key xs, then ys; argsort is stable so input order
        # breaks remaining ties
        order = np.lexsort((ys, xs))
        return cls(xs[order].copy(), ys[order].copy(), labels[order].copy())

    def points(self) -> list[LabeledPoint]:
        return [LabeledPoint(float(x), float(y), int(l))
                for x, y, l in zip(self.xs, self.ys, self.labels)]

    def with_labels(self, labels) -> "Dataset":
        """Same geometry, different labels (used by permutation tests)."""
        labels = np.asarray(labels, dtype=np.int8)
        return Dataset(self.xs.copy(), self.ys.copy(), labels.copy())

    def to_csv(self, out: TextIO) -> None:
        """Write the sorted points back out in the ingestion format."""
        out.write("x,y,label\n")
        for x, y, l in zip(self.xs, self.ys, self.labels):
            out.write(f"{float(x)!r},{float(y)!r},{int(l)}\n")


def ingest_csv(source) -> Dataset:
    """Parse a ``x,y,label`` CSV stream into a Dataset.

    ``source`` may be a text or byte stream, or a path.  Raises EmptyInput
    for a header-only (or empty) file and ParseError with the offending
    1-based row number for malformed content.
    """
    if isinstance(source, (str, bytes)) and "\n" not in str(source):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return _ingest(fh)
    if isinstance(source, bytes):
        return _ingest(io.StringIO(source.decode("utf-8")))
    if isinstance(source, str):
        return _ingest(io.StringIO(source))
    if isinstance(source, io.BufferedIOBase) or hasattr(source, "read") and \
            isinstance(source.read(0), bytes):
        return _ingest(io.TextIOWrapper(source, encoding="utf-8", newline=""))
    return _ingest(source)


def _ingest(fh: TextIO) -> Dataset:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyInput("no header line")
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise ParseError(1, f"expected header x,y,label, got {','.join(header)!r}")
    xs, ys, labels = [], [], []
    for rownum, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ParseError(rownum, f"expected 3 columns, got {len(row)}")
        sx, sy, sl = (c.strip() for c in row)
        try:
            x = float(sx)
            y = float(sy)
        except ValueError:
            raise ParseError(rownum, f"non-numeric coordinate in {row!r}")
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ParseError(rownum, "coordinates must be finite")
        if sl not in ("0", "1"):
            raise ParseError(rownum, f"label must be 0 or 1, got {sl!r}")
        xs.append(x)
        ys.append(y)
        labels.append(int(sl))
    if not xs:
        raise EmptyInput("no data rows")
    return Dataset.from_points(xs, ys, labels)


def order_stat(values: np.ndarray, r: float) -> float:
    """Order statistic at real index r, 1-based, round-half-up, clamped to [1, n].

    ``values`` must be sorted ascending.  Every real r is valid because of
    the clamping.
    """
    n = len(values)
    if n == 0:
        raise ValueError("empty sequence has no order statistics")
    idx = min(max(round_half_up(r), 1), n)
    return float(values[idx - 1])


def order_stat_x(dataset: Dataset, r: float) -> float:
    """x-coordinate order statistic of the dataset (see ``order_stat``)."""
    return order_stat(dataset.xs, r)
