"""Scans on observed labels, threshold application, minimal significant rectangles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocks import block_range
from .calibration import CalibrationResult, PermutationTable, conventional_threshold
from .enumeration import RectangleIndex
from .errors import BlockMismatch
from .model import Dataset
from .statistic import Counts, llr, llr_two_sided

__all__ = ["Detection", "blocked_scan", "conventional_scan", "minimal_rects",
           "detections_to_dicts"]


@dataclass(frozen=True)
class Detection:
    """A rectangle whose observed statistic exceeds its critical value."""

    ell: int
    i: int
    j: int
    k: int
    m: int
    n: int
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    n_in: int
    ones_in: int
    t_value: float
    threshold: float


def _collect_block_detections(index: RectangleIndex, ell: int, threshold: float,
                              two_sided: bool) -> list[Detection]:
    ds = index.dataset
    t = index.t_values(ell, two_sided=two_sided)
    sel = np.nonzero(t > threshold)[0]
    if len(sel) == 0:
        return []
    br = index.block(ell)
    ones = index.ones_in(ell)
    x_lo, x_hi = index.strip_x_bounds(br.sid[sel])
    y_lo, y_hi = index.rect_y_bounds(br.sid[sel], br.a[sel], br.b[sel])
    stat = llr_two_sided if two_sided else llr
    out = []
    for t_pos, ridx in enumerate(sel.tolist()):
        counts = Counts(int(br.n_in[ridx]), int(ones[ridx]),
                        ds.n_total, ds.ones_total)
        # reported value recomputed with the scalar formula so that an
        # independent recount reproduces it exactly
        t_exact = stat(counts)
        if not t_exact > threshold:
            continue
        i, j, k, m, n = index.representative(ell, ridx)
        out.append(Detection(
            ell=ell, i=i, j=j, k=k, m=m, n=n,
            x_lo=float(x_lo[t_pos]), x_hi=float(x_hi[t_pos]),
            y_lo=float(y_lo[t_pos]), y_hi=float(y_hi[t_pos]),
            n_in=counts.n_in, ones_in=counts.ones_in,
            t_value=t_exact, threshold=float(threshold)))
    return out


def _check_blocks(index: RectangleIndex, block_ids: list[int]) -> None:
    expected = list(block_range(index.dataset.n_total))
    if list(block_ids) != expected or list(index.block_ids) != expected:
        raise BlockMismatch(
            f"calibration blocks {list(block_ids)} vs dataset blocks {expected}")


def blocked_scan(dataset: Dataset, calibration: CalibrationResult,
                 index: RectangleIndex | None = None) -> list[Detection]:
    """All rectangles whose statistic exceeds their block's critical value."""
    if index is None:
        index = RectangleIndex(dataset)
    _check_blocks(index, calibration.block_ids)
    out = []
    for ell in calibration.block_ids:
        out.extend(_collect_block_detections(
            index, ell, calibration.thresholds[ell], calibration.two_sided))
    return out


def conventional_scan(dataset: Dataset, table: PermutationTable, alpha: float,
                      index: RectangleIndex | None = None) -> list[Detection]:
    """Rectangles above the single global critical value of the overall maximum."""
    if index is None:
        index = RectangleIndex(dataset)
    _check_blocks(index, table.block_ids)
    threshold = conventional_threshold(table, alpha)
    out = []
    for ell in table.block_ids:
        out.extend(_collect_block_detections(index, ell, threshold, table.two_sided))
    return out


def minimal_rects(detections: list[Detection]) -> list[Detection]:
    """Detections that contain no other detection (strict coordinate inclusion).

    Output ordered by block descending, then statistic descending.
    """
    k = len(detections)
    if k <= 1:
        return sorted(detections, key=_minimal_order)
    x_lo = np.array([d.x_lo for d in detections])
    x_hi = np.array([d.x_hi for d in detections])
    y_lo = np.array([d.y_lo for d in detections])
    y_hi = np.array([d.y_hi for d in detections])
    keep = np.ones(k, dtype=bool)
    chunk = max(1, int(4e6) // max(k, 1))
    for s in range(0, k, chunk):
        e = min(s + chunk, k)
        inside = ((x_lo[s:e, None] <= x_lo[None, :])
                  & (x_hi[s:e, None] >= x_hi[None, :])
                  & (y_lo[s:e, None] <= y_lo[None, :])
                  & (y_hi[s:e, None] >= y_hi[None, :]))
        same = ((x_lo[s:e, None] == x_lo[None, :])
                & (x_hi[s:e, None] == x_hi[None, :])
                & (y_lo[s:e, None] == y_lo[None, :])
                & (y_hi[s:e, None] == y_hi[None, :]))
        keep[s:e] &= ~(inside & ~same).any(axis=1)
    return sorted((d for d, kf in zip(detections, keep) if kf), key=_minimal_order)


def _minimal_order(d: Detection):
    return (-d.ell, -d.t_value, d.i, d.j, d.k, d.m, d.n, d.x_lo, d.y_lo)


def detections_to_dicts(detections: list[Detection]) -> list[dict]:
    return [{
        "ell": d.ell, "i": d.i, "j": d.j, "k": d.k, "m": d.m, "n": d.n,
        "x_lo": d.x_lo, "x_hi": d.x_hi, "y_lo": d.y_lo, "y_hi": d.y_hi,
        "n_in": d.n_in, "ones_in": d.ones_in,
        "t": d.t_value, "threshold": d.threshold,
    } for d in detections]
