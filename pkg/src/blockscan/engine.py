"""Fast evaluation of per-block maxima under label permutations.

The trick: for a fixed window size v, the one-sided statistic is a
nondecreasing function of the number of 1s inside.  So the maximum of T
over a block factorizes as

    max over distinct sizes v of  T(v, max ones over windows of size v)

and a permutation pass only needs, per (block, size) group, the maximum
label count over that group's windows.  That inner reduction is integer
work: cumulative sums over the strip store plus two lookups per window.
An 8-lane kernel amortizes the window-index loads over 8 permutations.

The numpy fallback implements the same contract and doubles as a
cross-check in the tests.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .enumeration import RectangleIndex
from .statistic import llr_from_arrays

__all__ = ["GroupedEngine", "LANES"]

LANES = 8


def _use_numba() -> bool:
    return os.environ.get("BLOCKSCAN_NO_NUMBA", "") != "1"


_kernels = None


def _load_kernels():
    global _kernels
    if _kernels is None:
        from . import _kernels as mod
        _kernels = mod
    return _kernels


@dataclass
class _Groups:
    """Windows of all blocks sorted by (block, n_in), with group boundaries."""

    lo_pos: np.ndarray      # int32, index into the cumulative-sum array
    hi_pos: np.ndarray      # int32
    gstarts: np.ndarray     # int64, len G+1, group g = rows gstarts[g]:gstarts[g+1]
    gsize: np.ndarray       # int64, window size per group
    block_gslice: dict[int, slice]  # block ell -> slice of group indices


class GroupedEngine:
    """Per-permutation block maxima over a materialized RectangleIndex."""

    def __init__(self, index: RectangleIndex, two_sided: bool = False):
        self.index = index
        self.two_sided = two_sided
        self.n_total = index.dataset.n_total
        self.ones_total = index.dataset.ones_total
        if self.n_total >= 2 ** 15:
            raise ValueError("permutation engine supports N < 32768")
        self._groups = self._build_groups()
        self._concat_ids = index.seg_ids.astype(np.int32)
        self._n_lanes_buf = None

    def _build_groups(self) -> _Groups:
        idx = self.index
        lo_parts, hi_parts = [], []
        gends = [0]     # gstarts = [0] + group end rows, cumulative over blocks
        gsizes = []
        block_gslice = {}
        total_rows = 0
        for ell in idx.block_ids:
            br = idx.block(ell)
            g0 = len(gsizes)
            if len(br.n_in) > 0:
                order = np.argsort(br.n_in, kind="stable")
                nin = br.n_in[order]
                sid = br.sid[order]
                pos = idx.seg_off[sid]
                lo_parts.append((pos + br.a[order] - 1).astype(np.int32))
                hi_parts.append((pos + br.b[order]).astype(np.int32))
                change = np.nonzero(np.diff(nin))[0] + 1
                local_starts = np.concatenate(([0], change, [len(nin)]))
                gsizes.extend(nin[local_starts[:-1]].tolist())
                gends.extend((local_starts[1:] + total_rows).tolist())
                total_rows += len(nin)
            block_gslice[ell] = slice(g0, len(gsizes))
        return _Groups(
            lo_pos=np.concatenate(lo_parts) if lo_parts else np.empty(0, np.int32),
            hi_pos=np.concatenate(hi_parts) if hi_parts else np.empty(0, np.int32),
            gstarts=np.asarray(gends, dtype=np.int64),
            gsize=np.asarray(gsizes, dtype=np.int64),
            block_gslice=block_gslice)

    @property
    def n_windows(self) -> int:
        return len(self._groups.lo_pos)

    def _t_from_group_extrema(self, omax: np.ndarray, omin: np.ndarray | None) -> np.ndarray:
        """Statistic per group from its extreme label counts; shape (G, lanes)."""
        g = self._groups
        sizes = g.gsize[:, None]
        t = llr_from_arrays(np.broadcast_to(sizes, omax.shape), omax,
                            self.n_total, self.ones_total, two_sided=self.two_sided)
        if self.two_sided:
            t2 = llr_from_arrays(np.broadcast_to(sizes, omin.shape), omin,
                                 self.n_total, self.ones_total, two_sided=True)
            t = np.maximum(t, t2)
        return t

    def block_maxima_lanes(self, labels_mat: np.ndarray) -> np.ndarray:
        """Per-block maxima for ``LANES`` label vectors at once.

        ``labels_mat`` is (LANES, N) uint8; returns (n_blocks, LANES) float64.
        """
        g = self._groups
        n_groups = len(g.gsize)
        if _use_numba():
            k = _load_kernels()
            C = len(self._concat_ids)
            if self._n_lanes_buf is None:
                self._n_lanes_buf = (
                    np.empty((C + 1, LANES), dtype=np.int16),
                    np.empty((n_groups, LANES), dtype=np.int16),
                    np.empty((n_groups, LANES), dtype=np.int16),
                )
            cs, omax, omin = self._n_lanes_buf
            k.lanes_group_extrema(labels_mat, self._concat_ids, cs,
                                  g.lo_pos, g.hi_pos, g.gstarts, omax, omin,
                                  self.two_sided)
            omax_i = omax.astype(np.int64)
            omin_i = omin.astype(np.int64) if self.two_sided else None
        else:
            omax_i, omin_i = self._extrema_numpy(labels_mat)
        t = self._t_from_group_extrema(omax_i, omin_i)
        out = np.empty((len(self.index.block_ids), labels_mat.shape[0]))
        for bi, ell in enumerate(self.index.block_ids):
            sl = g.block_gslice[ell]
            if sl.stop > sl.start:
                out[bi] = t[sl].max(axis=0)
            else:
                out[bi] = 0.0
        return out

    def _extrema_numpy(self, labels_mat: np.ndarray):
        g = self._groups
        omax = np.empty((len(g.gsize), labels_mat.shape[0]), dtype=np.int64)
        omin = np.empty_like(omax) if self.two_sided else None
        for lane in range(labels_mat.shape[0]):
            vals = labels_mat[lane][self._concat_ids]
            cs = np.concatenate(([0], np.cumsum(vals, dtype=np.int64)))
            o = cs[g.hi_pos] - cs[g.lo_pos]
            omax[:, lane] = np.maximum.reduceat(o, g.gstarts[:-1])
            if self.two_sided:
                omin[:, lane] = np.minimum.reduceat(o, g.gstarts[:-1])
        return omax, omin

    def block_maxima(self, labels: np.ndarray) -> np.ndarray:
        """Per-block maxima for one label vector; returns (n_blocks,)."""
        mat = np.broadcast_to(labels.astype(np.uint8), (LANES, len(labels))).copy()
        return self.block_maxima_lanes(mat)[:, 0]
