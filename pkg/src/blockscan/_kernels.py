"""Numba kernels for the permutation engine.

Isolated in their own module so that importing the package does not pay the
JIT cost; compiled artifacts are cached on disk after the first call.
"""
from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def lanes_group_extrema(labels_mat, concat_ids, cs, lo_pos, hi_pos,
                        gstarts, out_max, out_min, want_min):
    """Per-group max (and optionally min) of window label counts, lane-parallel.

    labels_mat: (P, N) uint8 label vectors.
    concat_ids: (C,) int32 point index of every strip-store slot.
    cs:         (C+1, P) int16 scratch for lane-wise cumulative sums; rows
                are lane-contiguous so one window touches two short rows.
    lo_pos/hi_pos: (R,) int32 cumulative-sum indices per window.
    gstarts:    (G+1,) int64 group boundaries (windows sorted by group).
    out_max/out_min: (G, P) int16 results.
    """
    n_lanes = labels_mat.shape[0]
    n_concat = concat_ids.shape[0]
    for p in range(n_lanes):
        cs[0, p] = 0
    for t in range(n_concat):
        src = concat_ids[t]
        for p in range(n_lanes):
            cs[t + 1, p] = cs[t, p] + labels_mat[p, src]
    n_groups = gstarts.shape[0] - 1
    best = np.empty(n_lanes, dtype=np.int16)
    worst = np.empty(n_lanes, dtype=np.int16)
    for g in range(n_groups):
        first = gstarts[g]
        last = gstarts[g + 1]
        l0 = lo_pos[first]
        h0 = hi_pos[first]
        for p in range(n_lanes):
            best[p] = cs[h0, p] - cs[l0, p]
            worst[p] = best[p]
        for r in range(first + 1, last):
            l = lo_pos[r]
            h = hi_pos[r]
            for p in range(n_lanes):
                o = cs[h, p] - cs[l, p]
                if o > best[p]:
                    best[p] = o
                elif want_min and o < worst[p]:
                    worst[p] = o
        for p in range(n_lanes):
            out_max[g, p] = best[p]
            if want_min:
                out_min[g, p] = worst[p]
